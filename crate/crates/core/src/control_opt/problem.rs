//! Direct optimal-control problems on shell-structured graphs.

use num_complex::Complex;

use crate::control_opt::bspline::BSplineControl;
use crate::dynamics::{Control, ControlScheme, ReducedDynamics};
use crate::error::{Error, Result};
use crate::graphs::ShellDescriptor;
use crate::integrate::{find_first_peak, integrate, IntegratorConfig, Peak, Trajectory};
use crate::scalar::Real;

/// Quantity maximised by the optimiser.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Objective {
    /// Success probability at the end of the horizon.
    Terminal,
    /// Height of the first local maximum of the success probability.
    FirstPeak,
    /// `min(terminal, early)`, where `early` is the height of the first
    /// interior peak, scaled by `(deadline / time)^2` when the peak comes
    /// after `deadline` and zero when there is no interior peak. Favours
    /// protocols that can be measured either early or at the horizon.
    TerminalAndEarlyPeak { deadline: f64 },
}

/// Final time of the controlled evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon<T> {
    Fixed(T),
    /// Optimised inside `[lower, upper]`.
    Search { lower: T, upper: T },
}

/// Nonlinearity exponents tried by the outer discrete search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZetaSearch {
    /// One fixed assignment, one exponent per shell.
    Fixed(Vec<i32>),
    /// Every assignment in `values^(d+1)`.
    PerShell(Vec<i32>),
    /// One exponent for the marked shell and one shared by all other shells,
    /// each drawn from `values`.
    MarkedUnmarked(Vec<i32>),
}

impl ZetaSearch {
    /// All candidate assignments, in a fixed order.
    pub fn assignments(&self, shells: usize) -> Vec<Vec<i32>> {
        match self {
            ZetaSearch::Fixed(z) => vec![z.clone()],
            ZetaSearch::PerShell(values) => {
                let mut out = vec![Vec::new()];
                for _ in 0..shells {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            values.iter().map(move |&v| {
                                let mut next = prefix.clone();
                                next.push(v);
                                next
                            })
                        })
                        .collect();
                }
                out
            }
            ZetaSearch::MarkedUnmarked(values) => values
                .iter()
                .flat_map(|&marked| {
                    values.iter().map(move |&rest| {
                        let mut z = vec![rest; shells];
                        z[0] = marked;
                        z
                    })
                })
                .collect(),
        }
    }
}

/// A bounded control problem on the shell equations of a graph with one
/// marked node.
///
/// Parameters are laid out as `[spline points of shell 0 .. shell d,
/// free phases, horizon]`. Shell 1 has phase 0 and the marked shell has
/// phase `-pi/2` unless `free_marked_phase` is set; phases of shells
/// `2..=d` are always free.
#[derive(Clone, Debug)]
pub struct OptimizationProblem<T> {
    pub shells: ShellDescriptor,
    pub gamma: T,
    pub spline_points: usize,
    pub bound: T,
    pub zeta: ZetaSearch,
    pub horizon: Horizon<T>,
    pub objective: Objective,
    pub free_marked_phase: bool,
    /// Tolerances used inside the search loop.
    pub search_integrator: IntegratorConfig<T>,
    /// Tolerances for the final re-evaluation of the best candidate.
    pub report_integrator: IntegratorConfig<T>,
}

/// A parameter vector decoded into initial phases, controls and horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded<T> {
    pub phases: Vec<T>,
    pub scheme: ControlScheme<T>,
    pub horizon: T,
}

/// Outcome of one objective evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub objective: T,
    /// Success probability at the horizon.
    pub terminal: T,
    pub first_peak: Peak<T>,
    pub horizon: T,
    /// `false` when parameters were out of bounds or integration failed.
    pub feasible: bool,
}

impl<T: Real> Evaluation<T> {
    fn infeasible(horizon: T) -> Self {
        Self {
            objective: T::zero(),
            terminal: T::zero(),
            first_peak: Peak {
                time: T::zero(),
                value: T::zero(),
                interior: false,
            },
            horizon,
            feasible: false,
        }
    }
}

impl<T: Real> OptimizationProblem<T> {
    /// Cycle-style defaults: 5 spline points, bound 20, horizon searched in
    /// `[0.1, 10]`, exponents from `{1, 2}` split marked/unmarked.
    pub fn new(shells: ShellDescriptor, gamma: T) -> Self {
        Self {
            shells,
            gamma,
            spline_points: 5,
            bound: T::lit(20.0),
            zeta: ZetaSearch::MarkedUnmarked(vec![1, 2]),
            horizon: Horizon::Search {
                lower: T::lit(0.1),
                upper: T::lit(10.0),
            },
            objective: Objective::Terminal,
            free_marked_phase: false,
            search_integrator: IntegratorConfig::fast(),
            report_integrator: IntegratorConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shells.size(0) != 1 {
            return Err(Error::Config("optimisation requires a single marked node".into()));
        }
        if self.spline_points < 4 {
            return Err(Error::Config("cubic splines need at least 4 control points".into()));
        }
        if !(self.bound > T::zero()) {
            return Err(Error::Config("control bound must be positive".into()));
        }
        if let Horizon::Search { lower, upper } = self.horizon {
            if !(lower > T::zero() && upper > lower) {
                return Err(Error::Config(format!("bad horizon interval [{lower}, {upper}]")));
            }
        } else if let Horizon::Fixed(t) = self.horizon {
            if !(t > T::zero()) {
                return Err(Error::Config(format!("horizon must be positive, got {t}")));
            }
        }
        let k = self.shells.shell_count();
        let assignments = self.zeta.assignments(k);
        if assignments.is_empty() {
            return Err(Error::Config("empty nonlinearity search set".into()));
        }
        if let Some(z) = assignments.iter().find(|z| z.len() != k || z.iter().any(|&v| v < 0)) {
            return Err(Error::Config(format!("invalid exponent assignment {z:?} for {k} shells")));
        }
        self.search_integrator.validate()?;
        self.report_integrator.validate()
    }

    fn free_phase_count(&self) -> usize {
        self.shells.shell_count().saturating_sub(2) + usize::from(self.free_marked_phase)
    }

    /// Length of the parameter vector.
    pub fn dimension(&self) -> usize {
        self.shells.shell_count() * self.spline_points
            + self.free_phase_count()
            + usize::from(matches!(self.horizon, Horizon::Search { .. }))
    }

    /// Box constraints `(lower, upper)` for each parameter.
    pub fn bounds(&self) -> (Vec<T>, Vec<T>) {
        let mut lower = vec![-self.bound; self.shells.shell_count() * self.spline_points];
        let mut upper = vec![self.bound; lower.len()];
        for _ in 0..self.free_phase_count() {
            lower.push(-T::PI());
            upper.push(T::PI());
        }
        if let Horizon::Search { lower: a, upper: b } = self.horizon {
            lower.push(a);
            upper.push(b);
        }
        (lower, upper)
    }

    pub fn in_bounds(&self, parameters: &[T]) -> bool {
        let (lower, upper) = self.bounds();
        parameters.len() == lower.len()
            && parameters
                .iter()
                .zip(lower.iter().zip(&upper))
                .all(|(p, (a, b))| *p >= *a && *p <= *b)
    }

    /// Maps a parameter vector and exponent assignment to dynamics inputs.
    pub fn decode(&self, zeta: &[i32], parameters: &[T]) -> Result<Decoded<T>> {
        if !self.in_bounds(parameters) {
            return Err(Error::Domain("parameters outside their bounds".into()));
        }
        let k = self.shells.shell_count();
        if zeta.len() != k {
            return Err(Error::Config(format!("{} exponents for {k} shells", zeta.len())));
        }
        let p = self.spline_points;
        let horizon = match self.horizon {
            Horizon::Fixed(t) => t,
            Horizon::Search { .. } => *parameters.last().unwrap(),
        };
        let controls = parameters[..k * p]
            .chunks_exact(p)
            .map(|pts| BSplineControl::new(pts.to_vec(), horizon, self.bound).map(Control::Spline))
            .collect::<Result<Vec<_>>>()?;
        let mut free = parameters[k * p..k * p + self.free_phase_count()].iter().copied();
        let mut phases = vec![T::zero(); k];
        phases[0] = if self.free_marked_phase {
            free.next().unwrap()
        } else {
            -T::FRAC_PI_2()
        };
        for phase in phases.iter_mut().skip(2) {
            *phase = free.next().unwrap();
        }
        Ok(Decoded {
            phases,
            scheme: ControlScheme::new(zeta.to_vec(), controls)?,
            horizon,
        })
    }

    /// Interleaved `(re, im)` shell amplitudes with equal moduli `1/sqrt(n)`.
    pub fn initial_state(&self, phases: &[T]) -> Vec<T> {
        let r = T::from_count(self.shells.node_count()).sqrt().recip();
        phases
            .iter()
            .flat_map(|&th| {
                let x = Complex::from_polar(r, th);
                [x.re, x.im]
            })
            .collect()
    }

    /// Integrates the Cartesian shell system for decoded inputs.
    pub fn simulate(&self, decoded: &Decoded<T>, cfg: &IntegratorConfig<T>) -> Result<Trajectory<T>> {
        let dynamics = ReducedDynamics::on_shells(&self.shells, self.gamma);
        let y0 = self.initial_state(&decoded.phases);
        integrate(
            |t, y, dy| dynamics.rhs_real(t, y, &decoded.scheme, dy),
            &y0,
            T::zero(),
            decoded.horizon,
            cfg,
        )
    }

    /// Success probability `n_0 |x_0|^2` from an interleaved state.
    pub fn success_probability(&self, y: &[T]) -> T {
        T::from_count(self.shells.size(0)) * (y[0] * y[0] + y[1] * y[1])
    }

    fn score(&self, traj: &Trajectory<T>, horizon: T) -> Evaluation<T> {
        let terminal = self.success_probability(traj.final_state());
        let first_peak = find_first_peak(traj, |y| self.success_probability(y));
        let objective = match self.objective {
            Objective::Terminal => terminal,
            Objective::FirstPeak => first_peak.value,
            Objective::TerminalAndEarlyPeak { deadline } => {
                let deadline = T::lit(deadline);
                let early = if !first_peak.interior {
                    T::zero()
                } else if first_peak.time <= deadline {
                    first_peak.value
                } else {
                    first_peak.value * (deadline / first_peak.time).powi(2)
                };
                terminal.min(early)
            }
        };
        Evaluation {
            objective,
            terminal,
            first_peak,
            horizon,
            feasible: objective.is_finite(),
        }
    }

    /// Objective of one candidate using the search tolerances. Out-of-bounds
    /// parameters and failed integrations score zero and are flagged.
    pub fn evaluate_candidate(&self, zeta: &[i32], parameters: &[T]) -> Evaluation<T> {
        self.evaluate_with(zeta, parameters, &self.search_integrator).0
    }

    pub(crate) fn evaluate_with(
        &self,
        zeta: &[i32],
        parameters: &[T],
        cfg: &IntegratorConfig<T>,
    ) -> (Evaluation<T>, Option<Trajectory<T>>) {
        let Ok(decoded) = self.decode(zeta, parameters) else {
            return (Evaluation::infeasible(T::zero()), None);
        };
        match self.simulate(&decoded, cfg) {
            Ok(traj) => {
                let eval = self.score(&traj, decoded.horizon);
                if eval.feasible {
                    (eval, Some(traj))
                } else {
                    (Evaluation::infeasible(decoded.horizon), None)
                }
            }
            Err(_) => (Evaluation::infeasible(decoded.horizon), None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::CompleteProtocol;
    use crate::graphs::Graph;

    fn cycle_problem() -> OptimizationProblem<f64> {
        let shells = Graph::cycle(6, [0]).unwrap().shell_descriptor().unwrap();
        OptimizationProblem::new(shells, 1.0)
    }

    #[test]
    fn layout() {
        let p = cycle_problem();
        assert_eq!(p.dimension(), 4 * 5 + 2 + 1);
        let (lo, hi) = p.bounds();
        assert_eq!(lo[0], -20.0);
        assert_eq!(hi[21], std::f64::consts::PI);
        assert_eq!((lo[22], hi[22]), (0.1, 10.0));
        assert_eq!(p.zeta.assignments(4), vec![vec![1, 1, 1, 1], vec![1, 2, 2, 2], vec![2, 1, 1, 1], vec![2, 2, 2, 2]]);
        assert_eq!(ZetaSearch::PerShell(vec![0, 1, 2]).assignments(3).len(), 27);
    }

    #[test]
    fn decode_places_phases() {
        let p = cycle_problem();
        let mut x = vec![1.0; p.dimension()];
        x[20] = 0.25;
        x[21] = -0.5;
        x[22] = 3.0;
        let d = p.decode(&[2, 1, 1, 1], &x).unwrap();
        assert_eq!(d.phases, vec![-std::f64::consts::FRAC_PI_2, 0.0, 0.25, -0.5]);
        assert_eq!(d.horizon, 3.0);
        let y0 = p.initial_state(&d.phases);
        let total: f64 = (0..4).map(|i| p.shells.size(i) as f64 * (y0[2 * i].powi(2) + y0[2 * i + 1].powi(2))).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn out_of_bounds_is_infeasible() {
        let p = cycle_problem();
        let mut x = vec![0.0; p.dimension()];
        x[22] = 1.0;
        x[3] = 25.0;
        let e = p.evaluate_candidate(&[1, 1, 1, 1], &x);
        assert!(!e.feasible);
        assert_eq!(e.objective, 0.0);
        assert!(!p.evaluate_candidate(&[1, 1, 1, 1], &x[..5]).feasible);
    }

    #[test]
    fn analytic_constant_controls_on_complete_graph() {
        for n in [3usize, 4, 10] {
            let g = 1.0;
            let protocol = CompleteProtocol::<f64>::new(n, 1, g).unwrap();
            let shells = Graph::complete(n, [0]).unwrap().shell_descriptor().unwrap();
            let mut p = OptimizationProblem::new(shells, protocol.gamma());
            p.zeta = ZetaSearch::Fixed(vec![0, 0]);
            p.horizon = Horizon::Fixed(protocol.end_time());
            p.search_integrator = IntegratorConfig::default();
            // u = 0 on unmarked, u_* = g on the marked node
            let mut x = vec![g; 5];
            x.extend([0.0; 5]);
            let e = p.evaluate_candidate(&[0, 0], &x);
            assert!(e.feasible);
            assert!((e.terminal - 1.0).abs() <= 1e-6, "n={n}: {}", e.terminal);
        }
    }
}
