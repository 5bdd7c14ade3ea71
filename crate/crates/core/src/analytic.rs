//! Closed-form search protocol on the complete graph.
//!
//! Holding the phase difference `Theta = theta - theta_*` at `pi/2` makes the
//! marked radius follow
//!
//! ```text
//! r_*(t) = sin(omega t + asin(sqrt(N/n))) / sqrt(N),   omega = g sqrt(N (n - N)) / (n - 2N)
//! ```
//!
//! which reaches `1/sqrt(N)` (certain success) at
//! `t_f = acos(sqrt(N/n)) / omega`. The phase stays pinned as long as the
//! controls satisfy `u_* r_*^(2 zeta_*) - u r^(2 zeta) = g`.

use crate::dynamics::{
    contracted_rates, initial_state_for, ControlScheme, ModelParams, ReducedDynamics,
};
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::integrate::{find_first_peak, integrate, IntegratorConfig, Peak, Trajectory};
use crate::scalar::{nonlinear_factor, Real};

/// Parameters of the complete-graph protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct CompleteProtocol<T> {
    pub n: usize,
    pub marked: usize,
    pub g: T,
    pub zeta_marked: i32,
    pub zeta_unmarked: i32,
    /// Control on the unmarked class. The control condition fixes only one
    /// of the two controls; this one is free and constant.
    pub free_control: T,
}

impl<T: Real> CompleteProtocol<T> {
    /// Requires `n > 2N` and `g != 0`.
    pub fn new(n: usize, marked: usize, g: T) -> Result<Self> {
        if marked == 0 || n <= 2 * marked {
            return Err(Error::Config(format!(
                "the analytic protocol needs n > 2N >= 2, got n = {n}, N = {marked}"
            )));
        }
        if g == T::zero() {
            return Err(Error::Config("coupling g must be nonzero".into()));
        }
        Ok(Self {
            n,
            marked,
            g,
            zeta_marked: 0,
            zeta_unmarked: 0,
            free_control: T::zero(),
        })
    }

    pub fn with_zeta(mut self, zeta_marked: i32, zeta_unmarked: i32) -> Self {
        self.zeta_marked = zeta_marked;
        self.zeta_unmarked = zeta_unmarked;
        self
    }

    pub fn with_free_control(mut self, u: T) -> Self {
        self.free_control = u;
        self
    }

    pub fn params(&self) -> ModelParams<T> {
        ModelParams::from_coupling(self.g, self.n, self.marked).expect("validated in new")
    }

    pub fn gamma(&self) -> T {
        self.params().gamma
    }

    /// Angular rate `omega` of the marked amplitude.
    pub fn omega(&self) -> T {
        let (n, m) = (T::from_count(self.n), T::from_count(self.marked));
        self.g * (m * (n - m)).sqrt() / (n - T::lit(2.0) * m)
    }

    fn initial_angle(&self) -> T {
        (T::from_count(self.marked) / T::from_count(self.n)).sqrt().asin()
    }

    /// `t_f = (n - 2N)/g * acos(sqrt(N/n)) / sqrt(N (n - N))`.
    pub fn end_time(&self) -> T {
        let (n, m) = (T::from_count(self.n), T::from_count(self.marked));
        (n - T::lit(2.0) * m) / self.g * (m / n).sqrt().acos() / (m * (n - m)).sqrt()
    }

    fn check_time(&self, t: T) -> Result<()> {
        let tf = self.end_time();
        let slack = T::lit(1e-12) * tf.abs().max(T::one());
        if t < -slack || t > tf + slack {
            return Err(Error::Domain(format!(
                "t = {t} outside the protocol interval [0, {tf}]"
            )));
        }
        Ok(())
    }

    /// Marked radius along the protocol, continued past `t_f` by the same sine.
    pub fn r_star_unchecked(&self, t: T) -> T {
        (self.omega() * t + self.initial_angle()).sin() / T::from_count(self.marked).sqrt()
    }

    /// Unmarked radius `|cos(omega t + asin sqrt(N/n))| / sqrt(n - N)`.
    pub fn r_unchecked(&self, t: T) -> T {
        (self.omega() * t + self.initial_angle()).cos().abs()
            / T::from_count(self.n - self.marked).sqrt()
    }

    /// `r_*(t)` on `[0, t_f]`.
    pub fn r_star(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        Ok(self.r_star_unchecked(t))
    }

    /// `N r_*(t)^2` on `[0, t_f]`.
    pub fn success_probability(&self, t: T) -> Result<T> {
        let r = self.r_star(t)?;
        Ok(T::from_count(self.marked) * r * r)
    }

    /// `(u, u_*)` with `u` the free control and
    /// `u_* = (g + u r^(2 zeta)) / r_*^(2 zeta_*)`, valid on `[0, t_f)`.
    pub fn control(&self, t: T) -> Result<(T, T)> {
        self.check_time(t)?;
        let (u, u_star) = self.control_unchecked(t);
        if !u_star.is_finite() {
            return Err(Error::Domain(format!("control singular at t = {t}")));
        }
        Ok((u, u_star))
    }

    pub fn control_unchecked(&self, t: T) -> (T, T) {
        let u = self.free_control;
        let unmarked = u * nonlinear_factor(self.r_unchecked(t), self.zeta_unmarked);
        let u_star = (self.g + unmarked) / nonlinear_factor(self.r_star_unchecked(t), self.zeta_marked);
        (u, u_star)
    }

    /// Control scheme for the two-class `[marked, unmarked]` reduction.
    pub fn scheme(&self) -> ControlScheme<T> {
        ControlScheme::complete_analytic(self)
    }
}

/// Control offsets `u = nu`, `u_* = g + nu_*` used to model imperfect controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationSpec<T> {
    pub nu_marked: T,
    pub nu_unmarked: T,
}

/// Integrates the contracted `(r_*, Theta)` system from the optimal start
/// `(1/sqrt(n), pi/2)` up to `t_end`.
///
/// The unmarked radius is taken from probability conservation and clamped at
/// zero, so stage values that overshoot `N r_*^2 = 1` by round-off stay finite.
pub fn integrate_contracted<T: Real>(
    params: &ModelParams<T>,
    scheme: &ControlScheme<T>,
    t_end: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    let (n, m) = (params.n, params.marked);
    if m >= n {
        return Err(Error::Config("contracted system needs unmarked nodes".into()));
    }
    let y0 = [T::one() / T::from_count(n).sqrt(), T::FRAC_PI_2()];
    let n_marked = T::from_count(m);
    let n_unmarked = T::from_count(n - m);
    integrate(
        |t, y, dy| {
            let rest = (T::one() - n_marked * y[0] * y[0]).max(T::zero());
            let r = (rest / n_unmarked).sqrt();
            let d = contracted_rates(y[0], r, y[1], t, scheme, params);
            dy[0] = d.r_star;
            dy[1] = d.theta_diff;
        },
        &y0,
        T::zero(),
        t_end,
        cfg,
    )
}

/// `E = 1 - N r_*(t_f)^2` under perturbed constant controls, evaluated at the
/// unperturbed end time. Requires `zeta = zeta_* = 0`.
pub fn perturbed_error<T: Real>(
    protocol: &CompleteProtocol<T>,
    perturbation: &PerturbationSpec<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<T> {
    if protocol.zeta_marked != 0 || protocol.zeta_unmarked != 0 {
        return Err(Error::Config(
            "perturbed error is defined for zeta = zeta_* = 0".into(),
        ));
    }
    let scheme = ControlScheme::constant(
        vec![0, 0],
        vec![protocol.g + perturbation.nu_marked, perturbation.nu_unmarked],
    );
    let tf = protocol.end_time();
    let traj = integrate_contracted(&protocol.params(), &scheme, tf, cfg)?;
    let r_star = traj.final_state()[0];
    Ok(T::one() - T::from_count(protocol.marked) * r_star * r_star)
}

/// Runtime regime of the search on `K_n` with `N` marked items.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuntimeRegime<T> {
    /// `N^⊥ > N`: the controlled protocol finishes at `end_time`.
    Nonlinear { end_time: T },
    /// `N^⊥ <= N`: constant-time regime with zero controls. `padding` virtual
    /// unmarked nodes restore `n > 2N` if the nonlinear protocol is wanted.
    Constant { padding: usize },
}

pub fn runtime_class<T: Real>(n: usize, marked: usize, g: T) -> Result<RuntimeRegime<T>> {
    if marked == 0 || marked > n {
        return Err(Error::Config(format!("need 1 <= N <= n, got N = {marked}, n = {n}")));
    }
    if n > 2 * marked {
        Ok(RuntimeRegime::Nonlinear {
            end_time: CompleteProtocol::new(n, marked, g)?.end_time(),
        })
    } else {
        Ok(RuntimeRegime::Constant {
            padding: 2 * marked + 1 - n,
        })
    }
}

/// Reduced complete-graph trajectory (Cartesian, classes `[marked, unmarked]`)
/// from the standard initial state.
pub fn integrate_complete<T: Real>(
    n: usize,
    marked: usize,
    gamma: T,
    scheme: &ControlScheme<T>,
    t_end: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    let graph = Graph::complete(n, 0..marked)?;
    let partition = graph.reduce();
    if partition.len() != 2 {
        return Err(Error::Config("complete-graph reduction needs 1 <= N < n".into()));
    }
    let dynamics = ReducedDynamics::on_partition(&graph, &partition, gamma);
    let y0 = initial_state_for::<T>(partition.marked_flags(), partition.multiplicities()).to_real();
    integrate(|t, y, dy| dynamics.rhs_real(t, y, scheme, dy), &y0, T::zero(), t_end, cfg)
}

/// First maximum of the success probability under zero controls, the
/// measurement time of the constant-time regime.
pub fn zero_control_peak<T: Real>(
    n: usize,
    marked: usize,
    gamma: T,
    horizon: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Peak<T>> {
    let traj = integrate_complete(n, marked, gamma, &ControlScheme::uncontrolled(2), horizon, cfg)?;
    let m = T::from_count(marked);
    Ok(find_first_peak(&traj, |y| m * (y[0] * y[0] + y[1] * y[1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn end_time_values() {
        // (1/sqrt 2) acos(1/sqrt 3)
        let tf = CompleteProtocol::new(3, 1, 1.0).unwrap().end_time();
        assert_relative_eq!(tf, 0.675_510_858_856_039_9, epsilon = 1e-12);
        assert_relative_eq!(tf, (1.0f64 / 3.0).sqrt().acos() / 2f64.sqrt(), epsilon = 1e-15);
        let tf = CompleteProtocol::new(10, 1, 1.0).unwrap().end_time();
        assert_relative_eq!(tf, 8.0 / 3.0 * 0.1f64.sqrt().acos(), epsilon = 1e-14);
        assert!((tf - 3.330_79).abs() < 5e-6);
        let half = CompleteProtocol::new(10, 1, 2.0).unwrap().end_time();
        assert_eq!(half, tf / 2.0);
    }

    #[test]
    fn trajectory_endpoints() {
        let p = CompleteProtocol::new(17, 3, 1.5).unwrap();
        assert_relative_eq!(p.r_star(0.0).unwrap(), 1.0 / 17f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.success_probability(p.end_time()).unwrap(), 1.0, epsilon = 1e-14);
        assert!(p.r_star(-0.1).is_err());
        assert!(p.r_star(p.end_time() * 1.01).is_err());
    }

    #[test]
    fn success_probability_is_monotone() {
        let p = CompleteProtocol::new(10, 1, 1.0).unwrap();
        let tf = p.end_time();
        let probs: Vec<f64> = (0..=200).map(|k| p.success_probability(tf * k as f64 / 200.0).unwrap()).collect();
        assert!(probs.windows(2).all(|w| w[1] >= w[0]));
        assert_relative_eq!(probs[0], 0.1, epsilon = 1e-14);
    }

    #[test]
    fn controls() {
        let p = CompleteProtocol::new(10, 1, 1.0).unwrap();
        assert_eq!(p.control(0.7).unwrap(), (0.0, 1.0));
        let p = p.with_zeta(1, 0);
        let tf = p.end_time();
        let (_, u_star) = p.control(0.0).unwrap();
        assert_relative_eq!(u_star, 10.0, epsilon = 1e-12);
        let (_, u_end) = p.control(tf).unwrap();
        assert_relative_eq!(u_end, 1.0, epsilon = 1e-12);
        // u_* = g / r_*^2
        let t = 0.4 * tf;
        let r = p.r_star(t).unwrap();
        assert_relative_eq!(p.control(t).unwrap().1, 1.0 / (r * r), epsilon = 1e-12);
    }

    #[test]
    fn regimes() {
        match runtime_class(100, 1, 1.0).unwrap() {
            RuntimeRegime::Nonlinear { end_time } => {
                assert_eq!(end_time, CompleteProtocol::new(100, 1, 1.0).unwrap().end_time())
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(runtime_class::<f64>(10, 5, 1.0).unwrap(), RuntimeRegime::Constant { padding: 1 });
        assert_eq!(runtime_class::<f64>(10, 6, 1.0).unwrap(), RuntimeRegime::Constant { padding: 3 });
        assert!(CompleteProtocol::new(4, 2, 1.0).is_err());
    }

    #[test]
    fn zero_control_regime_has_a_peak() {
        let peak = zero_control_peak(10, 5, 1.0, 5.0, &IntegratorConfig::default()).unwrap();
        assert!(peak.interior);
        assert!(peak.value > 0.5 && peak.value <= 1.0 + 1e-9);
    }
}
