//! Right-hand sides of the discrete nonlinear Schrödinger equation
//!
//! ```text
//! i x'_j = gamma sum_k L_jk x_k + u_j(t) |x_j|^(2 zeta_j) x_j
//! ```
//!
//! in full coordinates, on equivalence classes (Cartesian), and in the polar
//! forms used for the complete graph and for shell-structured graphs.
//!
//! Cartesian amplitudes are the primary representation: polar phases lose
//! meaning whenever a radial component reaches zero.

use num_complex::Complex;

use crate::analytic::CompleteProtocol;
use crate::control_opt::BSplineControl;
use crate::error::{Error, Result};
use crate::graphs::{EquivalencePartition, Graph, ShellDescriptor};
use crate::scalar::{nonlinear_factor, Real};

/// Polar view `r e^{i theta}` of one amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polar<T> {
    pub r: T,
    pub theta: T,
}

impl<T: Real> Polar<T> {
    pub fn new(r: T, theta: T) -> Self {
        Self { r, theta }
    }

    pub fn from_complex(x: Complex<T>) -> Self {
        Self {
            r: x.norm(),
            theta: x.im.atan2(x.re),
        }
    }

    pub fn to_complex(self) -> Complex<T> {
        Complex::from_polar(self.r, self.theta)
    }
}

/// One complex amplitude per equivalence class together with the class sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState<T> {
    pub amplitudes: Vec<Complex<T>>,
    pub multiplicity: Vec<usize>,
    pub time: T,
}

impl<T: Real> SystemState<T> {
    pub fn new(amplitudes: Vec<Complex<T>>, multiplicity: Vec<usize>, time: T) -> Result<Self> {
        if amplitudes.len() != multiplicity.len() {
            return Err(Error::Config(format!(
                "{} amplitudes for {} classes",
                amplitudes.len(),
                multiplicity.len()
            )));
        }
        Ok(Self {
            amplitudes,
            multiplicity,
            time,
        })
    }

    /// Rebuilds a state from interleaved `(re, im)` pairs.
    pub fn from_real(y: &[T], multiplicity: Vec<usize>, time: T) -> Self {
        Self {
            amplitudes: y.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect(),
            multiplicity,
            time,
        }
    }

    /// Interleaved `(re, im)` pairs, the layout used by the integrator.
    pub fn to_real(&self) -> Vec<T> {
        self.amplitudes.iter().flat_map(|x| [x.re, x.im]).collect()
    }

    pub fn class_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn radii(&self) -> Vec<T> {
        self.amplitudes.iter().map(|x| x.norm()).collect()
    }

    pub fn phases(&self) -> Vec<T> {
        self.amplitudes.iter().map(|x| x.im.atan2(x.re)).collect()
    }

    pub fn polar(&self) -> Vec<Polar<T>> {
        self.amplitudes.iter().copied().map(Polar::from_complex).collect()
    }

    /// Probability mass carried by each class: `multiplicity * r^2`.
    pub fn class_probabilities(&self) -> Vec<T> {
        self.amplitudes
            .iter()
            .zip(&self.multiplicity)
            .map(|(x, &m)| T::from_count(m) * x.norm_sqr())
            .collect()
    }

    pub fn total_probability(&self) -> T {
        total_probability(self)
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|x| x * k).collect(),
            ..self.clone()
        }
    }

    /// Expands class amplitudes to one amplitude per node.
    pub fn lift(&self, partition: &EquivalencePartition) -> Self {
        Self {
            amplitudes: partition
                .class_of()
                .iter()
                .map(|&c| self.amplitudes[c])
                .collect(),
            multiplicity: vec![1; partition.node_count()],
            time: self.time,
        }
    }
}

/// `sum_classes multiplicity * |x|^2`.
pub fn total_probability<T: Real>(state: &SystemState<T>) -> T {
    state.class_probabilities().into_iter().sum()
}

/// Uniform-magnitude start with `r = 1/sqrt(n)` on every node. Unmarked
/// classes have phase 0 and marked classes phase `-pi/2`, so
/// `sin(theta - theta_marked) = 1` and the marked amplitude grows at once.
pub fn initial_state<T: Real>(partition: &EquivalencePartition) -> SystemState<T> {
    initial_state_for(partition.marked_flags(), partition.multiplicities())
}

pub fn initial_state_for<T: Real>(marked: &[bool], multiplicity: Vec<usize>) -> SystemState<T> {
    let n: usize = multiplicity.iter().sum();
    let r = T::one() / T::from_count(n).sqrt();
    let amplitudes = marked
        .iter()
        .map(|&m| {
            let theta = if m { -T::FRAC_PI_2() } else { T::zero() };
            Complex::from_polar(r, theta)
        })
        .collect();
    SystemState {
        amplitudes,
        multiplicity,
        time: T::zero(),
    }
}

/// Coupling constants. `gamma = g / (n - 2N)` when built from `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub g: T,
    pub gamma: T,
    pub n: usize,
    pub marked: usize,
}

impl<T: Real> ModelParams<T> {
    /// `gamma = g / (n - 2N)`; rejects `n = 2N` where gamma is undefined.
    pub fn from_coupling(g: T, n: usize, marked: usize) -> Result<Self> {
        check_counts(n, marked)?;
        if n == 2 * marked {
            return Err(Error::Config(format!(
                "n = 2N = {n}: gamma = g/(n - 2N) is singular; specify gamma directly"
            )));
        }
        if g == T::zero() {
            return Err(Error::Config("coupling g must be nonzero".into()));
        }
        let denom = T::from_count(n) - T::lit(2.0) * T::from_count(marked);
        Ok(Self {
            g,
            gamma: g / denom,
            n,
            marked,
        })
    }

    /// Direct hopping strength; `g` is back-computed as `gamma (n - 2N)`.
    pub fn with_gamma(gamma: T, n: usize, marked: usize) -> Result<Self> {
        check_counts(n, marked)?;
        let denom = T::from_count(n) - T::lit(2.0) * T::from_count(marked);
        Ok(Self {
            g: gamma * denom,
            gamma,
            n,
            marked,
        })
    }

    pub fn unmarked(&self) -> usize {
        self.n - self.marked
    }
}

fn check_counts(n: usize, marked: usize) -> Result<()> {
    if marked == 0 || marked > n {
        return Err(Error::Config(format!("need 1 <= N <= n, got N = {marked}, n = {n}")));
    }
    Ok(())
}

/// Which class of the complete-graph protocol a control drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassRole {
    Marked,
    Unmarked,
}

/// A control signal `u(t)`, evaluated lazily at integrator-chosen times.
#[derive(Clone, Debug, PartialEq)]
pub enum Control<T> {
    Constant(T),
    Spline(BSplineControl<T>),
    /// Open-loop analytic control of the complete-graph protocol.
    CompleteAnalytic {
        protocol: CompleteProtocol<T>,
        role: ClassRole,
    },
}

impl<T: Real> Control<T> {
    pub fn value(&self, t: T) -> T {
        match self {
            Control::Constant(u) => *u,
            Control::Spline(s) => s.value_clamped(t),
            Control::CompleteAnalytic { protocol, role } => {
                let (u, u_star) = protocol.control_unchecked(t);
                match role {
                    ClassRole::Marked => u_star,
                    ClassRole::Unmarked => u,
                }
            }
        }
    }
}

/// Per-class nonlinearity exponents and control signals.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlScheme<T> {
    pub zeta: Vec<i32>,
    pub controls: Vec<Control<T>>,
}

impl<T: Real> ControlScheme<T> {
    pub fn new(zeta: Vec<i32>, controls: Vec<Control<T>>) -> Result<Self> {
        if zeta.len() != controls.len() {
            return Err(Error::Config(format!(
                "{} nonlinearity exponents for {} controls",
                zeta.len(),
                controls.len()
            )));
        }
        Ok(Self { zeta, controls })
    }

    /// `u = 0`, `zeta = 0` on every class: the linear quantum walk.
    pub fn uncontrolled(classes: usize) -> Self {
        Self::constant(vec![0; classes], vec![T::zero(); classes])
    }

    pub fn constant(zeta: Vec<i32>, values: Vec<T>) -> Self {
        assert_eq!(zeta.len(), values.len());
        Self {
            zeta,
            controls: values.into_iter().map(Control::Constant).collect(),
        }
    }

    /// Two-class scheme `[marked, unmarked]` following the analytic protocol.
    pub fn complete_analytic(protocol: &CompleteProtocol<T>) -> Self {
        Self {
            zeta: vec![protocol.zeta_marked, protocol.zeta_unmarked],
            controls: vec![
                Control::CompleteAnalytic {
                    protocol: protocol.clone(),
                    role: ClassRole::Marked,
                },
                Control::CompleteAnalytic {
                    protocol: protocol.clone(),
                    role: ClassRole::Unmarked,
                },
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    /// Class-level scheme expanded to one entry per node.
    pub fn lift(&self, partition: &EquivalencePartition) -> Self {
        let pick = |c: usize| (self.zeta[c], self.controls[c].clone());
        let (zeta, controls) = partition.class_of().iter().map(|&c| pick(c)).unzip();
        Self { zeta, controls }
    }

    /// `u_c(t) r^(2 zeta_c)`, the nonlinear phase rate of class `c`.
    #[inline]
    pub fn nonlinear_rate(&self, class: usize, t: T, r: T) -> T {
        self.controls[class].value(t) * nonlinear_factor(r, self.zeta[class])
    }
}

/// DNLSE on the classes of an equitable partition, in Cartesian form.
#[derive(Clone, Debug)]
pub struct ReducedDynamics<T> {
    quotient: Vec<Vec<T>>,
    multiplicity: Vec<usize>,
    gamma: T,
}

impl<T: Real> ReducedDynamics<T> {
    pub fn from_quotient(quotient: &[Vec<i64>], multiplicity: Vec<usize>, gamma: T) -> Self {
        let quotient = quotient
            .iter()
            .map(|row| row.iter().map(|&q| T::lit(q as f64)).collect())
            .collect();
        Self {
            quotient,
            multiplicity,
            gamma,
        }
    }

    pub fn on_partition(graph: &Graph, partition: &EquivalencePartition, gamma: T) -> Self {
        Self::from_quotient(
            &partition.quotient_laplacian(graph),
            partition.multiplicities(),
            gamma,
        )
    }

    /// The unreduced system: one class per node.
    pub fn full(graph: &Graph, gamma: T) -> Self {
        Self::from_quotient(&graph.laplacian(), vec![1; graph.node_count()], gamma)
    }

    pub fn on_shells(shells: &ShellDescriptor, gamma: T) -> Self {
        Self::from_quotient(&shells.quotient_laplacian(), shells.sizes().to_vec(), gamma)
    }

    pub fn class_count(&self) -> usize {
        self.multiplicity.len()
    }

    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `x' = -i (gamma Q x + u |x|^(2 zeta) x)`.
    pub fn rhs(&self, t: T, x: &[Complex<T>], scheme: &ControlScheme<T>) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); x.len()];
        self.rhs_into(t, x, scheme, &mut out);
        out
    }

    fn rhs_into(&self, t: T, x: &[Complex<T>], scheme: &ControlScheme<T>, out: &mut [Complex<T>]) {
        for (a, row) in self.quotient.iter().enumerate() {
            let mut hop = Complex::new(T::zero(), T::zero());
            for (q, xb) in row.iter().zip(x) {
                if *q != T::zero() {
                    hop = hop + xb * *q;
                }
            }
            let drive = scheme.nonlinear_rate(a, t, x[a].norm());
            let w = hop * self.gamma + x[a] * drive;
            // -i w
            out[a] = Complex::new(w.im, -w.re);
        }
    }

    /// Same as [`ReducedDynamics::rhs`] on interleaved `(re, im)` storage.
    pub fn rhs_real(&self, t: T, y: &[T], scheme: &ControlScheme<T>, dy: &mut [T]) {
        let k = self.class_count();
        for a in 0..k {
            let mut hop_re = T::zero();
            let mut hop_im = T::zero();
            for (b, &q) in self.quotient[a].iter().enumerate() {
                if q != T::zero() {
                    hop_re += q * y[2 * b];
                    hop_im += q * y[2 * b + 1];
                }
            }
            let (re, im) = (y[2 * a], y[2 * a + 1]);
            let drive = scheme.nonlinear_rate(a, t, (re * re + im * im).sqrt());
            let w_re = self.gamma * hop_re + drive * re;
            let w_im = self.gamma * hop_im + drive * im;
            dy[2 * a] = w_im;
            dy[2 * a + 1] = -w_re;
        }
    }

    pub fn state_from_real(&self, y: &[T], t: T) -> SystemState<T> {
        SystemState::from_real(y, self.multiplicity.clone(), t)
    }
}

/// Full DNLSE derivative `dx_j/dt` for a state over singleton classes.
pub fn rhs_full<T: Real>(
    state: &SystemState<T>,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
    laplacian: &[Vec<i64>],
) -> Result<Vec<Complex<T>>> {
    if state.class_count() != laplacian.len() || scheme.len() != laplacian.len() {
        return Err(Error::Config(format!(
            "state has {} entries, scheme {}, Laplacian {}",
            state.class_count(),
            scheme.len(),
            laplacian.len()
        )));
    }
    let dynamics = ReducedDynamics::from_quotient(laplacian, vec![1; laplacian.len()], params.gamma);
    Ok(dynamics.rhs(state.time, &state.amplitudes, scheme))
}

/// Maps a Cartesian derivative through the polar chart:
/// `r' = Re(conj(x) x') / r`, `theta' = Im(conj(x) x') / r^2`.
pub fn polar_rates<T: Real>(x: Complex<T>, dx: Complex<T>, class: usize) -> Result<Polar<T>> {
    let r2 = x.norm_sqr();
    if r2 == T::zero() {
        return Err(Error::PolarSingularity { class });
    }
    let p = x.conj() * dx;
    Ok(Polar::new(p.re / r2.sqrt(), p.im / r2))
}

/// Polar state of the two-class complete-graph reduction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompletePolar<T> {
    pub r_star: T,
    pub theta_star: T,
    pub r: T,
    pub theta: T,
}

impl<T: Real> CompletePolar<T> {
    pub fn from_state(state: &SystemState<T>) -> Self {
        let m = Polar::from_complex(state.amplitudes[0]);
        let u = Polar::from_complex(state.amplitudes[1]);
        Self {
            r_star: m.r,
            theta_star: m.theta,
            r: u.r,
            theta: u.theta,
        }
    }

    pub fn theta_diff(&self) -> T {
        self.theta - self.theta_star
    }
}

/// The four reduced complete-graph equations. Class 0 of `scheme` drives the
/// marked nodes, class 1 the unmarked nodes.
pub fn rhs_reduced_complete<T: Real>(
    state: &CompletePolar<T>,
    t: T,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
) -> Result<CompletePolar<T>> {
    if state.r_star == T::zero() {
        return Err(Error::PolarSingularity { class: 0 });
    }
    if state.r == T::zero() {
        return Err(Error::PolarSingularity { class: 1 });
    }
    let gamma = params.gamma;
    let n_marked = T::from_count(params.marked);
    let n_unmarked = T::from_count(params.unmarked());
    let diff = state.theta - state.theta_star;
    let (sin, cos) = diff.sin_cos();
    Ok(CompletePolar {
        r_star: gamma * n_unmarked * state.r * sin,
        r: -gamma * n_marked * state.r_star * sin,
        theta_star: gamma * n_unmarked * (T::one() - state.r / state.r_star * cos)
            - scheme.nonlinear_rate(0, t, state.r_star),
        theta: gamma * n_marked * (T::one() - state.r_star / state.r * cos)
            - scheme.nonlinear_rate(1, t, state.r),
    })
}

/// State of the contracted complete-graph system: marked radius and the phase
/// difference `Theta = theta_unmarked - theta_marked`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contracted<T> {
    pub r_star: T,
    pub theta_diff: T,
}

/// Unmarked radius implied by probability conservation:
/// `r = sqrt((1 - N r_*^2) / (n - N))`.
pub fn probability_constraint<T: Real>(r_star: T, n: usize, marked: usize) -> Result<T> {
    if marked >= n {
        return Err(Error::Domain(format!("no unmarked nodes (n = {n}, N = {marked})")));
    }
    let mut rest = T::one() - T::from_count(marked) * r_star * r_star;
    // absorb rounding at the end point N r_*^2 = 1
    if rest.abs() <= T::lit(8.0) * T::epsilon() {
        rest = T::zero();
    }
    if rest < T::zero() {
        return Err(Error::Domain(format!(
            "N r_*^2 = {} exceeds 1",
            (T::one() - rest).as_f64()
        )));
    }
    Ok((rest / T::from_count(n - marked)).sqrt())
}

/// `r_*' = gamma (n - N) r sin(Theta)` with `r` from the probability constraint.
pub fn contracted_radial_rate<T: Real>(state: &Contracted<T>, params: &ModelParams<T>) -> Result<T> {
    let r = probability_constraint(state.r_star, params.n, params.marked)?;
    Ok(params.gamma * T::from_count(params.unmarked()) * r * state.theta_diff.sin())
}

/// The contracted two-equation system for `(r_*, Theta)`:
///
/// ```text
/// r_*'   = gamma (n - N) r sin Theta
/// Theta' = gamma ((n - N) r / r_* - N r_* / r) cos Theta - g - u r^(2 zeta) + u_* r_*^(2 zeta_*)
/// ```
///
/// with `gamma = g / (n - 2N)`.
pub fn rhs_contracted<T: Real>(
    state: &Contracted<T>,
    t: T,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
) -> Result<Contracted<T>> {
    let r = probability_constraint(state.r_star, params.n, params.marked)?;
    if state.r_star == T::zero() {
        return Err(Error::PolarSingularity { class: 0 });
    }
    if r == T::zero() {
        return Err(Error::PolarSingularity { class: 1 });
    }
    Ok(contracted_rates(state.r_star, r, state.theta_diff, t, scheme, params))
}

pub(crate) fn contracted_rates<T: Real>(
    r_star: T,
    r: T,
    theta_diff: T,
    t: T,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
) -> Contracted<T> {
    let gamma = params.gamma;
    let n_marked = T::from_count(params.marked);
    let n_unmarked = T::from_count(params.unmarked());
    let (sin, cos) = theta_diff.sin_cos();
    let coupling = if r == T::zero() {
        // the phase term is undefined here; Theta is pinned by the controls alone
        T::zero()
    } else {
        gamma * (n_unmarked * r / r_star - n_marked * r_star / r) * cos
    };
    Contracted {
        r_star: gamma * n_unmarked * r * sin,
        theta_diff: coupling - gamma * (T::from_count(params.n) - T::lit(2.0) * n_marked)
            - scheme.nonlinear_rate(1, t, r)
            + scheme.nonlinear_rate(0, t, r_star),
    }
}

/// Polar shell equations for a graph with one marked node. `state[i]` is the
/// amplitude of a shell-`i` node; the result holds `(r_i', theta_i')`.
pub fn rhs_shells<T: Real>(
    state: &[Polar<T>],
    t: T,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
    shells: &ShellDescriptor,
) -> Result<Vec<Polar<T>>> {
    let k = shells.shell_count();
    if state.len() != k || scheme.len() != k {
        return Err(Error::Config(format!(
            "{k} shells but state has {} and scheme {} entries",
            state.len(),
            scheme.len()
        )));
    }
    if let Some(i) = state.iter().position(|p| p.r == T::zero()) {
        return Err(Error::PolarSingularity { class: i });
    }
    let gamma = params.gamma;
    Ok((0..k)
        .map(|j| {
            let back = T::from_count(shells.backward(j));
            let fwd = T::from_count(shells.forward(j));
            let here = state[j];
            let mut dr = T::zero();
            let mut dtheta = (back + fwd) * gamma;
            if j > 0 {
                let prev = state[j - 1];
                let (s, c) = (prev.theta - here.theta).sin_cos();
                dr += gamma * back * prev.r * s;
                dtheta -= gamma * back * prev.r / here.r * c;
            }
            if j + 1 < k {
                let next = state[j + 1];
                let (s, c) = (next.theta - here.theta).sin_cos();
                dr += gamma * fwd * next.r * s;
                dtheta -= gamma * fwd * next.r / here.r * c;
            }
            dtheta -= scheme.nonlinear_rate(j, t, here.r);
            Polar::new(dr, dtheta)
        })
        .collect())
}
