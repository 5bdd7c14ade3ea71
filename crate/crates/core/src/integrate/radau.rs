//! Three-stage Radau IIA (order 5) with adaptive steps and dense output.
//!
//! The stage equations `Z = h (A ⊗ I) F(y + Z)` are solved by simplified
//! Newton iteration on the full `3n x 3n` system with a forward-difference
//! Jacobian frozen per step. The local error estimate is the embedded
//! third-order one of Hairer & Wanner (RADAU5), filtered through
//! `(gamma0/h - J)^-1`.

use crate::error::{Error, Result};
use crate::integrate::linalg::Lu;
use crate::scalar::Real;

/// Tolerances and limits for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// First trial step; estimated from the initial slope when `None`.
    pub initial_step: Option<T>,
    pub max_step: Option<T>,
    pub max_steps: usize,
    /// Newton stopping threshold, in units of the error-weighted norm.
    pub newton_tol: T,
    pub newton_max_iters: usize,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn with_tolerances(rel_tol: T, abs_tol: T) -> Self {
        let newton_tol = (T::lit(10.0) * T::epsilon() / rel_tol).max(T::lit(0.03).min(rel_tol.sqrt()));
        Self {
            rel_tol,
            abs_tol,
            initial_step: None,
            max_step: None,
            max_steps: 200_000,
            newton_tol,
            newton_max_iters: 7,
        }
    }

    /// Looser settings for optimisation inner loops.
    pub fn fast() -> Self {
        Self::with_tolerances(T::lit(1e-8), T::lit(1e-10))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        if self.max_steps == 0 || self.newton_max_iters == 0 {
            return Err(Error::Config("max_steps and newton_max_iters must be positive".into()));
        }
        Ok(())
    }
}

impl<T: Real> Default for IntegratorConfig<T> {
    /// `rel_tol = 1e-10`, `abs_tol = 1e-12`.
    fn default() -> Self {
        Self::with_tolerances(T::lit(1e-10), T::lit(1e-12))
    }
}

/// Method coefficients.
#[derive(Clone, Copy, Debug)]
struct Tableau<T> {
    c: [T; 3],
    a: [[T; 3]; 3],
    /// Real eigenvalue of `A^-1`.
    gamma0: T,
    /// Error-estimate weights, applied as `(e . Z) / h`.
    e: [T; 3],
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let s6 = T::lit(6.0).sqrt();
        let l = T::lit;
        let c = [(l(4.0) - s6) / l(10.0), (l(4.0) + s6) / l(10.0), T::one()];
        let a = [
            [
                l(88.0) / l(360.0) - l(7.0) * s6 / l(360.0),
                l(296.0) / l(1800.0) - l(169.0) * s6 / l(1800.0),
                l(-2.0) / l(225.0) + l(3.0) * s6 / l(225.0),
            ],
            [
                l(296.0) / l(1800.0) + l(169.0) * s6 / l(1800.0),
                l(88.0) / l(360.0) + l(7.0) * s6 / l(360.0),
                l(-2.0) / l(225.0) - l(3.0) * s6 / l(225.0),
            ],
            [
                l(16.0) / l(36.0) - s6 / l(36.0),
                l(16.0) / l(36.0) + s6 / l(36.0),
                l(1.0) / l(9.0),
            ],
        ];
        let gamma0 = l(30.0) / (l(6.0) + l(81.0).cbrt() - l(9.0).cbrt());
        let e = [
            -(l(13.0) + l(7.0) * s6) / l(3.0),
            (l(-13.0) + l(7.0) * s6) / l(3.0),
            l(-1.0) / l(3.0),
        ];
        Self { c, a, gamma0, e }
    }
}

/// Collocation polynomial of one accepted step.
#[derive(Clone, Debug)]
pub struct DenseStep<T> {
    pub t0: T,
    pub h: T,
    y0: Vec<T>,
    z: [Vec<T>; 3],
    nodes: [T; 3],
}

impl<T: Real> DenseStep<T> {
    pub fn t1(&self) -> T {
        self.t0 + self.h
    }

    /// Evaluates the collocation polynomial through `(0, y0)` and the stages.
    pub fn eval_into(&self, t: T, out: &mut [T]) {
        let s = (t - self.t0) / self.h;
        let w = self.weights(s);
        for (m, o) in out.iter_mut().enumerate() {
            *o = self.y0[m] + w[0] * self.z[0][m] + w[1] * self.z[1][m] + w[2] * self.z[2][m];
        }
    }

    pub fn eval(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.y0.len()];
        self.eval_into(t, &mut out);
        out
    }

    /// Lagrange weights on nodes `{0, c1, c2, c3}`, dropping the node at 0.
    fn weights(&self, s: T) -> [T; 3] {
        let c = self.nodes;
        let mut w = [T::zero(); 3];
        for i in 0..3 {
            let mut num = s;
            let mut den = c[i];
            for j in 0..3 {
                if j != i {
                    num *= s - c[j];
                    den *= c[i] - c[j];
                }
            }
            w[i] = num / den;
        }
        w
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_failures: usize,
    pub rhs_evaluations: usize,
}

/// Accepted step endpoints plus the per-step collocation polynomials.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub dense: Vec<DenseStep<T>>,
    pub stats: IntegratorStats,
}

impl<T: Real> Trajectory<T> {
    pub fn t_start(&self) -> T {
        self.times[0]
    }

    pub fn t_end(&self) -> T {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().unwrap()
    }

    /// Dense-output value at `t`, clamped to the integrated interval.
    pub fn interpolate(&self, t: T) -> Vec<T> {
        if self.dense.is_empty() || t <= self.t_start() {
            return self.states[0].clone();
        }
        if t >= self.t_end() {
            return self.final_state().to_vec();
        }
        let k = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        self.dense[k.min(self.dense.len() - 1)].eval(t)
    }

    /// `count` equally spaced samples over the integrated interval.
    pub fn sample_uniform(&self, count: usize) -> Vec<(T, Vec<T>)> {
        let (a, b) = (self.t_start(), self.t_end());
        (0..count)
            .map(|i| {
                let t = if count == 1 {
                    b
                } else {
                    a + (b - a) * T::from_count(i) / T::from_count(count - 1)
                };
                (t, self.interpolate(t))
            })
            .collect()
    }
}

enum StepOutcome<T> {
    Accepted { err: T },
    Rejected { err: T },
    NewtonFailed,
}

struct Radau<T, F> {
    rhs: F,
    n: usize,
    cfg: IntegratorConfig<T>,
    tab: Tableau<T>,
    stats: IntegratorStats,
    eta: T,
    // per-attempt workspace
    z: [Vec<T>; 3],
    f: [Vec<T>; 3],
    tmp: Vec<T>,
}

impl<T: Real, F: FnMut(T, &[T], &mut [T])> Radau<T, F> {
    fn new(rhs: F, n: usize, cfg: IntegratorConfig<T>) -> Self {
        let zero = || vec![T::zero(); n];
        Self {
            rhs,
            n,
            cfg,
            tab: Tableau::new(),
            stats: IntegratorStats::default(),
            eta: T::one(),
            z: [zero(), zero(), zero()],
            f: [zero(), zero(), zero()],
            tmp: zero(),
        }
    }

    fn eval(&mut self, t: T, y: &[T], out: &mut [T]) {
        self.stats.rhs_evaluations += 1;
        (self.rhs)(t, y, out);
    }

    /// Forward differences with increment `sqrt(eps) * max(|y_j|, 1)`.
    fn jacobian(&mut self, t: T, y: &[T], f0: &[T]) -> Vec<T> {
        let n = self.n;
        let mut jac = vec![T::zero(); n * n];
        let mut yp = y.to_vec();
        let mut fp = vec![T::zero(); n];
        let root_eps = T::epsilon().sqrt();
        for j in 0..n {
            let delta = root_eps * y[j].abs().max(T::one());
            yp[j] = y[j] + delta;
            self.eval(t, &yp, &mut fp);
            let inv = T::one() / (yp[j] - y[j]);
            for i in 0..n {
                jac[i * n + j] = (fp[i] - f0[i]) * inv;
            }
            yp[j] = y[j];
        }
        jac
    }

    fn weights(&self, y: &[T], y1: Option<&[T]>) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mag = match y1 {
                    Some(y1) => y[i].abs().max(y1[i].abs()),
                    None => y[i].abs(),
                };
                self.cfg.abs_tol + self.cfg.rel_tol * mag
            })
            .collect()
    }

    /// Attempts one step of size `h` from `(t, y)`; on success `self.z`
    /// holds the stage increments.
    #[allow(clippy::too_many_arguments)]
    fn attempt(
        &mut self,
        t: T,
        y: &[T],
        h: T,
        f0: &[T],
        jac: &[T],
        guess: Option<&DenseStep<T>>,
        first_or_after_reject: bool,
        estimate_error: bool,
    ) -> Result<StepOutcome<T>> {
        let n = self.n;
        let tab = self.tab;
        let sc = self.weights(y, None);

        // (I - h A ⊗ J)
        let big = 3 * n;
        let mut m = vec![T::zero(); big * big];
        for bi in 0..3 {
            for bj in 0..3 {
                let ha = h * tab.a[bi][bj];
                for i in 0..n {
                    let row = (bi * n + i) * big + bj * n;
                    for j in 0..n {
                        m[row + j] = -ha * jac[i * n + j];
                    }
                }
            }
        }
        for d in 0..big {
            m[d * big + d] += T::one();
        }
        let lu = match Lu::factor(m, big) {
            Ok(lu) => lu,
            Err(_) => return Ok(StepOutcome::NewtonFailed),
        };

        for s in 0..3 {
            match guess {
                Some(prev) => {
                    prev.eval_into(t + tab.c[s] * h, &mut self.tmp);
                    for i in 0..n {
                        self.z[s][i] = self.tmp[i] - y[i];
                    }
                }
                None => self.z[s].iter_mut().for_each(|v| *v = T::zero()),
            }
        }

        let mut eta = self.eta.max(T::epsilon()).powf(T::lit(0.8));
        let mut prev_norm = T::zero();
        let mut converged = false;
        let mut delta = vec![T::zero(); big];
        let mut stage_y = vec![T::zero(); n];
        for iter in 0..self.cfg.newton_max_iters {
            for s in 0..3 {
                for i in 0..n {
                    stage_y[i] = y[i] + self.z[s][i];
                }
                let mut fs = std::mem::take(&mut self.f[s]);
                self.eval(t + tab.c[s] * h, &stage_y, &mut fs);
                self.f[s] = fs;
            }
            for s in 0..3 {
                for i in 0..n {
                    let hf = h
                        * (tab.a[s][0] * self.f[0][i]
                            + tab.a[s][1] * self.f[1][i]
                            + tab.a[s][2] * self.f[2][i]);
                    delta[s * n + i] = hf - self.z[s][i];
                }
            }
            if delta.iter().any(|v| !v.is_finite()) {
                return Ok(StepOutcome::NewtonFailed);
            }
            lu.solve_in_place(&mut delta);
            let norm = (delta
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    let q = *d / sc[k % n];
                    q * q
                })
                .sum::<T>()
                / T::from_count(big))
            .sqrt();
            if !norm.is_finite() {
                return Ok(StepOutcome::NewtonFailed);
            }
            if iter > 0 {
                let theta = norm / prev_norm;
                if theta >= T::lit(0.99) {
                    if norm <= T::one() {
                        // stalled at round-off level, below the tolerance scale
                        converged = true;
                        break;
                    }
                    return Ok(StepOutcome::NewtonFailed);
                }
                eta = theta / (T::one() - theta);
            }
            for s in 0..3 {
                for i in 0..n {
                    self.z[s][i] += delta[s * n + i];
                }
            }
            prev_norm = norm;
            if eta * norm <= self.cfg.newton_tol || norm == T::zero() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Ok(StepOutcome::NewtonFailed);
        }
        self.eta = eta;

        if !estimate_error {
            return Ok(StepOutcome::Accepted { err: T::zero() });
        }

        // err = (gamma0/h I - J)^-1 (f0 + (e . Z)/h)
        let mut e_mat = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                e_mat[i * n + j] = -jac[i * n + j];
            }
            e_mat[i * n + i] += tab.gamma0 / h;
        }
        let lu_e = match Lu::factor(e_mat, n) {
            Ok(lu) => lu,
            Err(_) => return Ok(StepOutcome::NewtonFailed),
        };
        let ez: Vec<T> = (0..n)
            .map(|i| (tab.e[0] * self.z[0][i] + tab.e[1] * self.z[1][i] + tab.e[2] * self.z[2][i]) / h)
            .collect();
        let mut err_vec: Vec<T> = (0..n).map(|i| f0[i] + ez[i]).collect();
        lu_e.solve_in_place(&mut err_vec);
        let y1: Vec<T> = (0..n).map(|i| y[i] + self.z[2][i]).collect();
        let sc1 = self.weights(y, Some(&y1));
        let norm = |v: &[T]| {
            (v.iter()
                .zip(&sc1)
                .map(|(e, s)| {
                    let q = *e / *s;
                    q * q
                })
                .sum::<T>()
                / T::from_count(n))
            .sqrt()
        };
        let mut err = norm(&err_vec);
        if err >= T::one() && first_or_after_reject {
            let ype: Vec<T> = (0..n).map(|i| y[i] + err_vec[i]).collect();
            let mut fpe = vec![T::zero(); n];
            self.eval(t, &ype, &mut fpe);
            let mut again: Vec<T> = (0..n).map(|i| fpe[i] + ez[i]).collect();
            lu_e.solve_in_place(&mut again);
            err = norm(&again);
        }
        if !err.is_finite() {
            return Ok(StepOutcome::NewtonFailed);
        }
        Ok(if err <= T::one() {
            StepOutcome::Accepted { err }
        } else {
            StepOutcome::Rejected { err }
        })
    }

    fn initial_step(&mut self, t0: T, span: T, y0: &[T], f0: &[T]) -> T {
        if let Some(h) = self.cfg.initial_step {
            return h.min(span);
        }
        let sc = self.weights(y0, None);
        let rms = |v: &[T]| {
            (v.iter().zip(&sc).map(|(x, s)| (*x / *s) * (*x / *s)).sum::<T>() / T::from_count(self.n)).sqrt()
        };
        let (d0, d1) = (rms(y0), rms(f0));
        let h = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        let _ = t0;
        h.min(span).min(self.cfg.max_step.unwrap_or(span))
    }

    fn step_factor(err: T) -> T {
        let fac = T::lit(0.9) * err.max(T::lit(1e-10)).powf(T::lit(-0.2));
        fac.max(T::lit(0.2)).min(T::lit(5.0))
    }

    fn dense(&self, t: T, h: T, y: &[T]) -> DenseStep<T> {
        DenseStep {
            t0: t,
            h,
            y0: y.to_vec(),
            z: self.z.clone(),
            nodes: self.tab.c,
        }
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` with adaptive steps.
pub fn integrate<T, F>(rhs: F, y0: &[T], t0: T, t1: T, cfg: &IntegratorConfig<T>) -> Result<Trajectory<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    cfg.validate()?;
    if !(t1 > t0) {
        return Err(Error::Config(format!("integration needs t1 > t0, got [{t0}, {t1}]")));
    }
    let n = y0.len();
    let mut solver = Radau::new(rhs, n, *cfg);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        dense: Vec::new(),
        stats: IntegratorStats::default(),
    };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f0 = vec![T::zero(); n];
    solver.eval(t, &y, &mut f0);
    let span = t1 - t0;
    let mut h = solver.initial_step(t0, span, &y, &f0);
    let h_min = T::lit(16.0) * T::epsilon() * t0.abs().max(t1.abs()).max(T::one());
    let mut jac = solver.jacobian(t, &y, &f0);
    let mut after_reject = true;
    let mut steps = 0usize;

    while t < t1 {
        if steps >= cfg.max_steps {
            return Err(Error::MaxSteps(cfg.max_steps));
        }
        steps += 1;
        if let Some(hmax) = cfg.max_step {
            h = h.min(hmax);
        }
        let remaining = t1 - t;
        let last = h * T::lit(1.01) >= remaining;
        if last {
            h = remaining;
        }
        let guess = traj.dense.last().cloned();
        let outcome = solver.attempt(t, &y, h, &f0, &jac, guess.as_ref(), after_reject, true)?;
        match outcome {
            StepOutcome::Accepted { err } => {
                let dense = solver.dense(t, h, &y);
                for i in 0..n {
                    y[i] += solver.z[2][i];
                }
                t = if last { t1 } else { t + h };
                traj.times.push(t);
                traj.states.push(y.clone());
                traj.dense.push(dense);
                solver.stats.accepted += 1;
                let mut fac = Radau::<T, F>::step_factor(err);
                if after_reject {
                    fac = fac.min(T::one());
                }
                after_reject = false;
                h *= fac;
                if t < t1 {
                    solver.eval(t, &y, &mut f0);
                    jac = solver.jacobian(t, &y, &f0);
                }
            }
            StepOutcome::Rejected { err } => {
                solver.stats.rejected += 1;
                after_reject = true;
                h *= Radau::<T, F>::step_factor(err).min(T::one());
            }
            StepOutcome::NewtonFailed => {
                solver.stats.newton_failures += 1;
                after_reject = true;
                h *= T::lit(0.5);
            }
        }
        if t < t1 && h < h_min {
            return Err(Error::StiffFailure { t: t.as_f64() });
        }
    }
    traj.stats = solver.stats;
    Ok(traj)
}

/// Integrates with `steps` equal steps and no error control. Used for
/// convergence-order measurements.
pub fn integrate_fixed<T, F>(
    rhs: F,
    y0: &[T],
    t0: T,
    t1: T,
    steps: usize,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]),
{
    cfg.validate()?;
    if !(t1 > t0) || steps == 0 {
        return Err(Error::Config("fixed-step integration needs t1 > t0 and steps > 0".into()));
    }
    let n = y0.len();
    let mut solver = Radau::new(rhs, n, *cfg);
    let h = (t1 - t0) / T::from_count(steps);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        dense: Vec::new(),
        stats: IntegratorStats::default(),
    };
    let mut y = y0.to_vec();
    let mut f0 = vec![T::zero(); n];
    for k in 0..steps {
        let t = t0 + h * T::from_count(k);
        solver.eval(t, &y, &mut f0);
        let jac = solver.jacobian(t, &y, &f0);
        let guess = traj.dense.last().cloned();
        match solver.attempt(t, &y, h, &f0, &jac, guess.as_ref(), false, false)? {
            StepOutcome::Accepted { .. } => {}
            _ => return Err(Error::StiffFailure { t: t.as_f64() }),
        }
        traj.dense.push(solver.dense(t, h, &y));
        for i in 0..n {
            y[i] += solver.z[2][i];
        }
        traj.times.push(if k + 1 == steps { t1 } else { t + h });
        traj.states.push(y.clone());
        solver.stats.accepted += 1;
    }
    traj.stats = solver.stats;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_rows_sum_to_nodes() {
        let tab = Tableau::<f64>::new();
        for i in 0..3 {
            let s: f64 = tab.a[i].iter().sum();
            assert!((s - tab.c[i]).abs() < 1e-15);
        }
        assert!((tab.gamma0 - 3.637_834_252_744_496).abs() < 1e-13);
    }

    #[test]
    fn exponential_decay() {
        let cfg = IntegratorConfig::<f64>::default();
        let traj = integrate(|_, y, dy| dy[0] = -y[0], &[1.0], 0.0, 1.0, &cfg).unwrap();
        let got = traj.final_state()[0];
        let want = (-1.0f64).exp();
        assert!(((got - want) / want).abs() < 1e-10, "{got} vs {want}");
        assert_eq!(traj.t_end(), 1.0);
    }

    #[test]
    fn works_in_single_precision() {
        let cfg = IntegratorConfig::<f32>::with_tolerances(1e-5, 1e-7);
        let traj = integrate(|_, y: &[f32], dy: &mut [f32]| dy[0] = -y[0], &[1.0], 0.0, 1.0, &cfg).unwrap();
        assert!((traj.final_state()[0] - (-1.0f32).exp()).abs() < 1e-4);
    }

    #[test]
    fn stiff_linear_system() {
        // y1' = -1000 (y1 - cos t) , y2' = -y2 ; a classic stiff pair
        let cfg = IntegratorConfig::<f64>::with_tolerances(1e-8, 1e-10);
        let traj = integrate(
            |t, y, dy| {
                dy[0] = -1000.0 * (y[0] - t.cos());
                dy[1] = -y[1];
            },
            &[0.0, 1.0],
            0.0,
            2.0,
            &cfg,
        )
        .unwrap();
        assert!(traj.stats.accepted < 2_000, "{:?}", traj.stats);
        assert!((traj.final_state()[1] - (-2.0f64).exp()).abs() < 1e-7);
        // quasi-stationary value cos t + sin t / 1000 (up to O(1e-6))
        assert!((traj.final_state()[0] - 2.0f64.cos()).abs() < 2e-3);
    }

    #[test]
    fn dense_output_matches_step_endpoints() {
        let cfg = IntegratorConfig::<f64>::with_tolerances(1e-6, 1e-8);
        let traj = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[0.0, 1.0],
            0.0,
            6.0,
            &cfg,
        )
        .unwrap();
        for (k, step) in traj.dense.iter().enumerate() {
            assert_eq!(step.eval(step.t0), traj.states[k]);
            for (a, b) in step.eval(step.t1()).iter().zip(&traj.states[k + 1]) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        for (t, y) in traj.sample_uniform(50) {
            assert!((y[0] - t.sin()).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        let mut cfg = IntegratorConfig::<f64>::default();
        assert!(integrate(|_, _, _| {}, &[1.0], 1.0, 1.0, &cfg).is_err());
        cfg.rel_tol = 0.0;
        assert!(integrate(|_, _, _| {}, &[1.0], 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn max_steps_is_enforced() {
        let mut cfg = IntegratorConfig::<f64>::default();
        cfg.max_steps = 3;
        cfg.initial_step = Some(1e-3);
        let res = integrate(|_, y, dy| dy[0] = -y[0], &[1.0], 0.0, 10.0, &cfg);
        assert!(matches!(res, Err(Error::MaxSteps(3))));
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 blows up at t = 1
        let res = integrate(|_, y, dy| dy[0] = y[0] * y[0], &[1.0], 0.0, 2.0, &IntegratorConfig::default());
        assert!(res.is_err());
    }
}
