//! Pontryagin machinery for the shell equations: Hamiltonian, costate
//! equations and the optimality residual.
//!
//! With shell amplitudes `(r_j, theta_j)` and costates `(lambda_j, Lambda_j)`
//! the Hamiltonian is `H = sum_j lambda_j r_j' + Lambda_j theta_j'`, where the
//! rates are those of [`rhs_shells`]. Costates evolve by
//! `lambda_x' = -dH/dr_x` and `Lambda_x' = -dH/dtheta_x`. Since `H` depends on
//! the phases only through differences, `sum_x Lambda_x` is conserved.

use crate::dynamics::{rhs_shells, ControlScheme, ModelParams, Polar};
use crate::error::{Error, Result};
use crate::graphs::ShellDescriptor;
use crate::integrate::{integrate, IntegratorConfig, Trajectory};
use crate::scalar::{nonlinear_factor, Real};

/// Costates conjugate to the shell radii (`lambda`) and phases (`big_lambda`).
#[derive(Clone, Debug, PartialEq)]
pub struct Costates<T> {
    pub lambda: Vec<T>,
    pub big_lambda: Vec<T>,
}

impl<T: Real> Costates<T> {
    pub fn zeros(shells: usize) -> Self {
        Self {
            lambda: vec![T::zero(); shells],
            big_lambda: vec![T::zero(); shells],
        }
    }

    /// `sum_i Lambda_i`, zero along optimal trajectories.
    pub fn phase_sum(&self) -> T {
        self.big_lambda.iter().copied().sum()
    }
}

fn check_dims<T: Real>(state: &[Polar<T>], costates: &Costates<T>, shells: &ShellDescriptor) -> Result<()> {
    let k = shells.shell_count();
    if state.len() != k || costates.lambda.len() != k || costates.big_lambda.len() != k {
        return Err(Error::Config(format!(
            "{k} shells but state/costate lengths are {}/{}/{}",
            state.len(),
            costates.lambda.len(),
            costates.big_lambda.len()
        )));
    }
    Ok(())
}

/// The PMP Hamiltonian `sum_j lambda_j r_j' + Lambda_j theta_j'`.
pub fn pmp_hamiltonian<T: Real>(
    state: &[Polar<T>],
    costates: &Costates<T>,
    t: T,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
    shells: &ShellDescriptor,
) -> Result<T> {
    check_dims(state, costates, shells)?;
    let rates = rhs_shells(state, t, scheme, params, shells)?;
    Ok(rates
        .iter()
        .zip(costates.lambda.iter().zip(&costates.big_lambda))
        .map(|(d, (l, big))| *l * d.r + *big * d.theta)
        .sum())
}

/// `(lambda', Lambda') = -(dH/dr, dH/dtheta)`.
pub fn costate_rhs<T: Real>(
    state: &[Polar<T>],
    costates: &Costates<T>,
    t: T,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
    shells: &ShellDescriptor,
) -> Result<Costates<T>> {
    check_dims(state, costates, shells)?;
    if let Some(i) = state.iter().position(|p| p.r == T::zero()) {
        return Err(Error::PolarSingularity { class: i });
    }
    let k = shells.shell_count();
    let gamma = params.gamma;
    let (lam, big) = (&costates.lambda, &costates.big_lambda);
    let mut d_r = vec![T::zero(); k];
    let mut d_theta = vec![T::zero(); k];
    // Each ordered neighbour pair (j -> m) with weight w contributes
    //   gamma w [lambda_j r_m sin(th_m - th_j) - Lambda_j (r_m / r_j) cos(th_m - th_j)]
    for j in 0..k {
        let neighbours = [
            (j.checked_sub(1), shells.backward(j)),
            ((j + 1 < k).then_some(j + 1), shells.forward(j)),
        ];
        for (m, w) in neighbours {
            let Some(m) = m else { continue };
            let w = gamma * T::from_count(w);
            let (sj, sm) = (state[j], state[m]);
            let (s, c) = (sm.theta - sj.theta).sin_cos();
            d_r[m] += w * (lam[j] * s - big[j] * c / sj.r);
            d_r[j] += w * big[j] * sm.r * c / (sj.r * sj.r);
            let by_theta_m = w * (lam[j] * sm.r * c + big[j] * sm.r / sj.r * s);
            d_theta[m] += by_theta_m;
            d_theta[j] -= by_theta_m;
        }
    }
    for x in 0..k {
        let zeta = scheme.zeta[x];
        if zeta != 0 {
            let u = scheme.controls[x].value(t);
            let two_zeta = T::lit(2.0 * zeta as f64);
            d_r[x] -= big[x] * u * two_zeta * state[x].r.powi(2 * zeta - 1);
        }
    }
    Ok(Costates {
        lambda: d_r.into_iter().map(|v| -v).collect(),
        big_lambda: d_theta.into_iter().map(|v| -v).collect(),
    })
}

/// `sum_i Lambda_i r_i^(2 zeta_i)`; `-dH/du` when one control drives every shell.
pub fn optimality_residual<T: Real>(state: &[Polar<T>], costates: &Costates<T>, scheme: &ControlScheme<T>) -> T {
    state
        .iter()
        .zip(&costates.big_lambda)
        .zip(&scheme.zeta)
        .map(|((p, big), &z)| *big * nonlinear_factor(p.r, z))
        .sum()
}

/// `dH/du_j = -Lambda_j r_j^(2 zeta_j)` for independently controlled shells.
pub fn control_gradient<T: Real>(state: &[Polar<T>], costates: &Costates<T>, scheme: &ControlScheme<T>) -> Vec<T> {
    state
        .iter()
        .zip(&costates.big_lambda)
        .zip(&scheme.zeta)
        .map(|((p, big), &z)| -*big * nonlinear_factor(p.r, z))
        .collect()
}

/// Packs `[r_0, th_0, ..., lambda_0.., Lambda_0..]` for joint integration.
pub fn pack_joint<T: Real>(state: &[Polar<T>], costates: &Costates<T>) -> Vec<T> {
    let mut y: Vec<T> = state.iter().flat_map(|p| [p.r, p.theta]).collect();
    y.extend(&costates.lambda);
    y.extend(&costates.big_lambda);
    y
}

pub fn unpack_joint<T: Real>(y: &[T], shells: usize) -> (Vec<Polar<T>>, Costates<T>) {
    let state = y[..2 * shells]
        .chunks_exact(2)
        .map(|p| Polar::new(p[0], p[1]))
        .collect();
    let costates = Costates {
        lambda: y[2 * shells..3 * shells].to_vec(),
        big_lambda: y[3 * shells..4 * shells].to_vec(),
    };
    (state, costates)
}

/// Integrates polar states and costates together from `t0` to `t1`.
/// `t1 < t0` integrates backwards, as needed from terminal costate values.
#[allow(clippy::too_many_arguments)]
pub fn integrate_joint<T: Real>(
    state: &[Polar<T>],
    costates: &Costates<T>,
    t0: T,
    t1: T,
    scheme: &ControlScheme<T>,
    params: &ModelParams<T>,
    shells: &ShellDescriptor,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    check_dims(state, costates, shells)?;
    let k = shells.shell_count();
    let y0 = pack_joint(state, costates);
    let direction = if t1 >= t0 { T::one() } else { -T::one() };
    let mut failure = None;
    let traj = integrate(
        |s, y, dy| {
            let t = t0 + direction * s;
            let (st, co) = unpack_joint(y, k);
            let rates = rhs_shells(&st, t, scheme, params, shells);
            let adj = costate_rhs(&st, &co, t, scheme, params, shells);
            match (rates, adj) {
                (Ok(rates), Ok(adj)) => {
                    for (i, d) in rates.iter().enumerate() {
                        dy[2 * i] = direction * d.r;
                        dy[2 * i + 1] = direction * d.theta;
                    }
                    for i in 0..k {
                        dy[2 * k + i] = direction * adj.lambda[i];
                        dy[3 * k + i] = direction * adj.big_lambda[i];
                    }
                }
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    dy.iter_mut().for_each(|v| *v = T::nan());
                }
            }
        },
        &y0,
        T::zero(),
        (t1 - t0).abs(),
        cfg,
    );
    match (traj, failure) {
        (Ok(mut traj), _) => {
            for t in &mut traj.times {
                *t = t0 + direction * *t;
            }
            Ok(traj)
        }
        (Err(_), Some(e)) => Err(e),
        (Err(e), None) => Err(e),
    }
}

/// Terminal costates for maximising `r_0(t_f)^2` with free terminal phases:
/// `lambda_0 = 2 r_0`, other `lambda_i = 0`, all `Lambda_i = 0`.
pub fn terminal_costates<T: Real>(state: &[Polar<T>]) -> Costates<T> {
    let mut c = Costates::zeros(state.len());
    c.lambda[0] = T::lit(2.0) * state[0].r;
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Graph;

    fn setup() -> (ShellDescriptor, ModelParams<f64>, ControlScheme<f64>) {
        let shells = Graph::cycle(6, [0]).unwrap().shell_descriptor().unwrap();
        let params = ModelParams::with_gamma(0.8, 6, 1).unwrap();
        let scheme = ControlScheme::constant(vec![2, 1, 0, 1], vec![1.5, -0.7, 2.0, 0.3]);
        (shells, params, scheme)
    }

    fn state() -> Vec<Polar<f64>> {
        vec![
            Polar::new(0.6, -0.4),
            Polar::new(0.35, 0.2),
            Polar::new(0.3, 1.1),
            Polar::new(0.25, -2.0),
        ]
    }

    #[test]
    fn zero_costates() {
        let (shells, params, scheme) = setup();
        let z = Costates::zeros(4);
        assert_eq!(pmp_hamiltonian(&state(), &z, 0.0, &scheme, &params, &shells).unwrap(), 0.0);
        assert_eq!(costate_rhs(&state(), &z, 0.0, &scheme, &params, &shells).unwrap(), Costates::zeros(4));
        assert_eq!(optimality_residual(&state(), &z, &scheme), 0.0);
    }

    #[test]
    fn residual_with_linear_shells_is_phase_sum() {
        let c = Costates {
            lambda: vec![0.1, 0.2, 0.3, 0.4],
            big_lambda: vec![0.5, -0.25, 1.0, -0.75],
        };
        let scheme = ControlScheme::<f64>::uncontrolled(4);
        assert!((optimality_residual(&state(), &c, &scheme) - c.phase_sum()).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_control_derivative() {
        let (shells, params, _) = setup();
        let c = Costates {
            lambda: vec![0.3, -0.2, 0.7, 0.1],
            big_lambda: vec![0.5, -1.2, 0.4, 0.3],
        };
        let zeta = vec![2, 1, 0, 1];
        let u = [1.5, -0.7, 2.0, 0.3];
        let s = state();
        let scheme = ControlScheme::constant(zeta.clone(), u.to_vec());
        let grad = control_gradient(&s, &c, &scheme);
        for j in 0..4 {
            let h = 1e-6;
            let mut up = u;
            up[j] += h;
            let mut dn = u;
            dn[j] -= h;
            let hp = pmp_hamiltonian(&s, &c, 0.0, &ControlScheme::constant(zeta.clone(), up.to_vec()), &params, &shells).unwrap();
            let hm = pmp_hamiltonian(&s, &c, 0.0, &ControlScheme::constant(zeta.clone(), dn.to_vec()), &params, &shells).unwrap();
            assert!(((hp - hm) / (2.0 * h) - grad[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn phase_costate_sum_is_stationary() {
        let (shells, params, scheme) = setup();
        let c = Costates {
            lambda: vec![1.0, -2.0, 0.5, 0.25],
            big_lambda: vec![0.3, 0.1, -0.6, 0.7],
        };
        let d = costate_rhs(&state(), &c, 0.0, &scheme, &params, &shells).unwrap();
        assert!(d.phase_sum().abs() < 1e-14);
    }
}
