//! Direct optimal control on symmetric graphs.
//!
//! Controls are clamped cubic B-splines, one per shell. An outer exhaustive
//! search runs over nonlinearity exponents and an inner differential
//! evolution over spline points, free initial phases and the horizon. The
//! Pontryagin machinery in [`pmp`] serves as a diagnostic for the result.

mod bspline;
mod de;
pub mod pmp;
mod problem;

pub use bspline::{clamped_uniform_knots, BSplineControl};
pub use de::{differential_evolution, DeOutcome, DeSettings};
pub use pmp::{
    control_gradient, costate_rhs, integrate_joint, optimality_residual, pmp_hamiltonian, terminal_costates, Costates,
};
pub use problem::{Decoded, Evaluation, Horizon, Objective, OptimizationProblem, ZetaSearch};

use crate::dynamics::{ModelParams, Polar, SystemState};
use crate::error::Result;
use crate::integrate::Trajectory;
use crate::scalar::Real;

/// Best candidate found by [`optimize`].
#[derive(Clone, Debug)]
pub struct OptimizationResult<T> {
    pub zeta: Vec<i32>,
    pub parameters: Vec<T>,
    pub decoded: Decoded<T>,
    /// Objective value seen by the search (search tolerances).
    pub search_objective: T,
    /// Re-evaluation at report tolerances.
    pub evaluation: Evaluation<T>,
    pub trajectory: Trajectory<T>,
    pub evaluations: usize,
    /// Best search objective for every exponent assignment tried.
    pub per_assignment: Vec<(Vec<i32>, T)>,
    /// `max_t |sum_i Lambda_i r_i^(2 zeta_i)|` along a backward costate sweep
    /// from free-endpoint transversality conditions, when it could be formed.
    pub optimality_residual: Option<T>,
}

impl<T: Real> OptimizationResult<T> {
    /// Largest deviation of the total probability from one along the
    /// reported trajectory.
    pub fn probability_drift(&self, shells: &crate::graphs::ShellDescriptor) -> T {
        self.trajectory
            .states
            .iter()
            .map(|y| {
                let s = SystemState::from_real(y, shells.sizes().to_vec(), T::zero());
                (s.total_probability() - T::one()).abs()
            })
            .fold(T::zero(), |m, v| m.max(v))
    }
}

/// Splits `budget` over `parts` as evenly as possible, earlier parts first.
fn split_budget(budget: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|i| budget / parts + usize::from(i < budget % parts)).collect()
}

/// Runs the outer exponent search and inner differential evolution.
///
/// Deterministic for a given `(problem, budget, seed)`, and the best search
/// objective never decreases when `budget` grows.
pub fn optimize<T: Real>(problem: &OptimizationProblem<T>, budget: usize, seed: u64) -> Result<OptimizationResult<T>> {
    optimize_with(problem, budget, seed, &DeSettings::default())
}

pub fn optimize_with<T: Real>(
    problem: &OptimizationProblem<T>,
    budget: usize,
    seed: u64,
    settings: &DeSettings,
) -> Result<OptimizationResult<T>> {
    problem.validate()?;
    if budget == 0 {
        return Err(crate::error::Error::Config("optimisation budget must be positive".into()));
    }
    let assignments = problem.zeta.assignments(problem.shells.shell_count());
    let (lower, upper) = problem.bounds();
    let mut per_assignment = Vec::new();
    let mut best: Option<(Vec<i32>, DeOutcome<T>)> = None;
    let mut evaluations = 0;
    for (stream, (zeta, share)) in assignments.iter().zip(split_budget(budget, assignments.len())).enumerate() {
        if share == 0 {
            continue;
        }
        let outcome = differential_evolution(
            |x| problem.evaluate_candidate(zeta, x).objective,
            &lower,
            &upper,
            share,
            seed,
            stream as u64,
            settings,
        );
        evaluations += outcome.evaluations;
        per_assignment.push((zeta.clone(), outcome.value));
        if best.as_ref().is_none_or(|(_, b)| outcome.value > b.value) {
            best = Some((zeta.clone(), outcome));
        }
    }
    let (zeta, outcome) = best.expect("budget > 0 yields at least one run");
    let decoded = problem.decode(&zeta, &outcome.best)?;
    let trajectory = problem.simulate(&decoded, &problem.report_integrator)?;
    let (evaluation, _) = problem.evaluate_with(&zeta, &outcome.best, &problem.report_integrator);
    let optimality_residual = residual_diagnostic(problem, &decoded, &trajectory);
    Ok(OptimizationResult {
        zeta,
        parameters: outcome.best,
        decoded,
        search_objective: outcome.value,
        evaluation,
        trajectory,
        evaluations,
        per_assignment,
        optimality_residual,
    })
}

fn residual_diagnostic<T: Real>(
    problem: &OptimizationProblem<T>,
    decoded: &Decoded<T>,
    trajectory: &Trajectory<T>,
) -> Option<T> {
    let k = problem.shells.shell_count();
    let end: Vec<Polar<T>> = SystemState::from_real(trajectory.final_state(), problem.shells.sizes().to_vec(), T::zero())
        .polar();
    let params = ModelParams::with_gamma(problem.gamma, problem.shells.node_count(), 1).ok()?;
    let costates = terminal_costates(&end);
    let sweep = integrate_joint(
        &end,
        &costates,
        decoded.horizon,
        T::zero(),
        &decoded.scheme,
        &params,
        &problem.shells,
        &problem.search_integrator,
    )
    .ok()?;
    sweep
        .states
        .iter()
        .map(|y| {
            let (state, co) = pmp::unpack_joint(y, k);
            optimality_residual(&state, &co, &decoded.scheme).abs()
        })
        .try_fold(T::zero(), |m, v| v.is_finite().then(|| m.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_split() {
        assert_eq!(split_budget(5, 4), vec![2, 1, 1, 1]);
        assert_eq!(split_budget(6, 4), vec![2, 2, 1, 1]);
        assert_eq!(split_budget(1, 4), vec![1, 0, 0, 0]);
    }
}
