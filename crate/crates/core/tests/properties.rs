use proptest::prelude::*;

use dnls::control_opt::{optimize, OptimizationProblem};
use dnls::dynamics::{initial_state, ControlScheme, ReducedDynamics};
use dnls::graphs::Graph;
use dnls::integrate::{integrate, IntegratorConfig};

fn graph_strategy() -> impl Strategy<Value = Graph> {
    prop_oneof![
        (3usize..9, 1usize..3).prop_map(|(n, m)| Graph::complete(n, 0..m.min(n - 1)).unwrap()),
        (4usize..10).prop_map(|n| Graph::cycle(n, [0]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn total_probability_is_conserved(
        graph in graph_strategy(),
        gamma in 0.2f64..2.0,
        seed_controls in prop::collection::vec(-4.0f64..4.0, 10),
        seed_zeta in prop::collection::vec(0i32..3, 10),
        t_end in 0.5f64..3.0,
    ) {
        let partition = graph.reduce();
        let k = partition.len();
        let scheme = ControlScheme::constant(seed_zeta[..k].to_vec(), seed_controls[..k].to_vec());
        let dynamics = ReducedDynamics::on_partition(&graph, &partition, gamma);
        let y0 = initial_state::<f64>(&partition).to_real();
        let traj = integrate(
            |t, y, dy| dynamics.rhs_real(t, y, &scheme, dy),
            &y0,
            0.0,
            t_end,
            &IntegratorConfig::default(),
        ).unwrap();
        for y in &traj.states {
            let total = dynamics.state_from_real(y, 0.0).total_probability();
            prop_assert!((total - 1.0).abs() <= 1e-9, "total {total}");
        }
    }

    #[test]
    fn reduced_and_singleton_dynamics_agree(
        graph in graph_strategy(),
        controls in prop::collection::vec(-3.0f64..3.0, 10),
        zeta in prop::collection::vec(0i32..3, 10),
    ) {
        let partition = graph.reduce();
        let k = partition.len();
        let scheme = ControlScheme::constant(zeta[..k].to_vec(), controls[..k].to_vec());
        let cfg = IntegratorConfig::with_tolerances(1e-12, 1e-14);
        let reduced = ReducedDynamics::on_partition(&graph, &partition, 0.7);
        let small = integrate(
            |t, y, dy| reduced.rhs_real(t, y, &scheme, dy),
            &initial_state::<f64>(&partition).to_real(),
            0.0,
            1.0,
            &cfg,
        ).unwrap();

        let full = ReducedDynamics::full(&graph, 0.7);
        let lifted = scheme.lift(&partition);
        let big = integrate(
            |t, y, dy| full.rhs_real(t, y, &lifted, dy),
            &initial_state::<f64>(&partition).lift(&partition).to_real(),
            0.0,
            1.0,
            &cfg,
        ).unwrap();

        let a = reduced.state_from_real(small.final_state(), 1.0).lift(&partition);
        let b = full.state_from_real(big.final_state(), 1.0);
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            prop_assert!((x - y).norm() <= 1e-8);
        }
    }
}

#[test]
fn larger_budget_never_scores_worse() {
    let shells = Graph::cycle(6, [0]).unwrap().shell_descriptor().unwrap();
    let problem = OptimizationProblem::new(shells, 1.0);
    let mut previous = f64::NEG_INFINITY;
    for budget in [40, 120, 400] {
        let result = optimize(&problem, budget, 3).unwrap();
        assert!(result.evaluations <= budget);
        assert!(result.search_objective >= previous);
        previous = result.search_objective;
    }
}
