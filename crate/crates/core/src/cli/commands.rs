use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::{perturbed_error, CompleteProtocol, PerturbationSpec};
use crate::cli::config::{ControlMode, ScenarioConfig};
use crate::cli::csv::{num, CsvWriter};
use crate::control_opt::{optimize, BSplineControl, OptimizationProblem};
use crate::dynamics::{initial_state, Control, ControlScheme, ModelParams, ReducedDynamics, SystemState};
use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::integrate::{integrate, IntegratorConfig};

/// Output of one command: the artifact and a short summary for the terminal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub body: String,
    pub summary: String,
}

impl Report {
    fn from_csv(csv: CsvWriter) -> Self {
        let summary = csv.summary();
        Self {
            body: csv.finish(),
            summary,
        }
    }
}

fn integrator(cfg: &ScenarioConfig) -> IntegratorConfig<f64> {
    IntegratorConfig::with_tolerances(cfg.rel_tol, cfg.abs_tol)
}

fn is_complete(graph: &Graph) -> bool {
    let n = graph.node_count();
    graph.edge_count() == n * (n - 1) / 2
}

fn gamma_for(cfg: &ScenarioConfig, graph: &Graph) -> Result<f64> {
    match cfg.gamma {
        Some(gamma) => Ok(gamma),
        None => Ok(ModelParams::from_coupling(cfg.g, graph.node_count(), graph.marked_count())?.gamma),
    }
}

fn protocol_for(cfg: &ScenarioConfig, graph: &Graph) -> Result<CompleteProtocol<f64>> {
    if !is_complete(graph) {
        return Err(Error::Config("the analytic protocol needs a complete graph".into()));
    }
    Ok(CompleteProtocol::new(graph.node_count(), graph.marked_count(), cfg.g)?
        .with_zeta(cfg.zeta_marked, cfg.zeta_unmarked)
        .with_free_control(cfg.free_control))
}

fn grid(t_end: f64, samples: usize) -> impl Iterator<Item = f64> {
    (0..samples).map(move |i| {
        if i + 1 == samples {
            t_end
        } else {
            t_end * i as f64 / (samples - 1) as f64
        }
    })
}

/// Closed-form protocol on `K_n`: columns `time, r_star, r, probability,
/// u_star, u` over `[0, t_f]`.
pub fn cmd_analytic(cfg: &ScenarioConfig) -> Result<Report> {
    let graph = cfg.graph.build()?;
    let protocol = protocol_for(cfg, &graph)?;
    let tf = protocol.end_time();
    let mut csv = CsvWriter::new("analytic", cfg);
    csv.meta("t_f", num(tf));
    csv.meta("omega", num(protocol.omega()));
    csv.meta("gamma", num(protocol.gamma()));
    csv.columns(&["time", "r_star", "r", "probability", "u_star", "u"]);
    let m = protocol.marked as f64;
    for t in grid(tf, cfg.samples) {
        let r_star = protocol.r_star_unchecked(t);
        let (u, u_star) = protocol.control_unchecked(t);
        csv.row(&[t, r_star, protocol.r_unchecked(t), m * r_star * r_star, u_star, u]);
    }
    Ok(Report::from_csv(csv))
}

fn simulation_scheme(cfg: &ScenarioConfig, graph: &Graph, classes: usize) -> Result<(ControlScheme<f64>, f64)> {
    let zeta = if cfg.zeta.is_empty() {
        vec![0; classes]
    } else if cfg.zeta.len() == classes {
        cfg.zeta.clone()
    } else {
        return Err(Error::Config(format!("`zeta` has {} entries for {classes} classes", cfg.zeta.len())));
    };
    let need_t_end = || cfg.t_end.ok_or_else(|| Error::Config("`t_end` is required for this control mode".into()));
    match &cfg.control {
        ControlMode::Analytic => {
            let protocol = protocol_for(cfg, graph)?;
            let t_end = cfg.t_end.unwrap_or_else(|| protocol.end_time());
            Ok((protocol.scheme(), t_end))
        }
        ControlMode::Constant(values) => {
            let values = if values.is_empty() {
                vec![0.0; classes]
            } else if values.len() == classes {
                values.clone()
            } else {
                return Err(Error::Config(format!(
                    "`controls` has {} entries for {classes} classes",
                    values.len()
                )));
            };
            Ok((ControlScheme::constant(zeta, values), need_t_end()?))
        }
        ControlMode::Spline { points, .. } => {
            if points.len() != classes {
                return Err(Error::Config(format!(
                    "spline file has {} rows for {classes} classes",
                    points.len()
                )));
            }
            let t_end = need_t_end()?;
            let controls = points
                .iter()
                .map(|row| BSplineControl::new(row.clone(), t_end, cfg.bound).map(Control::Spline))
                .collect::<Result<Vec<_>>>()?;
            Ok((ControlScheme::new(zeta, controls)?, t_end))
        }
    }
}

/// Reduced-system trajectory with per-class radius and probability columns,
/// the total probability, and the controls.
pub fn cmd_simulate(cfg: &ScenarioConfig) -> Result<Report> {
    let graph = cfg.graph.build()?;
    let partition = graph.reduce();
    let classes = partition.len();
    let gamma = gamma_for(cfg, &graph)?;
    let (scheme, t_end) = simulation_scheme(cfg, &graph, classes)?;
    let dynamics = ReducedDynamics::on_partition(&graph, &partition, gamma);
    let y0 = initial_state::<f64>(&partition).to_real();
    let traj = integrate(
        |t, y, dy| dynamics.rhs_real(t, y, &scheme, dy),
        &y0,
        0.0,
        t_end,
        &integrator(cfg),
    )?;

    let mut csv = CsvWriter::new("simulate", cfg);
    csv.meta("classes", classes);
    csv.meta("multiplicities", join(&partition.multiplicities()));
    csv.meta("gamma", num(gamma));
    csv.meta("t_end", num(t_end));
    let drift = traj
        .states
        .iter()
        .map(|y| (dynamics.state_from_real(y, 0.0).total_probability() - 1.0).abs())
        .fold(0.0, f64::max);
    csv.meta("max_probability_drift", num(drift));
    let fin = dynamics.state_from_real(traj.final_state(), t_end);
    csv.meta("final_probabilities", joinf(&fin.class_probabilities()));

    let mut names = vec!["time".to_string()];
    for c in 0..classes {
        names.push(format!("r_{c}"));
        names.push(format!("p_{c}"));
    }
    names.push("total".into());
    names.extend((0..classes).map(|c| format!("u_{c}")));
    csv.columns(&names);
    for t in grid(t_end, cfg.samples) {
        let state = dynamics.state_from_real(&traj.interpolate(t), t);
        let mut row = vec![t];
        for (r, p) in state.radii().into_iter().zip(state.class_probabilities()) {
            row.push(r);
            row.push(p);
        }
        row.push(state.total_probability());
        row.extend(scheme.controls.iter().map(|u| u.value(t)));
        csv.row(&row);
    }
    Ok(Report::from_csv(csv))
}

/// `E(n) = 1 - r_*(t_f)^2` with `u = nu`, `u_* = g + nu_*`, one marked node
/// and linear nonlinearity exponents.
pub fn cmd_error_scan(cfg: &ScenarioConfig) -> Result<Report> {
    let cell = integrator(cfg);
    let perturbation = PerturbationSpec {
        nu_marked: cfg.nu_star,
        nu_unmarked: cfg.nu,
    };
    let rows: Vec<(usize, Result<f64>)> = cfg
        .n_values
        .par_iter()
        .map(|&n| {
            let e = CompleteProtocol::new(n, 1, cfg.g).and_then(|p| perturbed_error(&p, &perturbation, &cell));
            (n, e)
        })
        .collect();
    let mut csv = CsvWriter::new("error-scan", cfg);
    csv.meta("marked", 1);
    csv.meta("failed_rows", rows.iter().filter(|(_, e)| e.is_err()).count());
    csv.columns(&["n", "E", "flag"]);
    for (n, e) in rows {
        let (value, flag) = match e {
            Ok(v) => (num(v), "ok".to_string()),
            Err(err) => ("NaN".to_string(), format!("\"{}\"", err.to_string().replace('"', "'"))),
        };
        csv.raw_row(&[n.to_string(), value, flag]);
    }
    Ok(Report::from_csv(csv))
}

/// Runs the spline-control search and writes the result record plus the
/// best trajectory.
pub fn cmd_optimize(cfg: &ScenarioConfig) -> Result<Report> {
    let graph = cfg.graph.build()?;
    if graph.marked_count() != 1 {
        return Err(Error::Config("optimisation needs exactly one marked node".into()));
    }
    let shells = graph.shell_descriptor()?;
    let gamma = gamma_for(cfg, &graph)?;
    let mut problem = OptimizationProblem::new(shells.clone(), gamma);
    problem.spline_points = cfg.spline_points;
    problem.bound = cfg.bound;
    problem.zeta = cfg.zeta_search();
    problem.horizon = cfg.horizon;
    problem.objective = cfg.objective;
    problem.free_marked_phase = cfg.free_marked_phase;
    problem.search_integrator = IntegratorConfig::with_tolerances(cfg.rel_tol.max(1e-8), cfg.abs_tol.max(1e-10));
    problem.report_integrator = integrator(cfg);
    let result = optimize(&problem, cfg.budget, cfg.seed)?;

    let mut csv = CsvWriter::new("optimize", cfg);
    csv.meta("gamma", num(gamma));
    csv.meta("zeta", join(&result.zeta));
    csv.meta("parameters", joinf(&result.parameters));
    csv.meta("initial_phases", joinf(&result.decoded.phases));
    csv.meta("horizon", num(result.decoded.horizon));
    csv.meta("search_objective", num(result.search_objective));
    csv.meta("objective", num(result.evaluation.objective));
    csv.meta("terminal_probability", num(result.evaluation.terminal));
    csv.meta("first_peak_time", num(result.evaluation.first_peak.time));
    csv.meta("first_peak_value", num(result.evaluation.first_peak.value));
    csv.meta("first_peak_interior", result.evaluation.first_peak.interior);
    csv.meta("evaluations", result.evaluations);
    for (zeta, best) in &result.per_assignment {
        csv.meta(&format!("best_for_zeta[{}]", join(zeta)), num(*best));
    }
    match result.optimality_residual {
        Some(r) => csv.meta("optimality_residual", num(r)),
        None => csv.meta("optimality_residual", "unavailable"),
    }
    csv.meta("max_probability_drift", num(result.probability_drift(&shells)));

    let k = shells.shell_count();
    let mut names = vec!["time".to_string()];
    names.extend((0..k).map(|i| format!("p_{i}")));
    names.push("total".into());
    names.extend((0..k).map(|i| format!("u_{i}")));
    csv.columns(&names);
    for t in grid(result.decoded.horizon, cfg.samples) {
        let y = result.trajectory.interpolate(t);
        let state = SystemState::from_real(&y, shells.sizes().to_vec(), t);
        let mut row = vec![t];
        row.extend(state.class_probabilities());
        row.push(state.total_probability());
        row.extend(result.decoded.scheme.controls.iter().map(|u| u.value(t)));
        csv.row(&row);
    }
    Ok(Report::from_csv(csv))
}

/// Equivalence classes, quotient Laplacian and (when defined) the shell
/// descriptor, as plain text.
pub fn cmd_reduce(cfg: &ScenarioConfig) -> Result<Report> {
    let graph = cfg.graph.build()?;
    let partition = graph.reduce();
    let mut summary = String::new();
    let _ = writeln!(summary, "nodes = {}", graph.node_count());
    let _ = writeln!(summary, "edges = {}", graph.edge_count());
    let _ = writeln!(summary, "classes = {}", partition.len());
    for (c, members) in partition.classes().iter().enumerate() {
        let role = if partition.is_marked(c) { "marked" } else { "unmarked" };
        let _ = writeln!(summary, "class {c} ({role}, size {}): {}", members.len(), join(members));
    }
    summary.push_str("quotient laplacian:\n");
    for row in partition.quotient_laplacian(&graph) {
        let _ = writeln!(summary, "  {}", join(&row));
    }
    match graph.shell_descriptor() {
        Ok(s) => {
            let _ = writeln!(summary, "shell diameter = {}", s.diameter());
            let _ = writeln!(summary, "shell sizes = {}", join(s.sizes()));
            let _ = writeln!(summary, "shell forward counts = {}", join(s.forward_counts()));
        }
        Err(e) => {
            let _ = writeln!(summary, "shells: {e}");
        }
    }
    let mut body = String::from("# dnls reduce\n# [config]\n");
    for line in cfg.to_text().lines() {
        let _ = writeln!(body, "# {line}");
    }
    body.push_str(&summary);
    Ok(Report { body, summary })
}

fn join<V: ToString>(v: &[V]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn joinf(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}
