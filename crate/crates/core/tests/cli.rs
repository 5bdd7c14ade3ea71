use std::fs;
use std::path::Path;

use dnls::cli::{self, config_from_header, Command, ScenarioConfig};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dnls").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn parse(body: &str) -> Self {
        let mut lines = body.lines().filter(|l| !l.starts_with('#'));
        let columns = lines.next().unwrap().split(',').map(str::to_string).collect();
        let rows = lines
            .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
            .collect();
        Self { columns, rows }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let i = self.columns.iter().position(|c| c == name).unwrap();
        self.rows.iter().map(|r| r[i]).collect()
    }
}

fn meta(body: &str, key: &str) -> String {
    let prefix = format!("# {key} = ");
    body.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in header"))
        .to_string()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["analytic", "--tol", "-1"]).0, 1);
}

#[test]
fn missing_config_is_a_usage_error() {
    let (code, _, err) = run(&["analytic", "--config", "/nonexistent/scenario.cfg"]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot read config"));
}

#[test]
fn bad_key_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", "n = 10\n\nbogus = 3\n");
    let (code, _, err) = run(&["analytic", "--config", &cfg]);
    assert_eq!(code, 1);
    assert!(err.contains(":3"), "{err}");
}

#[test]
fn analytic_small_and_standard_cases() {
    let (code, body, _) = run(&["analytic"]);
    assert_eq!(code, 0);
    let tf: f64 = meta(&body, "t_f").parse().unwrap();
    assert!((tf - 0.675_510_858_856_04).abs() < 1e-12);
    let table = Table::parse(&body);
    let p = table.column("probability");
    assert!((p[0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((p.last().unwrap() - 1.0).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k10.cfg", "n = 10\nsamples = 11\n");
    let (code, body, _) = run(&["analytic", "--config", &cfg]);
    assert_eq!(code, 0);
    let tf: f64 = meta(&body, "t_f").parse().unwrap();
    assert!((tf - 3.330_79).abs() < 5e-6);
    assert_eq!(Table::parse(&body).rows.len(), 11);
}

#[test]
fn half_marked_complete_graph_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "half.cfg", "n = 4\nmarked = 0, 1\n");
    let (code, _, err) = run(&["analytic", "--config", &cfg]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn simulated_protocol_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.cfg",
        "n = 10\ncontrol = analytic\nzeta_marked = 1\nzeta_unmarked = 2\nfree_control = 0.5\nsamples = 21\n",
    );
    let (code, sim, err) = run(&["simulate", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    let drift: f64 = meta(&sim, "max_probability_drift").parse().unwrap();
    assert!(drift <= 1e-9);

    let (_, ana, _) = run(&["analytic", "--config", &cfg]);
    let sim = Table::parse(&sim);
    let ana = Table::parse(&ana);
    for (a, b) in sim.column("r_0").iter().zip(ana.column("r_star")) {
        assert!((a - b).abs() <= 1e-6);
    }
    for total in sim.column("total") {
        assert!((total - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn spline_controls_are_sampled_into_columns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("u.txt"), "0, 1, 2, 1, 0\n1, 1, 1, 1, 1\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "spline.cfg",
        "n = 5\ncontrol = spline\nspline_file = u.txt\nt_end = 1.5\nsamples = 7\n",
    );
    let (code, body, err) = run(&["simulate", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    let table = Table::parse(&body);
    let u0 = table.column("u_0");
    let u1 = table.column("u_1");
    assert_eq!(u0[0], 0.0);
    assert!(u0.last().unwrap().abs() < 1e-12);
    assert!(u0[3] > 1.0);
    assert!(u1.iter().all(|u| (u - 1.0).abs() < 1e-12));
}

#[test]
fn simulate_needs_end_time_for_constant_controls() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "graph = cycle\nn = 6\n");
    assert_eq!(run(&["simulate", "--config", &cfg]).0, 1);
}

#[test]
fn error_scan_without_offsets_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scan.cfg", "nu = 0\nnu_star = 0\nn_values = 4, 8, 16\n");
    let (code, body, err) = run(&["error-scan", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    let table = Table::parse(&body);
    assert_eq!(table.column("n"), vec![4.0, 8.0, 16.0]);
    assert!(table.column("E").iter().all(|e| e.abs() <= 1e-9));
}

#[test]
fn optimize_with_single_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "opt.cfg", "graph = cycle\nn = 6\nsamples = 5\n");
    let (code, body, err) = run(&["optimize", "--config", &cfg, "--budget", "1"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(meta(&body, "evaluations"), "1");
    let table = Table::parse(&body);
    assert_eq!(table.rows.len(), 5);
    assert!(table.columns.contains(&"u_3".to_string()));
}

#[test]
fn optimize_rejects_zero_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "opt.cfg", "graph = cycle\nn = 6\n");
    assert_eq!(run(&["optimize", "--config", &cfg, "--budget", "0"]).0, 1);
}

#[test]
fn out_flag_writes_artifact_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k3.csv");
    let (code, stdout, _) = run(&["analytic", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("t_f = "));
    let artifact = fs::read_to_string(&out).unwrap();
    assert!(artifact.starts_with("# dnls analytic\n"));
}

#[test]
fn artifact_header_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("u.txt"), "0.5, 1, 2, 1\n-1, 0, 1, 0\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "n = 7\ncontrol = spline\nspline_file = u.txt\nt_end = 2\nsamples = 9\nzeta = 1, 2\nrel_tol = 1e-9\n",
    );
    let first = cli::execute(Command::Simulate, &ScenarioConfig::load(Path::new(&cfg)).unwrap()).unwrap();
    // the spline points travel inside the artifact, so the input file may go away
    fs::remove_file(dir.path().join("u.txt")).unwrap();
    let recovered = config_from_header(&first.body).unwrap();
    let second = cli::execute(Command::Simulate, &recovered).unwrap();
    assert_eq!(first.body, second.body);
}

#[test]
fn reduce_prints_shells_of_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "graph = cycle\nn = 6\n");
    let (code, body, _) = run(&["reduce", "--config", &cfg]);
    assert_eq!(code, 0);
    assert!(body.contains("classes"), "{body}");
}

#[test]
fn artifact_header_carries_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("star.txt"), "5 1\n0 1\n0 2\n0 3\n0 4\nmarked: 1\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "edge_list = star.txt\ncontrols = 0, 1, 0.5\nzeta = 0, 1, 0\nt_end = 1\nsamples = 5\n",
    );
    let first = cli::execute(Command::Simulate, &ScenarioConfig::load(Path::new(&cfg)).unwrap()).unwrap();
    fs::remove_file(dir.path().join("star.txt")).unwrap();
    let second = cli::execute(Command::Simulate, &config_from_header(&first.body).unwrap()).unwrap();
    assert_eq!(first.body, second.body);
}
