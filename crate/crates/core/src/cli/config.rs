//! Flat `key = value` scenario files.
//!
//! ```text
//! # search on K_10 with one marked node
//! graph = complete
//! n = 10
//! marked = 0
//! g = 1
//! control = analytic
//! ```
//!
//! Lists are comma separated. Unknown keys and malformed values are reported
//! with their line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cli::csv::num;
use crate::control_opt::{Horizon, Objective, ZetaSearch};
use crate::error::{Error, Result};
use crate::graphs::Graph;

/// Where the graph comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSpec {
    Generated { name: String, n: usize, marked: Vec<usize> },
    EdgeList { path: PathBuf, graph: Graph },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self {
            GraphSpec::Generated { name, n, marked } => Graph::generate(name, *n, marked.iter().copied()),
            GraphSpec::EdgeList { graph, .. } => Ok(graph.clone()),
        }
    }
}

/// How controls are specified for `simulate`.
#[derive(Clone, Debug, PartialEq)]
pub enum ControlMode {
    /// The closed-form complete-graph protocol.
    Analytic,
    /// One constant per class.
    Constant(Vec<f64>),
    /// Spline control points per class, read from `spline_file`.
    Spline { path: PathBuf, points: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaMode {
    MarkedUnmarked,
    PerShell,
}

/// A fully resolved scenario: every field has a value, defaults included.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub graph: GraphSpec,
    pub g: f64,
    /// Overrides `g / (n - 2N)` when set.
    pub gamma: Option<f64>,
    /// Per-class exponents for `simulate`; empty means all zero.
    pub zeta: Vec<i32>,
    pub zeta_marked: i32,
    pub zeta_unmarked: i32,
    pub free_control: f64,
    pub control: ControlMode,
    pub t_end: Option<f64>,
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub budget: usize,
    pub seed: u64,
    pub bound: f64,
    pub spline_points: usize,
    pub zeta_values: Vec<i32>,
    pub zeta_mode: ZetaMode,
    pub horizon: Horizon<f64>,
    pub objective: Objective,
    pub free_marked_phase: bool,
    pub nu: f64,
    pub nu_star: f64,
    pub n_values: Vec<usize>,
    pub out: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            graph: GraphSpec::Generated {
                name: "complete".into(),
                n: 3,
                marked: vec![0],
            },
            g: 1.0,
            gamma: None,
            zeta: Vec::new(),
            zeta_marked: 0,
            zeta_unmarked: 0,
            free_control: 0.0,
            control: ControlMode::Constant(Vec::new()),
            t_end: None,
            samples: 201,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            budget: 20_000,
            seed: 0,
            bound: 20.0,
            spline_points: 5,
            zeta_values: vec![1, 2],
            zeta_mode: ZetaMode::MarkedUnmarked,
            horizon: Horizon::Search { lower: 0.1, upper: 10.0 },
            objective: Objective::Terminal,
            free_marked_phase: false,
            nu: 0.5,
            nu_star: 0.5,
            n_values: vec![4, 8, 16, 32, 64, 100],
            out: None,
        }
    }
}

const KEYS: &[&str] = &[
    "graph",
    "n",
    "marked",
    "edge_list",
    "g",
    "gamma",
    "zeta",
    "zeta_marked",
    "zeta_unmarked",
    "free_control",
    "control",
    "controls",
    "spline_file",
    "t_end",
    "samples",
    "rel_tol",
    "abs_tol",
    "budget",
    "seed",
    "bound",
    "spline_points",
    "zeta_values",
    "zeta_mode",
    "horizon",
    "horizon_min",
    "horizon_max",
    "objective",
    "peak_deadline",
    "free_marked_phase",
    "nu",
    "nu_star",
    "n_values",
    "out",
];

/// Raw entries with the line each came from.
struct Entries {
    source: String,
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str, source: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: source.to_string(),
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if map.insert(key.to_string(), (value.trim().to_string(), line_no)).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            source: source.to_string(),
            map,
        })
    }

    fn err(&self, key: &str, message: String) -> Error {
        Error::Parse {
            path: self.source.clone(),
            line: self.map.get(key).map_or(0, |(_, l)| *l),
            message: format!("`{key}`: {message}"),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>>
    where
        V::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<V>().map_err(|e| self.err(key, format!("bad value `{v}`: {e}"))))
            .transpose()
    }

    fn list<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>>
    where
        V::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<V>().map_err(|e| self.err(key, format!("bad entry `{s}`: {e}"))))
                    .collect()
            })
            .transpose()
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Input file contents recovered from an artifact header.
#[derive(Debug, Default)]
pub(crate) struct EmbeddedInputs {
    pub edge_list: Option<String>,
    pub spline: Option<String>,
}

fn parse_spline_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    parse_spline_rows(&text, &path.display().to_string())
}

fn parse_spline_rows(text: &str, source: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    path: source.to_string(),
                    line: idx + 1,
                    message: format!("bad control point `{s}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn join<V: ToString>(v: &[V]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ScenarioConfig {
    /// Parses config text. Relative file paths resolve against `base`.
    pub fn parse(text: &str, source: &str, base: &Path) -> Result<Self> {
        Self::parse_with(text, source, base, &EmbeddedInputs::default())
    }

    /// Like [`ScenarioConfig::parse`], but referenced input files are taken
    /// from `embedded` when it carries them.
    pub(crate) fn parse_with(text: &str, source: &str, base: &Path, embedded: &EmbeddedInputs) -> Result<Self> {
        let e = Entries::parse(text, source)?;
        let mut c = Self::default();

        if let Some(path) = e.raw("edge_list") {
            if e.raw("graph").is_some() || e.raw("n").is_some() {
                return Err(e.err("edge_list", "give either `edge_list` or `graph`/`n`, not both".into()));
            }
            let path = resolve(base, path);
            let text = match &embedded.edge_list {
                Some(text) => text.clone(),
                None => std::fs::read_to_string(&path)
                    .map_err(|err| e.err("edge_list", format!("cannot read {}: {err}", path.display())))?,
            };
            let graph = Graph::parse_edge_list(&text, &path.display().to_string())?;
            c.graph = GraphSpec::EdgeList { path, graph };
        } else {
            let name = e.get::<String>("graph")?.unwrap_or_else(|| "complete".into());
            let n = e.get("n")?.unwrap_or(3);
            let marked = e.list("marked")?.unwrap_or_else(|| vec![0]);
            c.graph = GraphSpec::Generated { name, n, marked };
            c.graph.build().map_err(|err| e.err(if e.raw("graph").is_some() { "graph" } else { "n" }, err.to_string()))?;
        }

        c.g = e.get("g")?.unwrap_or(c.g);
        c.gamma = e.get("gamma")?;
        c.zeta = e.list("zeta")?.unwrap_or_default();
        c.zeta_marked = e.get("zeta_marked")?.unwrap_or(0);
        c.zeta_unmarked = e.get("zeta_unmarked")?.unwrap_or(0);
        c.free_control = e.get("free_control")?.unwrap_or(0.0);
        let controls: Vec<f64> = e.list("controls")?.unwrap_or_default();
        c.control = match e.raw("control").unwrap_or("constant") {
            "analytic" => ControlMode::Analytic,
            "constant" => ControlMode::Constant(controls),
            "spline" => {
                let raw = e
                    .raw("spline_file")
                    .ok_or_else(|| e.err("control", "`control = spline` needs `spline_file`".into()))?;
                let path = resolve(base, raw);
                let points = match &embedded.spline {
                    Some(text) => parse_spline_rows(text, &path.display().to_string())?,
                    None => {
                        if !path.is_file() {
                            return Err(e.err("spline_file", format!("{} does not exist", path.display())));
                        }
                        parse_spline_file(&path)?
                    }
                };
                ControlMode::Spline { path, points }
            }
            other => {
                return Err(e.err(
                    "control",
                    format!("unknown mode `{other}` (analytic, constant or spline)"),
                ))
            }
        };
        c.t_end = e.get("t_end")?;
        c.samples = e.get("samples")?.unwrap_or(c.samples);
        c.rel_tol = e.get("rel_tol")?.unwrap_or(c.rel_tol);
        c.abs_tol = e.get("abs_tol")?.unwrap_or(c.abs_tol);
        c.budget = e.get("budget")?.unwrap_or(c.budget);
        c.seed = e.get("seed")?.unwrap_or(c.seed);
        c.bound = e.get("bound")?.unwrap_or(c.bound);
        c.spline_points = e.get("spline_points")?.unwrap_or(c.spline_points);
        c.zeta_values = e.list("zeta_values")?.unwrap_or(c.zeta_values);
        c.zeta_mode = match e.raw("zeta_mode").unwrap_or("marked-unmarked") {
            "marked-unmarked" => ZetaMode::MarkedUnmarked,
            "per-shell" => ZetaMode::PerShell,
            other => {
                return Err(e.err(
                    "zeta_mode",
                    format!("unknown mode `{other}` (marked-unmarked or per-shell)"),
                ))
            }
        };
        c.horizon = match (e.get::<f64>("horizon")?, e.get::<f64>("horizon_min")?, e.get::<f64>("horizon_max")?) {
            (Some(t), None, None) => Horizon::Fixed(t),
            (None, lower, upper) => Horizon::Search {
                lower: lower.unwrap_or(0.1),
                upper: upper.unwrap_or(10.0),
            },
            _ => return Err(e.err("horizon", "give `horizon` or `horizon_min`/`horizon_max`, not both".into())),
        };
        c.objective = match e.raw("objective").unwrap_or("terminal") {
            "terminal" => Objective::Terminal,
            "first-peak" => Objective::FirstPeak,
            "terminal-early-peak" => Objective::TerminalAndEarlyPeak {
                deadline: e.get("peak_deadline")?.unwrap_or(2.0),
            },
            other => {
                return Err(e.err(
                    "objective",
                    format!("unknown objective `{other}` (terminal, first-peak or terminal-early-peak)"),
                ))
            }
        };
        c.free_marked_phase = e.get("free_marked_phase")?.unwrap_or(false);
        c.nu = e.get("nu")?.unwrap_or(c.nu);
        c.nu_star = e.get("nu_star")?.unwrap_or(c.nu_star);
        c.n_values = e.list("n_values")?.unwrap_or(c.n_values);
        c.out = e.raw("out").map(|p| resolve(base, p));

        c.check_ranges().map_err(|(key, msg)| e.err(key, msg))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|err| Error::Config(format!("cannot read config {}: {err}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    fn check_ranges(&self) -> std::result::Result<(), (&'static str, String)> {
        let positive = |key, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err((key, format!("must be positive, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("bound", self.bound)?;
        if !self.g.is_finite() || self.g == 0.0 {
            return Err(("g", format!("must be finite and nonzero, got {}", self.g)));
        }
        if let Some(t) = self.t_end {
            positive("t_end", t)?;
        }
        if self.samples < 2 {
            return Err(("samples", "need at least 2 samples".into()));
        }
        if self.spline_points < 4 {
            return Err(("spline_points", "cubic splines need at least 4 points".into()));
        }
        if self.zeta_values.is_empty() || self.zeta_values.iter().any(|&z| z < 0) {
            return Err(("zeta_values", "need a non-empty list of non-negative exponents".into()));
        }
        if self.zeta.iter().chain([&self.zeta_marked, &self.zeta_unmarked]).any(|&z| z < 0) {
            return Err(("zeta", "exponents must be non-negative".into()));
        }
        match self.horizon {
            Horizon::Fixed(t) => positive("horizon", t)?,
            Horizon::Search { lower, upper } => {
                if !(lower > 0.0 && upper > lower) {
                    return Err(("horizon_min", format!("bad interval [{lower}, {upper}]")));
                }
            }
        }
        if self.n_values.iter().any(|&n| n < 3) {
            return Err(("n_values", "every n must be at least 3".into()));
        }
        if let ControlMode::Spline { points, .. } = &self.control {
            if points.iter().flatten().any(|p| p.abs() > self.bound) {
                return Err(("spline_file", format!("control point exceeds bound {}", self.bound)));
            }
        }
        Ok(())
    }

    pub fn zeta_search(&self) -> ZetaSearch {
        match self.zeta_mode {
            ZetaMode::MarkedUnmarked => ZetaSearch::MarkedUnmarked(self.zeta_values.clone()),
            ZetaMode::PerShell => ZetaSearch::PerShell(self.zeta_values.clone()),
        }
    }

    /// The resolved configuration as `key = value` lines, in a fixed order.
    /// Parsing these lines reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.graph {
            GraphSpec::Generated { name, n, marked } => {
                put("graph", name.clone());
                put("n", n.to_string());
                put("marked", join(marked));
            }
            GraphSpec::EdgeList { path, .. } => put("edge_list", path.display().to_string()),
        }
        put("g", num(self.g));
        if let Some(gamma) = self.gamma {
            put("gamma", num(gamma));
        }
        if !self.zeta.is_empty() {
            put("zeta", join(&self.zeta));
        }
        put("zeta_marked", self.zeta_marked.to_string());
        put("zeta_unmarked", self.zeta_unmarked.to_string());
        put("free_control", num(self.free_control));
        match &self.control {
            ControlMode::Analytic => put("control", "analytic".into()),
            ControlMode::Constant(v) => {
                put("control", "constant".into());
                if !v.is_empty() {
                    put("controls", v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(","));
                }
            }
            ControlMode::Spline { path, .. } => {
                put("control", "spline".into());
                put("spline_file", path.display().to_string());
            }
        }
        if let Some(t) = self.t_end {
            put("t_end", num(t));
        }
        put("samples", self.samples.to_string());
        put("rel_tol", num(self.rel_tol));
        put("abs_tol", num(self.abs_tol));
        put("budget", self.budget.to_string());
        put("seed", self.seed.to_string());
        put("bound", num(self.bound));
        put("spline_points", self.spline_points.to_string());
        put("zeta_values", join(&self.zeta_values));
        put(
            "zeta_mode",
            match self.zeta_mode {
                ZetaMode::MarkedUnmarked => "marked-unmarked",
                ZetaMode::PerShell => "per-shell",
            }
            .into(),
        );
        match self.horizon {
            Horizon::Fixed(t) => put("horizon", num(t)),
            Horizon::Search { lower, upper } => {
                put("horizon_min", num(lower));
                put("horizon_max", num(upper));
            }
        }
        match self.objective {
            Objective::Terminal => put("objective", "terminal".into()),
            Objective::FirstPeak => put("objective", "first-peak".into()),
            Objective::TerminalAndEarlyPeak { deadline } => {
                put("objective", "terminal-early-peak".into());
                put("peak_deadline", num(deadline));
            }
        }
        put("free_marked_phase", self.free_marked_phase.to_string());
        put("nu", num(self.nu));
        put("nu_star", num(self.nu_star));
        put("n_values", join(&self.n_values));
        out
    }

    /// Extra lines that make an artifact independent of referenced files.
    pub fn embedded_inputs(&self) -> String {
        let mut out = String::new();
        if let GraphSpec::EdgeList { graph, .. } = &self.graph {
            out.push_str("edge list:\n");
            out.push_str(&graph.to_edge_list());
        }
        if let ControlMode::Spline { points, .. } = &self.control {
            out.push_str("spline control points:\n");
            for row in points {
                let _ = writeln!(out, "{}", join(row));
            }
        }
        out
    }
}
