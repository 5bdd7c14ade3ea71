//! CSV artifacts with a `#` header block carrying the full configuration.
//!
//! ```text
//! # dnls analytic
//! # [config]
//! # graph = complete
//! # ...
//! # [summary]
//! # t_f = 0.675...
//! time,r_star,...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::cli::config::{EmbeddedInputs, ScenarioConfig};
use crate::error::Result;

/// Shortest round-trip text for `v`, switching to exponent form for very
/// small or very large magnitudes.
pub(crate) fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub(crate) struct CsvWriter {
    text: String,
}

impl CsvWriter {
    pub fn new(command: &str, cfg: &ScenarioConfig) -> Self {
        let mut text = format!("# dnls {command}\n# [config]\n");
        for line in cfg.to_text().lines() {
            let _ = writeln!(text, "# {line}");
        }
        let embedded = cfg.embedded_inputs();
        if !embedded.is_empty() {
            text.push_str("# [inputs]\n");
            for line in embedded.lines() {
                let _ = writeln!(text, "# {line}");
            }
        }
        text.push_str("# [summary]\n");
        Self { text }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "# {key} = {value}");
    }

    pub fn columns<S: AsRef<str>>(&mut self, names: &[S]) {
        let names: Vec<&str> = names.iter().map(AsRef::as_ref).collect();
        let _ = writeln!(self.text, "{}", names.join(","));
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn raw_row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    /// Summary lines (everything written with [`CsvWriter::meta`]).
    pub fn summary(&self) -> String {
        self.text
            .lines()
            .skip_while(|l| *l != "# [summary]")
            .skip(1)
            .take_while(|l| l.starts_with('#'))
            .map(|l| format!("{}\n", l.trim_start_matches("# ")))
            .collect()
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Recovers the configuration embedded in an artifact's header block,
/// including any input files copied into its `[inputs]` section.
pub fn config_from_header(artifact: &str) -> Result<ScenarioConfig> {
    let section = |name: &str| -> String {
        artifact
            .lines()
            .take_while(|l| l.starts_with('#'))
            .skip_while(|l| *l != name)
            .skip(1)
            .take_while(|l| !l.starts_with("# ["))
            .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or("")))
            .collect()
    };
    let mut embedded = EmbeddedInputs::default();
    let mut current: Option<&mut Option<String>> = None;
    for line in section("# [inputs]").lines() {
        match line {
            "edge list:" => current = Some(&mut embedded.edge_list),
            "spline control points:" => current = Some(&mut embedded.spline),
            _ => {
                if let Some(slot) = current.as_deref_mut() {
                    let text = slot.get_or_insert_with(String::new);
                    text.push_str(line);
                    text.push('\n');
                }
            }
        }
    }
    ScenarioConfig::parse_with(&section("# [config]"), "<artifact header>", Path::new("."), &embedded)
}
