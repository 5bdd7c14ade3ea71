//! Command-line driver: loads a scenario, runs one pipeline and writes a
//! self-describing CSV (or text, for `reduce`).
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure.

mod commands;
pub mod config;
mod csv;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{cmd_analytic, cmd_error_scan, cmd_optimize, cmd_reduce, cmd_simulate, Report};
pub use config::{ControlMode, GraphSpec, ScenarioConfig, ZetaMode};
pub use csv::config_from_header;

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "dnls", version, about = "Controlled quantum search under the discrete nonlinear Schrödinger equation")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file with `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Objective evaluations available to `optimize`.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Relative integrator tolerance; the absolute tolerance is 1% of it.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form complete-graph protocol sampled over [0, t_f].
    Analytic,
    /// Integrate the reduced dynamics of any graph.
    Simulate,
    /// Terminal error under constant control offsets, one row per n.
    ErrorScan,
    /// Spline-control search on a shell-structured graph.
    Optimize,
    /// Print equivalence classes and the shell descriptor.
    Reduce,
}

/// Exit status for an error.
pub fn exit_code(error: &Error) -> i32 {
    if error.is_numerical() {
        2
    } else {
        1
    }
}

/// Resolves the scenario from the config file and command-line overrides.
pub fn scenario(args: &Args) -> Result<ScenarioConfig> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(budget) = args.budget {
        cfg.budget = budget;
    }
    if let Some(tol) = args.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Config(format!("--tol must be positive, got {tol}")));
        }
        cfg.rel_tol = tol;
        cfg.abs_tol = tol * 1e-2;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

pub fn execute(command: Command, cfg: &ScenarioConfig) -> Result<Report> {
    match command {
        Command::Analytic => cmd_analytic(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::ErrorScan => cmd_error_scan(cfg),
        Command::Optimize => cmd_optimize(cfg),
        Command::Reduce => cmd_reduce(cfg),
    }
}

fn run_parsed(args: &Args, stdout: &mut dyn Write) -> Result<()> {
    let cfg = scenario(args)?;
    let report = execute(args.command, &cfg)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &report.body)?;
            stdout.write_all(report.summary.as_bytes())?;
        }
        None => stdout.write_all(report.body.as_bytes())?,
    }
    Ok(())
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_parsed(&args, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
