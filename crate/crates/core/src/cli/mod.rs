//! Command-line driver: loads a system, runs one operation and writes reports.
//!
//! Every run writes `summary.json` (deterministic for a fixed seed), `run.json`
//! (wall-clock data) and one CSV file per table, depending on `--format`.
//! Exit status: 0 when every assertion holds, 1 when one fails or the
//! operation errors, 2 for unreadable arguments or system files.

mod certify;
mod commands;
mod report;

pub use report::{Assertion, Report, Table};

use crate::error::{Error, Result};
use crate::fields::{parse_system, VectorFieldSystem};
use crate::registry;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    D,
    D1,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Flood,
    Rejection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    Exp,
    Quasi,
    E,
}

#[derive(Debug, Parser)]
#[command(name = "hormander", version, about = "Geometry of nonsmooth Hormander vector fields")]
pub struct Cli {
    /// System definition file, or the name of a built-in system.
    #[arg(long, global = true, default_value = "heisenberg")]
    pub system: String,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Sample budget for Monte Carlo estimates.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Worker threads (0: one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Local error tolerance of the flow integrator.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Hormander rank on a grid of the inner domain and smoothness audit.
    Check {
        #[arg(long, default_value_t = 5)]
        grid: usize,
    },
    /// Table of all canonical commutators at a point.
    Bracket {
        #[arg(long)]
        point: Option<String>,
    },
    /// Residuals of the commutator expansion over t = 2^-k.
    Expand {
        #[arg(long)]
        index: Option<String>,
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 3)]
        kmin: i32,
        #[arg(long, default_value_t = 10)]
        kmax: i32,
    },
    /// Exponential, quasiexponential or E map with trajectory export.
    Flow {
        #[arg(long, default_value = "(1)")]
        index: String,
        #[arg(long, default_value_t = 0.1)]
        time: f64,
        #[arg(long)]
        point: Option<String>,
        #[arg(long, value_enum, default_value_t = MapArg::E)]
        map: MapArg,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Distance estimates between two points.
    Dist {
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Connecting paths and their subunit form.
    Connect {
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        /// Random pairs in the inner domain when no points are given.
        #[arg(long, default_value_t = 10)]
        pairs: usize,
    },
    /// Ball volumes, doubling, volume formula and ball inclusion sweeps.
    Ball {
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value_t = FlavorArg::D1)]
        flavor: FlavorArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Flood)]
        method: MethodArg,
        #[command(flatten)]
        graph: GraphArgs,
        /// Also compare with the osculating polynomial system.
        #[arg(long)]
        inclusion: bool,
    },
    /// Poincare inequality sweep (p-version with --p).
    Poincare {
        #[arg(long, default_value = "u")]
        function: String,
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        graph: GraphArgs,
        /// Repeat with twice the budget and compare.
        #[arg(long)]
        stability: bool,
        /// Split the right side with the osculating system.
        #[arg(long)]
        rough: bool,
    },
    /// Empirical Sobolev exponent with concentrating bumps.
    Sobolev {
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 6)]
        levels: u32,
    },
    /// Gradient bound along connecting paths.
    Lagrange {
        #[arg(long, default_value = "u")]
        function: String,
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 0.1)]
        scale: f64,
    },
    /// Quick certification suite for the system.
    Certify,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Graph moves across one radius.
    #[arg(long, default_value_t = 8)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Radii 2^-k for k = kmin..=kmax.
    #[arg(long, default_value_t = 4)]
    pub kmin: i32,
    #[arg(long, default_value_t = 6)]
    pub kmax: i32,
}

impl SweepArgs {
    pub fn radii(&self) -> Vec<f64> {
        (self.kmin..=self.kmax).map(|k| 0.5f64.powi(k)).collect()
    }
}

/// Everything a run depends on.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: String,
    pub command: Command,
    pub seed: u64,
    pub budget: Option<usize>,
    pub out: PathBuf,
    pub format: Format,
    pub workers: usize,
    pub tol: f64,
}

impl From<Cli> for RunConfig {
    fn from(c: Cli) -> RunConfig {
        RunConfig {
            system: c.system,
            command: c.command,
            seed: c.seed,
            budget: c.budget,
            out: c.out,
            format: c.format,
            workers: c.workers,
            tol: c.tol,
        }
    }
}

/// Reads a system file, or falls back to the built-in registry.
pub fn load_system(spec: &str) -> Result<VectorFieldSystem> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return parse_system(&text);
    }
    if registry::NAMES.contains(&spec) {
        return registry::get(spec);
    }
    Err(Error::System(format!(
        "{} is neither a readable file nor a built-in system ({})",
        spec,
        registry::NAMES.join(", ")
    )))
}

/// Outcome of a run.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

/// Loads the system, runs the command in a worker pool and writes the reports.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let sys = load_system(&config.system)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Invalid(format!("worker pool: {}", e)))?;
    let started = std::time::SystemTime::now();
    let report = pool.install(|| commands::dispatch(&sys, config))?;
    let elapsed = started.elapsed().map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let files = report.write(&sys.name, config, started, elapsed)?;
    let passed = report.passed();
    Ok(Outcome {
        report,
        passed,
        files,
    })
}

/// Parses arguments, runs and returns the process exit code.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = RunConfig::from(cli);
    match run(&config) {
        Ok(out) => {
            for a in out.report.assertions.iter().filter(|a| !a.passed) {
                eprintln!("FAIL {}: {}", a.name, a.detail);
            }
            println!(
                "{} on {}: {} ({} assertions, {} files)",
                out.report.operation,
                config.system,
                if out.passed { "pass" } else { "fail" },
                out.report.assertions.len(),
                out.files.len()
            );
            if out.passed {
                0
            } else {
                1
            }
        }
        Err(e @ (Error::Parse { .. } | Error::System(_))) => {
            eprintln!("error: {}", e);
            2
        }
        Err(e) => {
            eprintln!("error: {}", e);
            1
        }
    }
}
