//! Command-line front end. Every subcommand prints a manifest (command,
//! version, time, resolved parameters, seed) followed by its results as
//! `key=value` lines.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod config;
pub mod output;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VERIFY_FAILED: u8 = 2;
pub const EXIT_NO_VIOLATION: u8 = 3;

/// Environment variable fixing the worker-thread count for sweeps and
/// simulations.
pub const THREADS_ENV: &str = "EVENTREADY_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] eventready::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "eventready",
    version,
    about = "Event-ready Bell-pair toolkit",
    args_override_self = true
)]
pub struct Cli {
    /// key = value file supplying default flags (command-line flags win)
    #[arg(long, value_name = "FILE", global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form detection probabilities
    Probability(ProbabilityArgs),
    /// Minimal detection efficiency over polarizer angles
    Threshold(ThresholdArgs),
    /// Threshold surface over a (v, rho) grid, written as CSV
    Sweep(SweepArgs),
    /// Check the closed form against the Fock-space calculation
    Verify(VerifyArgs),
    /// Monte Carlo run of the four setting pairs
    Simulate(SimulateArgs),
    /// Search for settings meeting Hardy's conditions
    Hardy(HardyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Fourfold,
    Bellpair,
    Singles1,
    Singles2,
    Partial,
}

#[derive(Debug, Clone, Args)]
pub struct AngleArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta2: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta1p: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta2p: f64,
}

/// Interference parameters: either `--v` and `--phase` directly or a
/// detector geometry.
#[derive(Debug, Clone, Args)]
pub struct FringeArgs {
    /// Visibility (default 1 unless a geometry is given)
    #[arg(long, conflicts_with_all = ["opening", "fringe_spacing"])]
    pub v: Option<f64>,
    /// Interference phase in radians (default 0 unless a geometry is given)
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["z1", "z2"])]
    pub phase: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "fringe_spacing")]
    pub z1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "fringe_spacing")]
    pub z2: Option<f64>,
    /// Fringe spacing L
    #[arg(long = "fringe-spacing", visible_alias = "l")]
    pub fringe_spacing: Option<f64>,
    /// Detector opening width
    #[arg(long, visible_alias = "dz", requires = "fringe_spacing")]
    pub opening: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ProbabilityArgs {
    #[arg(long, value_enum, default_value = "fourfold")]
    pub kind: Kind,
    /// Beam-splitter reflectivity R
    #[arg(long)]
    pub r: f64,
    #[command(flatten)]
    pub angles: AngleArgs,
    #[command(flatten)]
    pub fringe: FringeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub v: f64,
    /// Splitter asymmetry R/(1 − R)
    #[arg(long)]
    pub rho: f64,
    /// Seed grid points per angle axis
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u32).range(1..))]
    pub grid: u32,
    /// Seeds refined by the simplex
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub seeds: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.6)]
    pub v_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v_max: f64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub v_steps: u32,
    #[arg(long, default_value_t = 0.1)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    pub rho_steps: u32,
    /// CSV destination; the manifest goes to `<out>.manifest`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Number of random configurations
    #[arg(long = "n-random", visible_alias = "n", default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_random: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    /// Scale the reflected amplitude by 1 + 1e-6 to exercise the checker
    #[arg(long, hide = true)]
    pub perturb_b: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub r: f64,
    #[command(flatten)]
    pub angles: AngleArgs,
    #[command(flatten)]
    pub fringe: FringeArgs,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Systems emitted per setting pair
    #[arg(long = "n", visible_alias = "n-trials", default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub preselector_efficiency: f64,
    /// Also write the record to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HardyArgs {
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value_t = eventready::inequalities::DEFAULT_HARDY_EPSILON)]
    pub epsilon: f64,
}

/// Outcome of a subcommand that ran to completion.
pub struct Report {
    pub record: output::Record,
    pub exit: u8,
}

/// Parse and run; returns the process exit code. Diagnostics go to `err`.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(report) => match report.record.write_to(out) {
            Ok(()) => report.exit,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

/// Size the global rayon pool from [`THREADS_ENV`] if it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!("{THREADS_ENV}={value} is not a positive integer"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}
