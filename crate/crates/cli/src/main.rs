//! normpx: solve the regularized variable-exponent equation on the unit
//! ball, sweep the regularization down, and measure smoothness of the
//! results. Exit codes: 0 success, 2 bad usage or config, 3 solver failure,
//! 4 missing input artifact, 1 failed verification.
//!
//! NORMPX_THREADS controls factorization parallelism; unset or 1 keeps
//! runs bitwise reproducible.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "normpx", version, about = "Variable-exponent equation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one Dirichlet problem and dump the solution field.
    Solve(RunArgs),
    /// Re-solve along a decreasing regularization schedule.
    SweepEps(RunArgs),
    /// Run the smoothness measurement battery on a solution.
    Report(RunArgs),
    /// Run the seeded closed-form check battery (no linear systems).
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for CSVs and the manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Recorded in the manifest; seeds any sampled checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the configured points per axis.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Suppress the one-line summary on stdout.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Directory for verdicts.csv and the manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the sampled checks; same seed, same verdicts file.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Suppress the one-line summary on stdout.
    #[arg(long)]
    pub quiet: bool,
    /// Invert the expectation on one known-true inequality, forcing a
    /// reported failure. Exists so tests can prove failures surface.
    #[arg(long, hide = true)]
    pub negate_canary: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Unusable configuration or malformed inputs.
    Config(String),
    /// The nonlinear solve did not produce a solution.
    Solver(normpx_core::Error),
    /// A referenced input file does not exist.
    MissingArtifact(PathBuf),
    /// Verification ran and found failing cases.
    VerifyFailed(u64),
}

impl CliError {
    pub fn config(msg: String) -> CliError {
        CliError::Config(msg)
    }

    pub fn config_from(e: normpx_core::Error) -> CliError {
        CliError::Config(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::MissingArtifact(_) => 4,
            CliError::VerifyFailed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Solver(e) => write!(f, "solver failed: {e}"),
            CliError::MissingArtifact(p) => {
                write!(f, "missing input artifact: {}", p.display())
            }
            CliError::VerifyFailed(n) => write!(f, "verification found {n} failing cases"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => commands::cmd_solve(args),
        Command::SweepEps(args) => commands::cmd_sweep(args),
        Command::Report(args) => commands::cmd_report(args),
        Command::Verify(args) => commands::cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
