mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

/// Shift planning experiments: plans, sweeps, baseline comparisons and rosters.
#[derive(Parser, Debug)]
#[command(name = "shiftplan", version, about)]
pub struct Cli {
    /// JSON experiment config
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory (defaults to the config's `output`, then the working directory)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed recorded in the run summary; every command is deterministic
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Relative optimality gap at which branch-and-bound stops
    #[arg(long, global = true, value_name = "REL_GAP")]
    pub gap: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Solve one scenario: plan.csv, supply.csv, summary.json
    Plan,
    /// Solve every sweep point: sweep.csv, sweep_supply.csv
    Sweep,
    /// Compare against service and economic standards: compare.csv, compare_robustness.csv
    Compare,
    /// Assign a plan to drivers: roster.csv
    Roster,
    /// Write the planning model in CPLEX LP format: model.lp
    ExportLp,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("solver: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Verification(_) => 5,
            CliError::Solver(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
