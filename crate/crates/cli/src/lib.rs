// SPDX-License-Identifier: MIT OR Apache-2.0

//! Library side of the `msbz` command-line tool.
//!
//! Exit codes: 0 success, 2 argument or input error, 3 resource cap,
//! 4 failed convergence verdict, 5 oracle disagreement.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod document;
pub mod io;

use io::SignalKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Argument(String),
    #[error("{0}")]
    Resource(String),
    #[error("convergence verdict failed")]
    Verdict,
    #[error("oracle disagreement: {0}")]
    Disagreement(String),
}

impl From<msbz_core::Error> for CliError {
    fn from(e: msbz_core::Error) -> Self {
        match e {
            msbz_core::Error::Resource(_) => CliError::Resource(e.to_string()),
            other => CliError::Argument(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Argument(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Verdict => 4,
            CliError::Disagreement(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "msbz", version, about = "Exact Blake-Zisserman / Potts segmentation and Mumford-Shah diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Pick from the input kind and parameters.
    Auto,
    Bz,
    Potts,
    Ms,
}

/// Parameters shared by `segment` and `solve-partition`.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Samples (CSV, one per line) or piecewise signal (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; defaults to piecewise for `.json`, samples otherwise.
    #[arg(long, value_enum)]
    pub kind: Option<SignalKind>,
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    /// Grid size; samples are coarsened to it, piecewise signals averaged onto it.
    #[arg(long, conflicts_with = "t")]
    pub n: Option<usize>,
    /// Resolution: 0 for the continuum, 1/n for the n-grid.
    #[arg(long)]
    pub t: Option<f64>,
    /// Cosine modes per interval for continuous problems.
    #[arg(long, default_value_t = 64)]
    pub modes: usize,
    /// Result document; printed to stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = Model::Auto)]
    pub model: Model,
    /// Candidate grid for continuous minimization.
    #[arg(long, default_value_t = 256)]
    pub nref: usize,
    /// Size cap on n (or n_ref) replacing the default.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolvePartitionArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated partition points, e.g. `0,0.5,1`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub partition: Vec<f64>,
    /// Jump charge used for the reported objective.
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep declaration (JSON).
    #[arg(long, required_unless_present = "bundled", conflicts_with = "bundled")]
    pub input: Option<PathBuf>,
    /// Run the three reference trajectories.
    #[arg(long)]
    pub bundled: bool,
    #[arg(long, default_value_t = 256)]
    pub nref: usize,
    #[arg(long, default_value_t = 64)]
    pub modes: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Single instance (samples); random instances when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    /// Samples per random instance.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed jump charge; cycles through 0, 0.01, 0.1, 1, 10 when absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Fixed smoothing parameter; cycles through 0, 0.5, 1, 5 when absent.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Result document written by `segment`, `solve-partition` or `sweep`.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving the plot data.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Globally minimize the selected functional.
    Segment(SegmentArgs),
    /// Run a parameter trajectory or a solver refinement study.
    Sweep(SweepArgs),
    /// Cross-check dynamic programming against exhaustive search.
    Oracle(OracleArgs),
    /// Solve on a fixed partition.
    SolvePartition(SolvePartitionArgs),
    /// Re-evaluate a result and write plot data.
    Report(ReportArgs),
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Segment(a) => commands::segment(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::SolvePartition(a) => commands::solve_partition(&a),
        Command::Report(a) => commands::report(&a),
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("msbz: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
