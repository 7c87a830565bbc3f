mod commands;
mod ranges;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cqsr_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "cqsr",
    version,
    about = "Completely symmetric sets and measure-broadcast-prepare state reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check whether a state-set file is an M-copy CSS (exit 0 yes, 1 no).
    VerifyCss(VerifyArgs),
    /// Write the MUB state set for d = 2 or an odd prime d.
    GenMub(GenMubArgs),
    /// Solve for nonnegative CSS weights over a candidate pool.
    SolveCss(SolveArgs),
    /// Run one measure-broadcast-prepare session from a JSON config.
    Simulate(SimulateArgs),
    /// Run sessions over ranges of d and M and print CSV.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// State-set JSON file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub copies: u64,
    #[arg(long, default_value_t = cqsr_core::css::DEFAULT_CSS_TOL, value_parser = positive_f64)]
    pub tolerance: f64,
    /// Also compute the defect on the full tensor space (bounded by CQSR_MAX_TENSOR_DIM).
    #[arg(long)]
    pub cross_check: bool,
    /// Report the defect at every copy number from M down to 1.
    #[arg(long)]
    pub chain: bool,
}

#[derive(Args, Debug)]
pub struct GenMubArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dimension: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Candidate states: a state-set JSON file (weights, if present, are ignored).
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub candidates: Option<PathBuf>,
    /// Number of Haar-random candidate states.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub random: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dimension: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub copies: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = cqsr_core::css::DEFAULT_CSS_TOL, value_parser = positive_f64)]
    pub tolerance: f64,
    /// Where to write the solved state set; included in stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Session config JSON.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub users: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Dimensions: `2`, `2..4` (inclusive) or `2,3,5`.
    #[arg(long, value_parser = ranges::parse_list)]
    pub dimension: ranges::List,
    /// Copy numbers, same syntax as --dimension.
    #[arg(long, value_parser = ranges::parse_list)]
    pub copies: ranges::List,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub users: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `auto` (a universal set per (d, M)), `mub`, or a state-set file.
    #[arg(long, default_value = "auto")]
    pub set: String,
    /// Random-pool size for solved sets; defaults to 3·(d_{M+1}⁺)² (at least 40).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub pool: Option<u64>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeLimit { .. } => 3,
            Error::UnsupportedDimension(_) => 4,
            Error::Validation(_) | Error::Parse { .. } | Error::Protocol(_) => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyCss(a) => commands::verify_css(&a),
        Command::GenMub(a) => commands::gen_mub(&a),
        Command::SolveCss(a) => commands::solve_css(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("cqsr: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
