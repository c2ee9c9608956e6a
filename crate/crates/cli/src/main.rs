mod commands;
mod manifest;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use steerkit::SteerError;

pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_AMBIGUOUS: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Display) -> Self {
        CliError { code: EXIT_INPUT, message: message.to_string() }
    }

    pub fn internal(e: impl Display) -> Self {
        CliError { code: EXIT_SOLVER, message: e.to_string() }
    }
}

impl From<SteerError> for CliError {
    fn from(e: SteerError) -> Self {
        let code = match e {
            SteerError::Numeric { .. } => EXIT_SOLVER,
            _ => EXIT_INPUT,
        };
        CliError { code, message: e.to_string() }
    }
}

/// Accepts plain integers and exponent forms such as `1e7`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(format!("not a non-negative integer: {s}"));
    }
    Ok(x as u64)
}

#[derive(Parser, Debug)]
#[command(name = "steerkit", version, about = "EPR steering toolkit for a one-way steerable two-qubit family")]
struct Cli {
    /// Worker threads (defaults to machine width; STEERKIT_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density matrix, reduced states and PPT verdict.
    StateInfo(StateInfoArgs),
    /// Monte Carlo and quadrature check of the local-hidden-state model.
    LhsVerify(LhsVerifyArgs),
    /// Search for measurement directions minimizing alpha*.
    AlphaStar(AlphaStarArgs),
    /// Feasibility at fixed alpha; writes an inequality or a local model.
    Inequality(InequalityArgs),
    /// Steerability of an assemblage read from JSON.
    CheckAssemblage(CheckAssemblageArgs),
    /// Reproduce the threshold table for m = 2..m-max.
    TableOne(TableOneArgs),
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
pub struct StateSource {
    /// Family parameter in [0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// JSON state file.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct OutputArgs {
    /// Write the JSON result with its manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON result to stdout instead of a summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct StateInfoArgs {
    #[command(flatten)]
    pub source: StateSource,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
#[group(id = "pair_source", required = true, multiple = false, args = ["pairs", "random"])]
pub struct LhsVerifyArgs {
    /// Rounds simulated per pair.
    #[arg(long, value_parser = parse_count)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON file {"pairs": [{"x": [..], "y": [..]}]}.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Number of seeded random pairs.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, hide = true, default_value_t = steerkit::lhs::DEFAULT_FLIP_PROBABILITY)]
    pub flip_probability: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial step in radians.
    #[arg(long, default_value_t = 0.3)]
    pub initial_step: f64,
    #[arg(long, default_value_t = 0.7)]
    pub decay: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub min_step: f64,
    /// Random steps tried per direction in each sweep.
    #[arg(long, default_value_t = 4)]
    pub proposals: usize,
    /// Cap on solver calls per restart.
    #[arg(long)]
    pub max_evaluations: Option<u64>,
}

impl SearchArgs {
    pub fn config(&self, m: usize) -> steerkit::optimizer::SearchConfig {
        steerkit::optimizer::SearchConfig {
            m,
            restarts: self.restarts,
            initial_step: self.initial_step,
            decay: self.decay,
            min_step: self.min_step,
            proposals: self.proposals,
            seed: self.seed,
            threads: None,
            max_evaluations: self.max_evaluations,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct AlphaStarArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=14))]
    pub m: u8,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Include the published value for this m.
    #[arg(long)]
    pub paper_values: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct InequalityArgs {
    /// JSON file {"directions": [[x1, x2, x3], ..]}.
    #[arg(long)]
    pub measurements: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckAssemblageArgs {
    /// Assemblage JSON file.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct TableOneArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=14))]
    pub m_max: u8,
    /// Restarts per search.
    #[arg(long, default_value_t = 20)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on solver calls per restart.
    #[arg(long)]
    pub max_evaluations: Option<u64>,
    /// Largest m that also gets a search from scratch.
    #[arg(long, default_value_t = 6)]
    pub cold_start_max: usize,
    /// Add published values and deltas.
    #[arg(long)]
    pub paper_values: bool,
    /// CSV output; the JSON result goes to <out>.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Resumable progress file.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Print the JSON result to stdout instead of the CSV.
    #[arg(long)]
    pub json: bool,
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let threads = match std::env::var("STEERKIT_THREADS") {
        Ok(v) if !v.trim().is_empty() => {
            Some(v.trim().parse::<usize>().map_err(|_| CliError::input(format!("STEERKIT_THREADS must be a count, got {v:?}")))?)
        }
        _ => flag,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::input("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::internal)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = configure_threads(cli.threads).and_then(|()| match &cli.command {
        Command::StateInfo(a) => commands::state_info(a),
        Command::LhsVerify(a) => commands::lhs_verify(a),
        Command::AlphaStar(a) => commands::alpha_star(a),
        Command::Inequality(a) => commands::inequality(a),
        Command::CheckAssemblage(a) => commands::check_assemblage(a),
        Command::TableOne(a) => commands::table_one(a),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
