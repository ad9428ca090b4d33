//! `svie` — command-line front end for the stochastic Volterra solver.
//!
//! Subcommands: `solve` (single-path solution table), `montecarlo` (error
//! statistics against the closed form), `convergence` (statistics or
//! probe-point means across resolutions), and `matrices` (transform and
//! operational matrix dumps). Problems come from the built-in registry
//! (`--problem`) or a key=value definition file (`--file`). All output goes to
//! `--out` as CSV or JSON; a fixed seed reproduces byte-identical files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod problem_file;

#[derive(Parser)]
#[command(
    name = "svie",
    version,
    about = "Walsh operational-matrix solver for linear stochastic Volterra integral equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a single Brownian path and write a solution table
    Solve(SolveArgs),
    /// Monte Carlo error statistics against the exact solution
    #[command(name = "montecarlo")]
    MonteCarlo(MonteCarloArgs),
    /// Statistics or probe-point means across several resolutions
    Convergence(ConvergenceArgs),
    /// Dump T_W, P, P_S and their Walsh-domain forms
    Matrices(MatricesArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ProblemSource {
    /// Built-in problem name: example1, example2, stock, or bond
    #[arg(long)]
    problem: Option<String>,
    /// Path to a problem definition file (UTF-8 key=value lines)
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct RandomnessArgs {
    /// Base RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fine-grid refinement factor R (each path has 2·m·R steps)
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..))]
    refine: u32,
    /// Replace Brownian increments with zeros (deterministic runs)
    #[arg(long)]
    zero_noise: bool,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file path
    #[arg(long)]
    out: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// Dyadic resolution level k (m = 2^k cells)
    #[arg(long)]
    k: u32,
    /// Use the 1/12-prefactor variant of example1's closed form
    #[arg(long)]
    paper_prefactor: bool,
    #[command(flatten)]
    randomness: RandomnessArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// Dyadic resolution level(s), comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
    /// Trial count(s), comma separated; one statistics row per (k, n) pair
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Use the 1/12-prefactor variant of example1's closed form
    #[arg(long)]
    paper_prefactor: bool,
    #[command(flatten)]
    randomness: RandomnessArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    source: ProblemSource,
    /// Dyadic resolution levels, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
    /// Trials per level
    #[arg(long, required = true)]
    n: usize,
    /// Use the 1/12-prefactor variant of example1's closed form
    #[arg(long)]
    paper_prefactor: bool,
    #[command(flatten)]
    randomness: RandomnessArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MatricesArgs {
    /// Dyadic resolution level k (m = 2^k cells)
    #[arg(long)]
    k: u32,
    /// Optional problem supplying the horizon T (defaults to T = 1)
    #[arg(long)]
    problem: Option<String>,
    /// Optional problem file supplying the horizon T
    #[arg(long, conflicts_with = "problem")]
    file: Option<PathBuf>,
    #[command(flatten)]
    randomness: RandomnessArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::MonteCarlo(args) => commands::monte_carlo(args),
        Command::Convergence(args) => commands::convergence(args),
        Command::Matrices(args) => commands::matrices(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
