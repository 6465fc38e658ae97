use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "udisc", version, about = "Unambiguous discrimination of mixed quantum states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Relative eigenvalue cutoff for rank and support decisions.
    #[arg(long, global = true, value_name = "REL")]
    pub tol_rank: Option<f64>,
    /// Allowed negative eigenvalue and Hermitian residual.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_psd: Option<f64>,
    /// Duality-gap target of the solver.
    #[arg(long, global = true, value_name = "TOL")]
    pub gap_tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials for `simulate`.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub trials: u64,
    /// Maximum number of barrier rounds.
    #[arg(long, global = true, value_name = "N")]
    pub max_iter: Option<usize>,
    /// Divide priors by their sum instead of rejecting them.
    #[arg(long, global = true)]
    pub normalize_priors: bool,
    /// File receiving matrices (cores, Gram blocks, measurement, instance).
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split each state into its core and its overlap with the others.
    Decompose(InstanceArg),
    /// Decide which states can be identified with nonzero probability.
    Check(InstanceArg),
    /// Closed-form upper bound on the success probability.
    Bound(InstanceArg),
    /// Optimal success probability.
    Solve(InstanceArg),
    /// Optimal measurement, verified.
    Synth(InstanceArg),
    /// Monte Carlo run of a measurement.
    Simulate(SimulateArgs),
    /// Random instance.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArg {
    /// Instance file, `-` for standard input.
    pub instance: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub instance: PathBuf,
    /// Measurement file written by `synth --output`. Synthesized when absent.
    #[arg(long)]
    pub povm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub m: usize,
    /// Comma-separated ranks, one per state or one for all.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ranks: Vec<usize>,
}
