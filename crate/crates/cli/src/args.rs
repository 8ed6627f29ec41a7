//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "steckin", version, about = "Verification lab for Copson and Levin-Steckin type series inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grid scan or point evaluation of a criterion function.
    Criteria(CriteriaArgs),
    /// Root-finding for a parameter threshold.
    Threshold(ThresholdArgs),
    /// Build a weight chain and run its induction check.
    Construct(ConstructArgs),
    /// Truncated ratio search, extremal probe or counterexample search for an inequality family.
    Oracle(OracleArgs),
    /// Norm lower bounds and sufficient conditions for factorable matrices.
    Matnorm(MatnormArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub p: Option<f64>,
    /// Defaults to `p`.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Stolarsky index; `inf` is accepted.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Index shift; defaults to `(3 - 1/p)/2` for the chains and `phi45`, else 0.
    #[arg(long)]
    pub a: Option<f64>,
    /// Tuning exponent of the main chain; defaults to `1/p - 1`.
    #[arg(long)]
    pub alpha_opt: Option<f64>,
    /// Truncation length (default 10000).
    #[arg(long = "n", short = 'N')]
    pub n: Option<usize>,
    /// Decimal or 0x-prefixed hex; falls back to STECKIN_SEED, then 0x5EED.
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// `key = value` file supplying defaults for any option.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriteriaArgs {
    /// lemma1, phi45, f35, h36, ineq32, h1h2, crit14 or crit27.
    #[arg(long)]
    pub family: Option<String>,
    /// Grid points on the scanned axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Also emit one row per grid cell (one-dimensional scans).
    #[arg(long)]
    pub rows: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// p-star, alpha0-sub-half or alpha0-super-one.
    #[arg(long)]
    pub target: Option<String>,
    /// Bisection tolerance (default 1e-9).
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// main, alternative, section4 or nu.
    #[arg(long)]
    pub construction: Option<String>,
    /// Write the chain (n, b, w, nu, slack) as CSV to this path.
    #[arg(long)]
    pub chain_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// reverse-hardy, weighted-reverse, dual, alpha-reverse, mean-reverse-plus,
    /// mean-reverse-minus, alpha-forward, mean-forward or beta-limit.
    #[arg(long)]
    pub family: Option<String>,
    /// Run the multi-restart ratio search (the default when no other probe is chosen).
    #[arg(long)]
    pub minimize: bool,
    /// Search for a violating sequence.
    #[arg(long)]
    pub counterexample: bool,
    /// Evaluate the extremal family at this eps.
    #[arg(long)]
    pub extremal: Option<f64>,
    /// Coordinate sweeps per restart (default 500).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Evaluation budget for the counterexample search (default 100000).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Write the best sequence as CSV to this path.
    #[arg(long)]
    pub vector_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MatnormArgs {
    /// power-weights(alpha), cesaro, stolarsky(alpha,beta) or csv:<path> with lambda,Lambda columns.
    #[arg(long)]
    pub generator: Option<String>,
    /// norm, thm31, cor1, random or all (default).
    #[arg(long)]
    pub check: Option<String>,
    /// Constant L of the sufficient conditions (default 1/alpha, or 1).
    #[arg(long = "L", short = 'L')]
    pub l: Option<f64>,
    /// Norm iterations (default 10000).
    #[arg(long)]
    pub iters: Option<usize>,
    /// Random vectors for the sampled ratio check (default 100).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also emit one row per n for the condition checks.
    #[arg(long)]
    pub rows: bool,
    #[command(flatten)]
    pub common: Common,
}
