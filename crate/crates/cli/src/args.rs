use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Every flag can also be set through an environment variable named
/// `TWUFP_<FLAG>`, e.g. `TWUFP_EPSILON=1/8`.
#[derive(Debug, Parser)]
#[command(name = "twufp", version, about = "Unsplittable flow on a path with time windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Solve an instance and write the schedule.
    Solve(SolveArgs),
    /// Check a schedule against an instance.
    Verify(VerifyArgs),
    /// 3DM reduction: build the instance or map solutions in either direction.
    Reduce(ReduceArgs),
    /// Run a benchmark configuration.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    /// Random windows.
    Random,
    /// Windows exactly as long as the task.
    UfpDegenerate,
    /// Every window is the whole path.
    Span,
    /// A span instance padded with an equally long zero-capacity suffix.
    SpanPadded,
    /// The instance built from a 3DM instance (from --input, or random).
    #[value(name = "from-3dm")]
    #[serde(rename = "from-3dm")]
    From3dm,
    /// A random 3DM instance.
    ThreeDm,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub kind: GenKind,
    #[arg(long, env = "TWUFP_N", default_value_t = 5)]
    pub n: usize,
    #[arg(long, env = "TWUFP_M", default_value_t = 8)]
    pub m: u64,
    /// Required for `random`; defaults to 0 elsewhere.
    #[arg(long, env = "TWUFP_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "TWUFP_MAX_DEMAND", default_value_t = 4)]
    pub max_demand: u64,
    #[arg(long, env = "TWUFP_MAX_CAPACITY", default_value_t = 6)]
    pub max_capacity: u64,
    #[arg(long, env = "TWUFP_MAX_WEIGHT", default_value_t = 10)]
    pub max_weight: u64,
    /// Give half of the weights denominator 2.
    #[arg(long, env = "TWUFP_FRACTIONAL")]
    pub fractional: bool,
    /// 3DM side size.
    #[arg(long, env = "TWUFP_Q", default_value_t = 2)]
    pub q: usize,
    /// Number of hyperedges of a random 3DM instance.
    #[arg(long, env = "TWUFP_EDGES")]
    pub edges: Option<usize>,
    /// Occurrence bound: draw a 3DM-k instance instead.
    #[arg(long, env = "TWUFP_K")]
    pub k: Option<usize>,
    /// 3DM file for `from-3dm`.
    #[arg(long, env = "TWUFP_INPUT")]
    pub input: Option<PathBuf>,
    #[arg(long, short, env = "TWUFP_OUTPUT")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    Approx,
    Greedy,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Approx => "approx",
            Algorithm::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// Largest task count the exact oracle accepts.
    #[arg(long = "limits-n", env = "TWUFP_LIMITS_N", default_value_t = 14)]
    pub n: usize,
    /// Largest path length the exact oracle accepts.
    #[arg(long = "limits-m", env = "TWUFP_LIMITS_M", default_value_t = 256)]
    pub m: u64,
    /// Search nodes the exact oracle may visit.
    #[arg(long = "limits-nodes", env = "TWUFP_LIMITS_NODES", default_value_t = 200_000_000)]
    pub nodes: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Enumerate every guess (the default).
    #[arg(long, env = "TWUFP_BUDGET_EXHAUSTIVE", conflicts_with = "budget_width")]
    pub budget_exhaustive: bool,
    /// Cap each guess family at this many candidates.
    #[arg(long, env = "TWUFP_BUDGET_WIDTH")]
    pub budget_width: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, short, env = "TWUFP_INPUT")]
    pub input: PathBuf,
    /// Schedule destination; stdout when absent.
    #[arg(long, short, env = "TWUFP_OUTPUT")]
    pub output: Option<PathBuf>,
    /// Run report destination; stderr when absent.
    #[arg(long, env = "TWUFP_REPORT")]
    pub report: Option<PathBuf>,
    #[arg(long, short, value_enum, env = "TWUFP_ALGORITHM", default_value = "approx")]
    pub algorithm: Algorithm,
    /// Accuracy, of the form 1/k.
    #[arg(long, short, env = "TWUFP_EPSILON", default_value = "1/4")]
    pub epsilon: String,
    /// Also run the exact oracle and report the ratio.
    #[arg(long, env = "TWUFP_ORACLE")]
    pub oracle: bool,
    /// Print one line per improving candidate to stderr (approx only).
    #[arg(long, env = "TWUFP_TRACE")]
    pub trace: bool,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[command(flatten)]
    pub limits: LimitArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, short, env = "TWUFP_INPUT")]
    pub input: PathBuf,
    #[arg(long, short, env = "TWUFP_SCHEDULE")]
    pub schedule: PathBuf,
    /// Allowed overload factor, e.g. `3/2`.
    #[arg(long, short, env = "TWUFP_AUGMENTATION", default_value = "1")]
    pub augmentation: String,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(subcommand)]
    pub direction: ReduceCommand,
}

#[derive(Debug, Subcommand)]
pub enum ReduceCommand {
    /// Build the spanUFP instance of a 3DM instance.
    Instance {
        #[arg(long, short, env = "TWUFP_INPUT")]
        input: PathBuf,
        #[arg(long, short, env = "TWUFP_OUTPUT")]
        output: Option<PathBuf>,
    },
    /// Turn a matching (a JSON list of hyperedge indices) into a schedule.
    /// Without --matching a maximum matching is computed first.
    Matching {
        #[arg(long, short, env = "TWUFP_INPUT")]
        input: PathBuf,
        #[arg(long, env = "TWUFP_MATCHING")]
        matching: Option<PathBuf>,
        #[arg(long, short, env = "TWUFP_OUTPUT")]
        output: Option<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Turn a feasible schedule of the built instance into a matching.
    Schedule {
        #[arg(long, short, env = "TWUFP_INPUT")]
        input: PathBuf,
        #[arg(long, short, env = "TWUFP_SCHEDULE")]
        schedule: PathBuf,
        #[arg(long, short, env = "TWUFP_OUTPUT")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, short, env = "TWUFP_CONFIG")]
    pub config: PathBuf,
    /// Machine-readable rows, one JSON object per line.
    #[arg(long, short, env = "TWUFP_OUTPUT")]
    pub output: Option<PathBuf>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, short, env = "TWUFP_JOBS", default_value_t = 0)]
    pub jobs: usize,
}
