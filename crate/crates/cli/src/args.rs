use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use uavdeploy::generate::GadgetVariant;
use uavdeploy::minsum::DEFAULT_GRID_STEPS;
use uavdeploy::Metric;

use crate::sweep::{SolverKind, SweepParam};

#[derive(Debug, Parser)]
#[command(name = "uavdeploy", version, about = "Deploy aerial agents to cover a target with minimal delay")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print the deployment as JSON.
    Solve(SolveArgs),
    /// Decide whether a deadline admits a covering deployment.
    Feasible(FeasibleArgs),
    /// Average solver objectives over random fleets along one parameter.
    Sweep(SweepArgs),
    /// Time a solver, optionally with its scaling ladder.
    Bench(BenchArgs),
    /// Draw a random instance.
    Gen(GenArgs),
    /// Build a 3-partition hard instance.
    Gadget(GadgetArgs),
    /// Check a deployment against an instance.
    Verify(VerifyArgs),
    /// Exhaustive reference solution for a small fleet.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Minmax,
    Minsum,
    Minmax2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Exact common-origin min-max when it applies, otherwise the FPTAS;
    /// the DP for min-sum.
    Auto,
    Exact,
    Fptas,
    Greedy,
    Dp,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub objective: Objective,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// DP grid steps spanning the total-delay upper bound.
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    pub grid_steps: usize,
    /// Cell radius for the planar solver (defaults to the smallest radius).
    #[arg(long)]
    pub r_eff: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeasibleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub deadline: f64,
    /// Let agents swap their left-to-right order (exhaustive, small fleets).
    #[arg(long)]
    pub any_order: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_enum, required = true)]
    pub solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = crate::sweep::DEFAULT_RUNS)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generator settings (JSON) for everything the sweep does not vary.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Start every agent at this abscissa.
    #[arg(long)]
    pub shared_origin: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    pub grid_steps: usize,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Worker threads (all cores when absent).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Add the mean runtime column; the CSV is then no longer byte-stable.
    #[arg(long)]
    pub timing: bool,
    /// Pair every seed with its antithetic draw to reduce sampling noise.
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["instance", "gen"])))]
pub struct BenchArgs {
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Generator settings (JSON) to draw the instance from.
    #[arg(long)]
    pub gen: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = 10)]
    pub repeat: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    pub grid_steps: usize,
    /// Also run the scaling ladder (fptas: ε and fleet size; dp: grid doubling).
    #[arg(long)]
    pub ladder: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator settings (JSON); flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub shared_origin: Option<f64>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Manhattan,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Manhattan => Metric::Manhattan,
        }
    }
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    /// Comma-separated multiset, e.g. `5,4,4,3,3,3`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub items: Vec<u64>,
    #[arg(long, value_enum, default_value_t = VariantArg::Minmax)]
    pub variant: VariantArg,
    /// Add one spare agent that can never pay off.
    #[arg(long)]
    pub padding: bool,
    /// Instance destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write `k`, `m`, `b` and the partition verdict.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Minmax,
    Minsum,
}

impl From<VariantArg> for GadgetVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Minmax => GadgetVariant::MinMax,
            VariantArg::Minsum => GadgetVariant::MinSum,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub deployment: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub objective: Objective,
    #[arg(long)]
    pub instance: PathBuf,
    /// Refuse fleets larger than this.
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    /// Grid doublings per order for the min-sum oracle.
    #[arg(long, default_value_t = 6)]
    pub refine: usize,
    #[arg(long)]
    pub r_eff: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
