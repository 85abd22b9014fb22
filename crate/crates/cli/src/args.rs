use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coherence::solver::SolverConfig;
use coherence::MeasureKind;

#[derive(Debug, Parser)]
#[command(name = "coherence", version, about = "Coherence measures and verification sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one measure on a state file and print a JSON report.
    Measure(MeasureArgs),
    /// Compare the numeric trace-distance optimum with 2(d-1)|a| on random family states.
    #[command(name = "verify-theorem2")]
    VerifyTheorem2(Theorem2Args),
    /// Check the selective monotonicity chain on random 2×d strictly incoherent instruments.
    VerifyMonotonicity(MonotonicityArgs),
    /// Tabulate the three measures on the maximally coherent state.
    Ordering(OrderingArgs),
    /// Evaluate all measures along a one-parameter family of states.
    Sweep(SweepArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Base seed; per-trial seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Acceptance tolerance of the command (see each subcommand's help).
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Worker threads for independent trials; output order never depends on it.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Projected-subgradient settings.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = SolverConfig::default().step_init)]
    pub step_init: f64,
    /// Stabilization threshold for the best objective over the stopping window.
    #[arg(long, default_value_t = SolverConfig::default().tol)]
    pub solver_tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().restarts)]
    pub restarts: usize,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            step_init: self.step_init,
            tol: self.solver_tol,
            restarts: self.restarts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum MeasureArg {
    L1,
    RelEntropy,
    TraceDistClosed,
    TraceDistNumeric,
}

impl From<MeasureArg> for MeasureKind {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::L1 => MeasureKind::L1,
            MeasureArg::RelEntropy => MeasureKind::RelEntropy,
            MeasureArg::TraceDistClosed => MeasureKind::TraceDistClosed,
            MeasureArg::TraceDistNumeric => MeasureKind::TraceDistNumeric,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    /// JSON file holding {dim, re, im}, {x, a} or {p}.
    pub state_file: PathBuf,
    #[arg(long, value_enum)]
    pub measure: MeasureArg,
    // --tol: entrywise tolerance for recognizing a density matrix as a
    // constant-off-diagonal state (trace_dist_closed only).
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Theorem2Args {
    #[arg(long, default_value_t = 2)]
    pub d_min: usize,
    #[arg(long, default_value_t = 8)]
    pub d_max: usize,
    /// Trials per dimension.
    #[arg(long, default_value_t = 25)]
    pub trials: usize,
    // --tol: largest accepted |numeric − closed|.
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// How many Kraus operators each random instrument gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrausPolicy {
    /// Seeded choice in `[ceil(d/2), d + 2]`.
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for KrausPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(KrausPolicy::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(KrausPolicy::Fixed(n)),
            _ => Err(format!("expected \"auto\" or a positive integer, got {s:?}")),
        }
    }
}

impl std::fmt::Display for KrausPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KrausPolicy::Auto => f.write_str("auto"),
            KrausPolicy::Fixed(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MonotonicityArgs {
    #[arg(long, default_value_t = 2)]
    pub d_min: usize,
    #[arg(long, default_value_t = 8)]
    pub d_max: usize,
    /// Trials per dimension.
    #[arg(long, default_value_t = 1429)]
    pub trials: usize,
    /// "auto" or a fixed operator count.
    #[arg(long, default_value = "auto")]
    pub n_kraus: KrausPolicy,
    // --tol is not used: the chain is checked with its fixed slacks.
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OrderingArgs {
    #[arg(long, default_value_t = 16)]
    pub d_max: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    A,
    D,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to vary: the off-diagonal value a, or the dimension d.
    #[arg(long, value_enum)]
    pub vary: Vary,
    /// Dimension of the template when varying a (uniform populations unless --x is given).
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Comma-separated populations of the template when varying a.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,
    /// Off-diagonal value of the template when varying d.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    /// Number of intervals when varying a (steps + 1 points); ignored when varying d.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    // --tol: largest accepted |numeric − closed| on feasible points.
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}
