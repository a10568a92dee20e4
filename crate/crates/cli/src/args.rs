use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stepwise::constants::LadderKind;
use stepwise::verify::Level;

#[derive(Debug, Parser)]
#[command(name = "stepwise", version, about = "Stepdown and stepup multiple testing: constants, decisions, simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a ladder of critical constants.
    Constants(ConstantsArgs),
    /// Apply a procedure to a CSV of statistics or p-values.
    Decide(DecideArgs),
    /// Monte Carlo estimate of FWER or rejection probabilities.
    Simulate(SimulateArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    IidNormal,
    EquicorrNormal,
    IidUniform,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "iid-normal")]
    pub family: FamilyArg,
    /// Common correlation, equicorr-normal only.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Stepdown,
    Stepup,
}

impl From<KindArg> for LadderKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Stepdown => LadderKind::Stepdown,
            KindArg::Stepup => LadderKind::Stepup,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Ignore the on-disk cache.
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcedureArg {
    Stepdown,
    Stepup,
    Holm,
}

impl ProcedureArg {
    pub fn name(self) -> &'static str {
        match self {
            ProcedureArg::Stepdown => "stepdown",
            ProcedureArg::Stepup => "stepup",
            ProcedureArg::Holm => "holm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Statistics,
    PValues,
}

impl InputKind {
    pub fn name(self) -> &'static str {
        match self {
            InputKind::Statistics => "statistics",
            InputKind::PValues => "p-values",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DecideArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Headered CSV with columns hypothesis_id,value.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "statistics")]
    pub input_kind: InputKind,
    #[arg(long, value_enum, default_value = "stepdown")]
    pub procedure: ProcedureArg,
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Fwer,
    RejectGe,
}

impl MetricArg {
    pub fn name(self) -> &'static str {
        match self {
            MetricArg::Fwer => "fwer",
            MetricArg::RejectGe => "reject-ge",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma list with inf/-inf allowed, or eps:<value>@<count> (rest -inf).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    /// Number of hypotheses; required with the eps: form.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "stepdown")]
    pub procedure: ProcedureArg,
    #[arg(long, value_enum, default_value = "fwer")]
    pub metric: MetricArg,
    #[arg(long)]
    pub j: Option<usize>,
    /// Count only rejections of hypotheses with positive θ.
    #[arg(long)]
    pub false_only: bool,
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Fast,
    Slow,
}

impl From<LevelArg> for Level {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::Fast => Level::Fast,
            LevelArg::Slow => Level::Slow,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "fast")]
    pub level: LevelArg,
    /// Run only these criteria (repeatable).
    #[arg(long)]
    pub criterion: Vec<usize>,
    /// Print a JSON summary instead of one line per criterion.
    #[arg(long)]
    pub json: bool,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}
