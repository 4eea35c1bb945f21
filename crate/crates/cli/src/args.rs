use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "rowsketch", version, about = "Row-sampling sketches with verified error targets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample budget for a sampling guarantee.
    Budget(BudgetArgs),
    /// Sketched cross product AᵀB.
    Matmul(MatmulArgs),
    /// Sketched Gram matrix AᵀA.
    Gram(GramArgs),
    /// Rank-k reconstruction from leverage-sampled rows.
    Reconstruct(ReconstructArgs),
    /// Sketch-and-solve least squares.
    Regress(RegressArgs),
    /// Sampled power-iteration estimate of ‖A‖².
    Specnorm(SpecnormArgs),
    /// Monte Carlo failure-rate run against a task's target.
    Trials(TrialsArgs),
    /// Generate a test matrix.
    Gen(GenArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Budget(_) => "budget",
            Command::Matmul(_) => "matmul",
            Command::Gram(_) => "gram",
            Command::Reconstruct(_) => "reconstruct",
            Command::Regress(_) => "regress",
            Command::Specnorm(_) => "specnorm",
            Command::Trials(_) => "trials",
            Command::Gen(_) => "gen",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Bin,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rownorm,
    Leverage,
    Asym,
    Regression,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Symmetric,
    Asymmetric,
    Leverage,
    Regression,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Isometry,
    Gram,
    Product,
    Reconstruct,
    Regress,
    Specnorm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Gaussian,
    Planted,
    Lowrank,
}

/// Accuracy and confidence; both required.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Accuracy {
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Sketching {
    /// Oversampling factor β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Override the computed sample budget.
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Io {
    /// Matrix file; `.bin` is read as BIN, anything else as CSV.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Override the format inferred from file extensions.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct BudgetArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[command(flatten)]
    pub acc: Accuracy,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Stable rank (first operand for asymmetric).
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub rho2: Option<f64>,
    /// Column count (first operand for asymmetric).
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub d2: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GramArgs {
    #[command(flatten)]
    pub acc: Accuracy,
    #[command(flatten)]
    pub sk: Sketching,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct MatmulArgs {
    #[command(flatten)]
    pub acc: Accuracy,
    #[command(flatten)]
    pub sk: Sketching,
    #[command(flatten)]
    pub io: Io,
    /// Second operand B.
    #[arg(long)]
    pub in2: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub acc: Accuracy,
    #[command(flatten)]
    pub sk: Sketching,
    #[command(flatten)]
    pub io: Io,
    #[arg(long)]
    pub k: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct RegressArgs {
    #[command(flatten)]
    pub acc: Accuracy,
    #[command(flatten)]
    pub sk: Sketching,
    #[command(flatten)]
    pub io: Io,
    /// Right-hand side, an m×1 or 1×m matrix file.
    #[arg(long)]
    pub y: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SpecnormArgs {
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Args, Debug, Serialize)]
pub struct TrialsArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub trials: usize,
    #[command(flatten)]
    pub acc: Accuracy,
    #[command(flatten)]
    pub sk: Sketching,
    #[command(flatten)]
    pub io: Io,
    #[arg(long)]
    pub in2: Option<PathBuf>,
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Rows of the generated input when no file is given.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Columns of the generated second operand (product task).
    #[arg(long)]
    pub d2: Option<usize>,
    /// Planted singular values for the generated input.
    #[arg(long, value_delimiter = ',')]
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_delimiter = ',')]
    pub spectrum: Option<Vec<f64>>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Matrix destination.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}
