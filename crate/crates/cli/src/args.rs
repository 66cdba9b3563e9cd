use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "skewjeff",
    version,
    about = "Objective Bayesian inference for skew-symmetric models"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Tabulate the Jeffreys prior of lambda and its Student-t approximation.
    PriorTab(PriorTabArgs),
    /// Fit a skew-symmetric model to a sample.
    Fit(FitArgs),
    /// Coverage of credible intervals on simulated data.
    Coverage(CoverageArgs),
    /// Binomial regression with skew-symmetric links.
    Binreg(BinregArgs),
    /// Stress-strength estimate of P(X < Y) from paired data.
    Stress(StressArgs),
    /// Check sufficient conditions for posterior propriety.
    CheckPropriety(ProprietyArgs),
    /// Regenerate a reference table or figure.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Directory for output files. Without it only the JSON summary is
    /// printed.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McmcArgs {
    /// Comma-separated overrides: total=, burnin=, thin=, seed=.
    #[arg(long, value_name = "KEY=VALUE,...")]
    pub mcmc: Option<String>,
    /// Master seed; an explicit `seed=` in --mcmc takes precedence for the chain.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorChoice {
    /// sigma^-1 times the tabulated Jeffreys prior of lambda.
    Jeffreys,
    /// sigma^-1 times the fitted Student-t(1/2) approximation.
    Benchmark,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    /// Grid points per side of zero.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Largest |lambda| on the grid.
    #[arg(long, default_value_t = 200.0)]
    pub max_abs: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PriorTabArgs {
    /// Family name (skew-normal, skew-logistic) or path to a model JSON file.
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// CSV with a `y` column, or `lo` and `hi` columns for censored data.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "skew-logistic")]
    pub model: String,
    #[arg(long, value_enum, default_value_t = PriorChoice::Jeffreys)]
    pub prior: PriorChoice,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Importance draws for the marginal likelihood (0 skips it).
    #[arg(long, default_value_t = 20_000)]
    pub marginal_draws: usize,
    /// Fit even when posterior propriety is not guaranteed.
    #[arg(long)]
    pub force_improper: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverageArgs {
    #[arg(long, default_value = "skew-logistic")]
    pub model: String,
    /// Sample size per replication.
    #[arg(long)]
    pub n: usize,
    /// True skewness; repeat for several cells.
    #[arg(long = "lambda0", required = true)]
    pub lambda0: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Credible levels; repeat for several.
    #[arg(long = "level", default_values_t = [0.95])]
    pub levels: Vec<f64>,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BinregArgs {
    /// CSV with covariate columns plus `n` and `y`. Defaults to the bundled
    /// Bliss beetle data.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Links to fit: logit, probit, skew-logistic, skew-normal. Repeatable;
    /// all four by default.
    #[arg(long = "link")]
    pub links: Vec<String>,
    /// Link used as the Bayes-factor denominator.
    #[arg(long, default_value = "skew-logistic")]
    pub reference: String,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long, default_value_t = 20_000)]
    pub importance_draws: usize,
    /// Include binomial coefficients in the log-likelihood.
    #[arg(long)]
    pub with_constants: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StressArgs {
    /// CSV with `x` and `y` columns, one row per pair.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "skew-logistic")]
    pub model: String,
    #[arg(long, value_enum, default_value_t = PriorChoice::Jeffreys)]
    pub prior: PriorChoice,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Histogram bins for the theta density table.
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    /// Fit even when the differences contain ties.
    #[arg(long)]
    pub force_improper: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProprietyArgs {
    /// CSV with a `y` column, or `lo` and `hi` columns.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "skew-logistic")]
    pub model: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Table1,
    Table2,
    Table3,
    Table4,
    Table6,
    Table7,
    Fig2,
    Table8,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Coverage replications per cell.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Full-scale coverage run (1000 replications per cell).
    #[arg(long)]
    pub full: bool,
    /// Restrict coverage tables to these lambda0 values.
    #[arg(long = "lambda0")]
    pub lambda0: Vec<f64>,
    /// Restrict table6 to these links.
    #[arg(long = "link")]
    pub links: Vec<String>,
    /// Paired data for table8 (`x`, `y` columns).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Family for fig2.
    #[arg(long, default_value = "skew-logistic")]
    pub model: String,
    #[command(flatten)]
    pub mcmc: McmcArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
