//! `amsd`: train, apply, and benchmark decision trees and random forests
//! whose continuous splits come from exhaustive search or statistical
//! binning. Subcommands exit 0 on success and nonzero with a one-line
//! diagnostic on failure.

mod commands;
mod output;

use amsd_core::data::MissingPolicy;
use amsd_core::splitters::SplitterStrategy;
use amsd_core::stats::{DEFAULT_ALPHA, DEFAULT_GAMMA_MAX};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "amsd",
    version,
    about = "Decision trees and random forests with skew-adaptive statistical binning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tree or forest and save it as JSON.
    Train(TrainArgs),
    /// Apply a saved model to a CSV file, writing one label per row.
    Predict(PredictArgs),
    /// Cross-validate the standard four models on manifest datasets.
    Benchmark(BenchmarkArgs),
    /// Sweep the adaptive splitter's skewness cap on one dataset.
    AblateGamma(AblateGammaArgs),
    /// Time root-node split proposals across growing data sizes.
    Scale(ScaleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Exhaustive,
    Msd,
    Amsd,
}

impl StrategyArg {
    pub fn to_strategy(self, alpha: f64, gamma_max: f64) -> SplitterStrategy {
        match self {
            StrategyArg::Exhaustive => SplitterStrategy::Exhaustive,
            StrategyArg::Msd => SplitterStrategy::Msd,
            StrategyArg::Amsd => SplitterStrategy::Amsd { alpha, gamma_max },
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Drop every row with any missing value.
    Drop,
    /// Fill continuous gaps with the column mean, categorical with the mode.
    Impute,
}

impl From<PolicyArg> for MissingPolicy {
    fn from(arg: PolicyArg) -> MissingPolicy {
        match arg {
            PolicyArg::Drop => MissingPolicy::DropRows,
            PolicyArg::Impute => MissingPolicy::ImputeMeanMode,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// Human-readable summary on stdout.
    Report,
    /// Delimited table on stdout.
    Table,
}

fn non_negative_f64(s: &str) -> Result<f64, String> {
    let value: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(format!("{s:?} must be a finite non-negative number"))
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    let value: usize = s.parse().map_err(|_| format!("{s:?} is not a whole number"))?;
    if value >= 1 {
        Ok(value)
    } else {
        Err("must be at least 1".to_string())
    }
}

fn fold_count(s: &str) -> Result<usize, String> {
    let value: usize = s.parse().map_err(|_| format!("{s:?} is not a whole number"))?;
    if value >= 2 {
        Ok(value)
    } else {
        Err("cross-validation needs at least 2 folds".to_string())
    }
}

fn scaling_size(s: &str) -> Result<usize, String> {
    let value: usize = s.parse().map_err(|_| format!("{s:?} is not a whole number"))?;
    if value >= 2 {
        Ok(value)
    } else {
        Err("each size must be at least 2 rows".to_string())
    }
}

#[derive(Args)]
pub struct TrainArgs {
    /// CSV training data; the class is the last column.
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    pub data: Option<PathBuf>,
    /// TOML manifest describing the training data.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Continuous-attribute splitter.
    #[arg(long, value_enum, default_value = "amsd")]
    pub strategy: StrategyArg,
    /// Skew sensitivity of the adaptive splitter.
    #[arg(long, value_parser = non_negative_f64, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Absolute skewness cap of the adaptive splitter.
    #[arg(long, value_parser = non_negative_f64, default_value_t = DEFAULT_GAMMA_MAX)]
    pub gamma_max: f64,
    /// Train a random forest with this many trees instead of a single tree.
    #[arg(long, value_parser = positive_usize)]
    pub trees: Option<usize>,
    /// Attributes sampled per forest node; default floor(sqrt(attributes)).
    #[arg(long, value_parser = positive_usize)]
    pub mtry: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Threads for forest building; default all cores.
    #[arg(long, value_parser = positive_usize)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, env = "AMSD_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Model file; default <out-dir>/model.json.
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// Missing-value handling; default from the manifest, else impute.
    #[arg(long, value_enum)]
    pub missing_policy: Option<PolicyArg>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// Saved model (tree or forest JSON).
    #[arg(long)]
    pub model_in: PathBuf,
    /// CSV input; columns are matched to the model's schema by header name.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for predictions.txt.
    #[arg(long, env = "AMSD_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    /// Dataset manifest; repeat for several datasets.
    #[arg(long, required = true)]
    pub manifest: Vec<PathBuf>,
    /// Trees in the forest model.
    #[arg(long, value_parser = positive_usize, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, value_parser = fold_count, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Threads for forest building; default all cores.
    #[arg(long, value_parser = positive_usize)]
    pub workers: Option<usize>,
    #[arg(long, env = "AMSD_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// What to print on stdout; files are always written.
    #[arg(long, value_enum, default_value = "report")]
    pub format: FormatArg,
    /// Override every manifest's missing-value policy.
    #[arg(long, value_enum)]
    pub missing_policy: Option<PolicyArg>,
}

#[derive(Args)]
pub struct AblateGammaArgs {
    /// Dataset manifest; omit to use a built-in skewed synthetic.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Skewness cap to evaluate; repeat for a sweep, reported in order.
    #[arg(long, value_parser = non_negative_f64, default_values_t = [0.0, 1.0, 2.0, 4.0])]
    pub gamma_max: Vec<f64>,
    /// Skew sensitivity of the adaptive splitter.
    #[arg(long, value_parser = non_negative_f64, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_parser = fold_count, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "AMSD_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "report")]
    pub format: FormatArg,
    /// Override the manifest's missing-value policy.
    #[arg(long, value_enum)]
    pub missing_policy: Option<PolicyArg>,
}

#[derive(Args)]
pub struct ScaleArgs {
    /// Row counts to time, comma separated, strictly ascending.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = scaling_size,
        default_values_t = [10_000usize, 20_000, 40_000, 80_000]
    )]
    pub sizes: Vec<usize>,
    /// Splitter to time; repeat for several.
    #[arg(long, value_enum, default_values = ["exhaustive", "msd", "amsd"])]
    pub strategy: Vec<StrategyArg>,
    /// Skew sensitivity for the adaptive splitter.
    #[arg(long, value_parser = non_negative_f64, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Skewness cap for the adaptive splitter.
    #[arg(long, value_parser = non_negative_f64, default_value_t = DEFAULT_GAMMA_MAX)]
    pub gamma_max: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "AMSD_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: FormatArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Benchmark(args) => commands::benchmark(args),
        Command::AblateGamma(args) => commands::ablate_gamma(args),
        Command::Scale(args) => commands::scale(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
