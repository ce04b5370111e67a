//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "descforge",
    version,
    about = "PLS descriptor selection with STRS and MC-UVE"
)]
pub struct Cli {
    /// Flat TOML file of flag defaults (`key = value`, keys as long flag names).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed. Falls back to the config file, then DESCFORGE_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; 0 uses one per core. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset with planted informative descriptors.
    Synth(SynthArgs),
    /// Fit a PLS model on a whole dataset and save it as JSON.
    Fit(FitArgs),
    /// Predict activities with a saved model.
    Predict(PredictArgs),
    /// Run a selector on the training split and evaluate the refit on the test split.
    Select(SelectArgs),
    /// Plain PLS on all (or a given subset of) descriptors.
    Evaluate(EvaluateArgs),
    /// Replicated STRS runs for several sampling-run counts.
    SweepRuns(SweepArgs),
    /// RMSECV and RMSEP against the number of latent variables.
    NlvCurve(NlvCurveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Strs,
    Mcuve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CvArg {
    Kfold,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV (header row; optional `id` column).
    #[arg(value_name = "DATA")]
    pub data: PathBuf,

    /// Name of the activity column [default: activity].
    #[arg(long)]
    pub activity_col: Option<String>,

    /// Drop zero-variance descriptors instead of failing.
    #[arg(long)]
    pub drop_constant: bool,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Fraction of samples held out for testing [default: 0.25].
    #[arg(long)]
    pub test_fraction: Option<f64>,

    /// Cross-validation folds [default: 10].
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output CSV; the ground truth goes to `<stem>.truth.json` beside it.
    #[arg(value_name = "OUT")]
    pub out: PathBuf,

    /// Samples [default: 100].
    #[arg(long)]
    pub m: Option<usize>,

    /// Descriptors [default: 50].
    #[arg(long)]
    pub p: Option<usize>,

    /// Planted descriptor indices, comma separated [default: 3,7,11].
    #[arg(long, value_delimiter = ',')]
    pub informative: Option<Vec<usize>>,

    /// Planted coefficients, comma separated [default: 2,3,-1].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coefficients: Option<Vec<f64>>,

    /// Standard deviation of the response noise [default: 0.05].
    #[arg(long)]
    pub noise: Option<f64>,

    /// Rank-one design: every descriptor is a noisy copy of one latent factor.
    #[arg(long)]
    pub rank_one: bool,

    /// Name of the activity column [default: activity].
    #[arg(long)]
    pub activity_col: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Latent variables [default: 2].
    #[arg(long)]
    pub nlv: Option<usize>,

    /// Restrict the model to these descriptor names.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,

    /// Output model JSON.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model JSON written by `fit` or `select`.
    #[arg(long)]
    pub model: PathBuf,

    /// CSV with (at least) the model's descriptor columns.
    #[arg(value_name = "DATA")]
    pub data: PathBuf,

    /// Activity column to report next to predictions, if present.
    #[arg(long)]
    pub activity_col: Option<String>,

    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub split: SplitArgs,

    /// Selection method.
    #[arg(long, value_enum)]
    pub method: MethodArg,

    /// Latent variables [default: 10 for strs, 2 for mcuve].
    #[arg(long)]
    pub nlv: Option<usize>,

    /// Fraction of training rows per Monte Carlo fit [default: 0.8].
    #[arg(long)]
    pub sample_ratio: Option<f64>,

    /// STRS sampling runs [default: 100].
    #[arg(long)]
    pub runs: Option<usize>,

    /// STRS smallest subset [default: 2].
    #[arg(long)]
    pub min_subset: Option<usize>,

    /// MC-UVE resampled fits [default: 500].
    #[arg(long)]
    pub iterations: Option<usize>,

    /// MC-UVE largest cut size [default: half the descriptors].
    #[arg(long)]
    pub max_selected: Option<usize>,

    /// MC-UVE step between cut sizes [default: 1].
    #[arg(long)]
    pub cut_stride: Option<usize>,

    /// Output directory [default: .].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub split: SplitArgs,

    /// Latent variables [default: 2].
    #[arg(long)]
    pub nlv: Option<usize>,

    /// Use the best subset of a `selection.json`.
    #[arg(long, conflicts_with = "subset")]
    pub selection: Option<PathBuf>,

    /// Use these descriptor names.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,

    /// Output directory [default: .].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub split: SplitArgs,

    /// Sampling-run counts, comma separated [default: 50,100,200,500].
    #[arg(long, value_delimiter = ',')]
    pub runs: Option<Vec<usize>>,

    /// Replicates per run count [default: 50].
    #[arg(long)]
    pub replicates: Option<usize>,

    /// Latent variables [default: 10].
    #[arg(long)]
    pub nlv: Option<usize>,

    /// Fraction of training rows per Monte Carlo fit [default: 0.8].
    #[arg(long)]
    pub sample_ratio: Option<f64>,

    /// Output directory [default: .].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NlvCurveArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub split: SplitArgs,

    /// Largest latent count on the curve [default: 15].
    #[arg(long)]
    pub max_lv: Option<usize>,

    /// F-test level [default: 0.05].
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Validation scheme [default: kfold].
    #[arg(long, value_enum)]
    pub cv: Option<CvArg>,

    /// Monte Carlo CV iterations [default: 100].
    #[arg(long)]
    pub mc_iterations: Option<usize>,

    /// Output directory [default: .].
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
