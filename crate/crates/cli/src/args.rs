use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sleepsig::experiments::ReportFormat;
use sleepsig::TaskId;

#[derive(Parser, Debug)]
#[command(
    name = "sleepsig",
    version,
    about = "Sleepiness detection from pooled speech embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a manifest, its blobs and optionally a feature CSV and config
    Validate(ValidateArgs),
    /// Generate a synthetic dataset with planted class signal
    Synth(SynthArgs),
    /// Evaluate one technique over the stratified rounds
    Train(TrainArgs),
    /// Mask each task in turn, plus the all-task baseline
    MaskSweep(SweepArgs),
    /// Train on each task alone, plus the all-task baseline
    SeparateSweep(SweepArgs),
    /// MaxAbs + small model search over per-task acoustic features
    BaselineClassical(ClassicalArgs),
    /// Re-render a saved JSON report
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Table => ReportFormat::Table,
        }
    }
}

/// Protocol settings shared by every experiment command. Flags override the
/// config file, which overrides the defaults.
#[derive(Args, Debug)]
pub struct RunArgs {
    /// Dataset manifest (JSON)
    #[arg(long, value_name = "MANIFEST")]
    pub data: PathBuf,
    /// Experiment config (JSON)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for splits, initialisation and shuffling; required here or in the config
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training epochs per round [default: 200]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// [default: 32]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Adam learning rate [default: 0.0001]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Evaluation rounds [default: 5]
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Share of sessions used for training in each round [default: 0.8]
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Undersample the majority class in every training split
    #[arg(long)]
    pub balance: bool,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Rounds to train concurrently
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub parallel: u32,
    /// Validate inputs and print the plan without training or writing
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Train only on these tasks (repeatable)
    #[arg(long = "task", value_name = "TASK", conflicts_with = "mask")]
    pub tasks: Vec<TaskId>,
    /// Zero these tasks' inputs (repeatable)
    #[arg(long = "mask", value_name = "TASK")]
    pub mask: Vec<TaskId>,
    /// Also fit one model on every session and save it
    #[arg(long, value_name = "PATH")]
    pub save_model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ClassicalArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Feature CSV: session_id,task,f0..f61
    #[arg(long)]
    pub features: PathBuf,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, value_name = "MANIFEST")]
    pub data: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Accepted for uniformity; validation never writes
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 400)]
    pub sessions: usize,
    /// Task carrying the class signal (repeatable)
    #[arg(long = "signal-task", value_name = "TASK", default_value = "memory_recall")]
    pub signal_tasks: Vec<TaskId>,
    /// Distance between class means, in embedding units
    #[arg(long, default_value_t = 6.0)]
    pub signal_strength: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 8)]
    pub frames: usize,
    #[arg(long, default_value_t = 0.5)]
    pub sleepy_fraction: f64,
    /// Permute the labels after generation (chance-level control)
    #[arg(long)]
    pub shuffle_labels: bool,
    /// Also write 62-d pseudo-features to features.csv
    #[arg(long)]
    pub features: bool,
    #[arg(long)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// JSON report written by an experiment command
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
