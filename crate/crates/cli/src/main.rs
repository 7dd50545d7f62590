//! `gfuse`: train, evaluate and replay EMG + event-camera gesture classifiers.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gfuse", version, about = "EMG and event-camera sensor fusion for hand-gesture classification")]
#[command(arg_required_else_help = true, propagate_version = true)]
pub struct Cli {
    /// JSON file with pipeline and training settings; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for every stochastic stage.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Machine-readable output (JSON / JSON lines).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert model files or generate synthetic recordings.
    #[command(subcommand)]
    Convert(ConvertCommand),
    /// Dump per-window event frames and patches, or EMG features.
    Inspect(InspectArgs),
    /// Train one classifier and save it.
    Train(TrainArgs),
    /// Cross-validated accuracy for modality / model / window combinations.
    Eval(EvalArgs),
    /// Stream a recorded session through the four-role runtime.
    Replay(ReplayArgs),
    /// Measure per-window inference latency of a saved model.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum ConvertCommand {
    /// Export a model file as JSON.
    ModelToJson { input: PathBuf, output: PathBuf },
    /// Rebuild a binary model from its JSON export.
    JsonToModel { input: PathBuf, output: PathBuf },
    /// Write a synthetic recording session (AEDAT events, EMG CSV, manifest).
    SynthSession(SynthSessionArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SensorArg {
    Dvs128,
    Davis240,
}

#[derive(Debug, Args)]
pub struct SynthSessionArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "dvs128")]
    pub sensor: SensorArg,
    /// Repetitions of each of the five gestures.
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    /// Also write APS frames (DAVIS240 only).
    #[arg(long)]
    pub aps: bool,
    #[arg(long, default_value = "synthetic")]
    pub subject: String,
    #[arg(long, default_value = "1")]
    pub session: String,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["events", "emg"])))]
pub struct InspectArgs {
    /// AEDAT 2.0 event file; writes frame_NNNNN.pgm and patch_NNNNN.pgm per window.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// EMG CSV recording; writes `n,f0..f15` feature rows.
    #[arg(long)]
    pub emg: Option<PathBuf>,
    /// Window length in milliseconds.
    #[arg(long, default_value_t = 200)]
    pub window: u64,
    /// Output directory for frames, or output file for features (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["data", "synthetic"])))]
pub struct DataArgs {
    /// Directory searched recursively for session.json manifests.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Use the complementary synthetic dataset instead of recordings.
    #[arg(long)]
    pub synthetic: bool,
    /// Samples per class for --synthetic.
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    /// Noise standard deviation for --synthetic.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Debug, Args)]
pub struct TrainingFlags {
    /// Fixed SVM slack; by default chosen by 5-fold CV over {0.01, 0.1, 1, 10, 100}.
    #[arg(long)]
    pub c: Option<f64>,
    /// CNN training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Epochs for the fusion perceptron layer.
    #[arg(long)]
    pub fusion_epochs: Option<usize>,
    /// Mini-batch size for CNN training.
    #[arg(long)]
    pub batch: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub modality: Option<String>,
    /// linear-svm, rbf-svm or cnn.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub window: Option<u64>,
    #[command(flatten)]
    pub training: TrainingFlags,
    /// Where to write the trained model.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated modalities (EMG, DVS, DAV, FRM, FUS-DVS, FUS-DAV, FUS-FRM).
    #[arg(long, value_delimiter = ',', required = true)]
    pub modality: Vec<String>,
    /// Comma-separated model kinds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub model: Vec<String>,
    /// Comma-separated window lengths in milliseconds.
    #[arg(long, value_delimiter = ',', default_value = "200")]
    pub window: Vec<u64>,
    /// Cross-validation folds [default: 5].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Keep each subject within one fold instead of stratifying by class.
    #[arg(long)]
    pub per_subject: bool,
    #[command(flatten)]
    pub training: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Session manifest.
    #[arg(long)]
    pub session: PathBuf,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub modality: Option<String>,
    #[arg(long)]
    pub window: Option<u64>,
    /// Block producers instead of discarding windows.
    #[arg(long)]
    pub no_drop: bool,
    #[arg(long, value_parser = ["realtime", "max"])]
    pub speed: Option<String>,
    /// Queue capacity in windows.
    #[arg(long)]
    pub queue: Option<usize>,
    /// JSON-lines output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Expected modality of the model.
    #[arg(long)]
    pub modality: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let json = cli.json;
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream reader closed early, e.g. `| head`
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            if json {
                eprintln!("{}", serde_json::json!({ "error": format!("{e:#}") }));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
