//! Streaming replay of a recorded session through four concurrent roles
//! (event source, EMG source, processing, output) connected by bounded
//! queues, plus an inference latency benchmark.

pub mod bench;
pub mod config;
pub mod replay;

use std::path::PathBuf;

pub use bench::{bench, nearest_rank, BenchStats};
pub use config::{DropPolicy, PipelineConfig, ReplaySpeed};
pub use replay::{load_classifier, run_replay, ClassificationRecord, ReplayOutcome, ReplaySummary};

use crate::classifier::ClassifierError;
use crate::fusion::{FusionError, Modality};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("model is for {model}, pipeline is configured for {configured}")]
    ModelModalityMismatch { model: Modality, configured: Modality },
    #[error("model file not found: {}", .0.display())]
    MissingModel(PathBuf),
    #[error("no model path configured")]
    NoModelPath,
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error("a pipeline thread panicked")]
    ThreadPanic,
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}
