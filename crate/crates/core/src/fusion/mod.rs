//! Combining EMG and vision: feature concatenation for SVMs, a perceptron
//! layer over two CNN outputs, the complementary synthetic dataset and the
//! cross-validated evaluation harness.

pub mod eval;
pub mod features;
pub mod modality;
pub mod model;
pub mod synthetic;

pub use eval::{evaluate, render_table, EvalConfig, EvalReport, ModelKind};
pub use features::{build_samples, concat_features, sample_from_window, WindowSample};
pub use modality::Modality;
pub use model::{fusion_forward, train_two_step, FusionInput, FusionModel, FusionTrainConfig};
pub use synthetic::{make_complementary_synthetic, MIN_PER_CLASS};

use crate::cnn::CnnError;
use crate::emg_features::FeatureError;
use crate::vision::VisionError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("EMG features belong to window {emg}, vision features to window {vision}")]
    WindowIndexMismatch { emg: usize, vision: usize },
    #[error("{modality} needs {what}, which the sample lacks")]
    MissingInput { modality: Modality, what: &'static str },
    #[error("unknown modality `{0}`")]
    UnknownModality(String),
    #[error("unknown model kind `{0}`")]
    UnknownModelKind(String),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Cnn(#[from] CnnError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Vision(#[from] VisionError),
}
