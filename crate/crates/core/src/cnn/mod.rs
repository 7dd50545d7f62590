//! Dense-tensor convolutional networks in double precision: layers with
//! hand-written backpropagation, softmax cross-entropy, Adadelta training and
//! a versioned binary model container.

pub mod adadelta;
pub mod arch;
pub mod format;
pub mod layer;
pub mod model;
pub mod tensor;
pub mod train;

pub use adadelta::{AdadeltaConfig, AdadeltaState};
pub use arch::{emg_cnn, emg_cnn_architecture, vision_lenet, vision_lenet_architecture, EMG_INPUT_LEN, VISION_INPUT_SIDE};
pub use format::{is_fgcn, read_model, write_model, Container, FORMAT_VERSION, MAGIC};
pub use layer::{Activation, Layer, LayerSpec};
pub use model::{Architecture, CnnModel, Gradients};
pub use tensor::Tensor;
pub use train::{accuracy, train, TrainConfig, TrainReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CnnError {
    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("label {label} outside 0..{classes}")]
    InvalidLabel { label: usize, classes: usize },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("model file: {0}")]
    Format(String),
}
