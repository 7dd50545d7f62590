use crate::classifier::ClassifierError;
use crate::cnn::CnnError;
use crate::emg_features::FeatureError;
use crate::folds::FoldError;
use crate::fusion::FusionError;
use crate::pipeline::PipelineError;
use crate::sensor_io::SensorError;
use crate::svm::SvmError;
use crate::vision::VisionError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error aggregating the per-module error types.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Vision(#[from] VisionError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Cnn(#[from] CnnError),
    #[error(transparent)]
    Folds(#[from] FoldError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
