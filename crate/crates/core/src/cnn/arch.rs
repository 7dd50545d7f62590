//! The two network architectures used for gesture classification.

use super::layer::{Activation, LayerSpec};
use super::model::{Architecture, CnnModel};
use super::CnnError;
use crate::CLASS_COUNT;

pub const VISION_INPUT_SIDE: usize = 60;
pub const EMG_INPUT_LEN: usize = 16;

const RELU: LayerSpec = LayerSpec::Activation { function: Activation::Relu };

/// LeNet-5 adapted to a 1×60×60 patch: two 5×5 valid convolutions, each
/// followed by ReLU and 2×2 max pooling, then dense 120 → 84 → 5.
pub fn vision_lenet_architecture() -> Architecture {
    use LayerSpec::*;
    Architecture {
        input_shape: vec![1, VISION_INPUT_SIDE, VISION_INPUT_SIDE],
        layers: vec![
            Conv2d { in_channels: 1, out_channels: 6, kernel: 5 },
            RELU,
            MaxPool2d { size: 2 },
            Conv2d { in_channels: 6, out_channels: 16, kernel: 5 },
            RELU,
            MaxPool2d { size: 2 },
            Dense { inputs: 16 * 12 * 12, outputs: 120 },
            RELU,
            Dense { inputs: 120, outputs: 84 },
            RELU,
            Dense { inputs: 84, outputs: CLASS_COUNT },
            Softmax,
        ],
    }
}

/// One-dimensional network over the 16 EMG features: conv 6@5, conv 16@5,
/// dense 64, dense 5, ReLU, no pooling.
pub fn emg_cnn_architecture() -> Architecture {
    use LayerSpec::*;
    Architecture {
        input_shape: vec![1, EMG_INPUT_LEN],
        layers: vec![
            Conv1d { in_channels: 1, out_channels: 6, kernel: 5 },
            RELU,
            Conv1d { in_channels: 6, out_channels: 16, kernel: 5 },
            RELU,
            Dense { inputs: 16 * 8, outputs: 64 },
            RELU,
            Dense { inputs: 64, outputs: CLASS_COUNT },
            Softmax,
        ],
    }
}

pub fn vision_lenet(seed: u64) -> Result<CnnModel, CnnError> {
    CnnModel::new(vision_lenet_architecture(), seed)
}

pub fn emg_cnn(seed: u64) -> Result<CnnModel, CnnError> {
    CnnModel::new(emg_cnn_architecture(), seed)
}
