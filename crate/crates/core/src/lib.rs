//! Sensor fusion of surface EMG and event-camera input for static hand-gesture
//! classification.
//!
//! The crate is organised along the processing chain:
//!
//! - [`sensor_io`]: AEDAT 2.0 event streams, EMG CSV recordings, session
//!   manifests and synchronized window slicing.
//! - [`emg_features`]: per-channel MAV / RMS feature vectors.
//! - [`vision`]: event frames, hand localisation, patches and HOG.
//! - [`svm`]: SMO-trained linear / RBF SVMs with one-vs-rest multiclass.
//! - [`cnn`]: a small dense-tensor CNN core with Adadelta training.
//! - [`fusion`]: feature-level and classifier-level fusion plus the
//!   cross-validated evaluation harness.
//! - [`classifier`]: the name-keyed registry of classifier strategies.
//! - [`pipeline`]: the four-role replay runtime and latency benchmark.

pub mod classifier;
pub mod cnn;
pub mod emg_features;
pub mod error;
pub mod folds;
pub mod fusion;
pub mod gesture;
pub mod pgm;
pub mod pipeline;
pub mod sensor_io;
pub mod svm;
pub mod vision;

pub use error::{Error, Result};
pub use gesture::{Gesture, CLASS_COUNT};
