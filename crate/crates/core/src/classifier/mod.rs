//! Classifier strategies behind one object-safe interface, looked up by name
//! in a registry. Built-in kinds: `linear-svm`, `rbf-svm` and `cnn`.

mod cnn;
mod svm;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use self::cnn::{CnnClassifier, CnnFactory, CnnNetwork};
pub use self::svm::{SvmClassifier, SvmFactory};

use crate::cnn::{CnnError, TrainConfig};
use crate::fusion::{FusionError, FusionInput, Modality, WindowSample};
use crate::svm::{SvmError, DEFAULT_C_GRID};

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("no classifier kind named `{0}`")]
    UnknownKind(String),
    #[error("file is not a model of any registered classifier kind")]
    UnrecognizedModel,
    #[error("window {0} has no label")]
    Unlabelled(usize),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Cnn(#[from] CnnError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Predicted class index and one score per class (decision values for SVMs,
/// probabilities for networks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    pub scores: Vec<f64>,
}

/// A trained, immutable classifier for one modality.
pub trait GestureClassifier: Send + Sync {
    fn kind(&self) -> &'static str;
    fn modality(&self) -> Modality;
    fn predict(&self, sample: &WindowSample) -> Result<Prediction, ClassifierError>;
    fn save(&self, w: &mut dyn Write) -> Result<(), ClassifierError>;

    fn to_bytes(&self) -> Result<Vec<u8>, ClassifierError> {
        let mut buf = Vec::new();
        self.save(&mut buf)?;
        Ok(buf)
    }
}

/// Training hyperparameters shared by every factory; each kind reads the
/// fields it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainOptions {
    /// Fixed SVM slack. When absent, C is picked from `c_grid` by k-fold CV.
    pub c: Option<f64>,
    pub c_grid: Vec<f64>,
    pub slack_folds: usize,
    pub standardize: bool,
    pub cnn: TrainConfig,
    pub fusion_epochs: usize,
    pub fusion_input: FusionInput,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            c: None,
            c_grid: DEFAULT_C_GRID.to_vec(),
            slack_folds: 5,
            standardize: true,
            cnn: TrainConfig::default(),
            fusion_epochs: 50,
            fusion_input: FusionInput::Probabilities,
        }
    }
}

/// Creates classifiers of one kind, by training or from a saved model.
pub trait ClassifierFactory: Send + Sync {
    fn kind(&self) -> &'static str;
    fn train(
        &self,
        samples: &[WindowSample],
        modality: Modality,
        options: &TrainOptions,
        seed: u64,
    ) -> Result<Box<dyn GestureClassifier>, ClassifierError>;
    /// Whether `bytes` look like a model this factory wrote.
    fn sniff(&self, bytes: &[u8]) -> bool;
    fn load(&self, bytes: &[u8]) -> Result<Box<dyn GestureClassifier>, ClassifierError>;
}

pub(crate) fn labels_of(samples: &[WindowSample]) -> Result<Vec<usize>, ClassifierError> {
    samples.iter().map(|s| s.label.ok_or(ClassifierError::Unlabelled(s.n))).collect()
}

pub struct ClassifierRegistry {
    factories: BTreeMap<&'static str, Box<dyn ClassifierFactory>>,
}

impl Default for ClassifierRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl ClassifierRegistry {
    pub fn empty() -> Self {
        ClassifierRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(SvmFactory::linear()));
        r.register(Box::new(SvmFactory::rbf()));
        r.register(Box::new(CnnFactory));
        r
    }

    /// Adds a factory, returning any previous one of the same kind.
    pub fn register(&mut self, factory: Box<dyn ClassifierFactory>) -> Option<Box<dyn ClassifierFactory>> {
        self.factories.insert(factory.kind(), factory)
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn get(&self, kind: &str) -> Result<&dyn ClassifierFactory, ClassifierError> {
        self.factories
            .get(kind)
            .map(|f| f.as_ref())
            .ok_or_else(|| ClassifierError::UnknownKind(kind.to_string()))
    }

    pub fn train(
        &self,
        kind: &str,
        samples: &[WindowSample],
        modality: Modality,
        options: &TrainOptions,
        seed: u64,
    ) -> Result<Box<dyn GestureClassifier>, ClassifierError> {
        self.get(kind)?.train(samples, modality, options, seed)
    }

    /// Loads a model with whichever factory recognises the bytes.
    pub fn load(&self, bytes: &[u8]) -> Result<Box<dyn GestureClassifier>, ClassifierError> {
        self.factories
            .values()
            .find(|f| f.sniff(bytes))
            .ok_or(ClassifierError::UnrecognizedModel)?
            .load(bytes)
    }

    pub fn load_file(&self, path: &Path) -> Result<Box<dyn GestureClassifier>, ClassifierError> {
        self.load(&std::fs::read(path)?)
    }
}
