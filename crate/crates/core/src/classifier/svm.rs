use std::io::Write;

use serde_json::{Map, Value};

use super::{labels_of, ClassifierError, ClassifierFactory, GestureClassifier, Prediction, TrainOptions};
use crate::fusion::{Modality, WindowSample};
use crate::svm::{select_slack, train_multiclass_with, KernelSpec, MulticlassSvmModel};

/// One-vs-rest SVM over the modality's flat feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmClassifier {
    kind: &'static str,
    modality: Modality,
    pub model: MulticlassSvmModel,
    /// Slack the model was trained with.
    pub c: f64,
}

impl GestureClassifier for SvmClassifier {
    fn kind(&self) -> &'static str {
        self.kind
    }

    fn modality(&self) -> Modality {
        self.modality
    }

    fn predict(&self, sample: &WindowSample) -> Result<Prediction, ClassifierError> {
        let (label, scores) = self.model.predict(&sample.svm_features(self.modality)?)?;
        Ok(Prediction { label, scores })
    }

    /// The model JSON with `classifier`, `modality` and `c` added.
    fn save(&self, w: &mut dyn Write) -> Result<(), ClassifierError> {
        let mut doc = match self.model.to_json() {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        doc.insert("classifier".into(), self.kind.into());
        doc.insert("modality".into(), self.modality.name().into());
        doc.insert("c".into(), self.c.into());
        serde_json::to_writer(&mut *w, &doc).map_err(|e| ClassifierError::Format(e.to_string()))?;
        Ok(w.write_all(b"\n")?)
    }
}

pub struct SvmFactory {
    kind: &'static str,
    linear: bool,
}

impl SvmFactory {
    pub fn linear() -> Self {
        SvmFactory {
            kind: "linear-svm",
            linear: true,
        }
    }

    /// RBF kernel with gamma = 1 / feature dimension.
    pub fn rbf() -> Self {
        SvmFactory {
            kind: "rbf-svm",
            linear: false,
        }
    }

    fn kernel(&self, dim: usize) -> KernelSpec {
        if self.linear {
            KernelSpec::Linear
        } else {
            KernelSpec::rbf_for_dim(dim)
        }
    }
}

impl ClassifierFactory for SvmFactory {
    fn kind(&self) -> &'static str {
        self.kind
    }

    fn train(
        &self,
        samples: &[WindowSample],
        modality: Modality,
        options: &TrainOptions,
        seed: u64,
    ) -> Result<Box<dyn GestureClassifier>, ClassifierError> {
        let labels = labels_of(samples)?;
        let x = samples
            .iter()
            .map(|s| s.svm_features(modality))
            .collect::<Result<Vec<_>, _>>()?;
        let kernel = self.kernel(x.first().map_or(0, Vec::len));
        let c = match options.c {
            Some(c) => c,
            None => select_slack(&x, &labels, kernel, &options.c_grid, options.slack_folds, seed, options.standardize)?.c,
        };
        let model = train_multiclass_with(&x, &labels, c, kernel, options.standardize)?;
        Ok(Box::new(SvmClassifier {
            kind: self.kind,
            modality,
            model,
            c,
        }))
    }

    fn sniff(&self, bytes: &[u8]) -> bool {
        bytes.trim_ascii_start().starts_with(b"{")
            && serde_json::from_slice::<Value>(bytes).is_ok_and(|v| v.get("classifier").and_then(Value::as_str) == Some(self.kind))
    }

    fn load(&self, bytes: &[u8]) -> Result<Box<dyn GestureClassifier>, ClassifierError> {
        let doc: Value = serde_json::from_slice(bytes).map_err(|e| ClassifierError::Format(e.to_string()))?;
        let modality: Modality = doc
            .get("modality")
            .and_then(Value::as_str)
            .ok_or_else(|| ClassifierError::Format("missing modality".into()))?
            .parse()?;
        let c = doc.get("c").and_then(Value::as_f64).unwrap_or(f64::NAN);
        let model = MulticlassSvmModel::from_json(doc)?;
        let expected = self.kernel(model.dim);
        if model.kernel.name() != expected.name() {
            return Err(ClassifierError::Format(format!(
                "{} file holds a {} kernel",
                self.kind,
                model.kernel.name()
            )));
        }
        Ok(Box::new(SvmClassifier {
            kind: self.kind,
            modality,
            model,
            c,
        }))
    }
}
