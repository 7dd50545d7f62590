//! One-vs-rest multiclass SVM: one binary model per class, prediction by the
//! largest raw decision value (ties go to the lowest class index).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_matrix, train_binary, BinarySvmModel, KernelSpec, Standardization, SvmError};

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassSvmModel {
    pub kernel: KernelSpec,
    /// Class label of each binary model, ascending.
    pub classes: Vec<usize>,
    pub models: Vec<BinarySvmModel>,
    pub dim: usize,
    pub standardization: Option<Standardization>,
}

/// Index of the largest value; the first one wins ties.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn train_multiclass(
    x: &[Vec<f64>],
    labels: &[usize],
    c: f64,
    kernel: KernelSpec,
) -> Result<MulticlassSvmModel, SvmError> {
    train_multiclass_with(x, labels, c, kernel, false)
}

/// Like [`train_multiclass`], optionally z-scoring the features with
/// statistics fitted on `x` and stored in the model.
pub fn train_multiclass_with(
    x: &[Vec<f64>],
    labels: &[usize],
    c: f64,
    kernel: KernelSpec,
    standardize: bool,
) -> Result<MulticlassSvmModel, SvmError> {
    let dim = check_matrix(x)?;
    if x.len() != labels.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            found: labels.len(),
        });
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SvmError::SingleClassData);
    }

    let standardization = standardize.then(|| Standardization::fit(x));
    let scaled;
    let data: &[Vec<f64>] = match &standardization {
        Some(s) => {
            scaled = s.apply_all(x);
            &scaled
        }
        None => x,
    };

    let models = classes
        .par_iter()
        .map(|&class| {
            let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            train_binary(data, &y, c, kernel)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(MulticlassSvmModel {
        kernel,
        classes,
        models,
        dim,
        standardization,
    })
}

impl MulticlassSvmModel {
    /// One decision value per class, in `classes` order.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>, SvmError> {
        if x.len() != self.dim {
            return Err(SvmError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let z = match &self.standardization {
            Some(s) => s.apply(x),
            None => x.to_vec(),
        };
        Ok(self.models.iter().map(|m| m.decision_unchecked(&z)).collect())
    }

    /// Predicted class label and the per-class decision values.
    pub fn predict(&self, x: &[f64]) -> Result<(usize, Vec<f64>), SvmError> {
        let values = self.decision_values(x)?;
        Ok((self.classes[argmax_lowest(&values)], values))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let file = SvmFile {
            kernel: self.kernel.name().to_string(),
            gamma: match self.kernel {
                KernelSpec::Rbf { gamma } => Some(gamma),
                KernelSpec::Linear => None,
            },
            classes: self
                .classes
                .iter()
                .zip(&self.models)
                .map(|(&label, m)| ClassEntry {
                    label,
                    support_vectors: m.support_vectors.clone(),
                    dual_coefs: m.dual_coefs.clone(),
                    bias: m.bias,
                })
                .collect(),
            d: self.dim,
            standardization: self.standardization.clone(),
        };
        serde_json::to_value(file).expect("SVM model serialises")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self, SvmError> {
        let file: SvmFile = serde_json::from_value(value).map_err(|e| SvmError::Format(e.to_string()))?;
        let kernel = match (file.kernel.as_str(), file.gamma) {
            ("linear", _) => KernelSpec::Linear,
            ("rbf", Some(gamma)) => KernelSpec::Rbf { gamma },
            (k, _) => return Err(SvmError::Format(format!("unsupported kernel `{k}`"))),
        };
        kernel.validate()?;
        let mut classes = Vec::new();
        let mut models = Vec::new();
        for entry in file.classes {
            if entry.support_vectors.len() != entry.dual_coefs.len()
                || entry.support_vectors.iter().any(|sv| sv.len() != file.d)
            {
                return Err(SvmError::Format(format!("class {} has inconsistent shapes", entry.label)));
            }
            classes.push(entry.label);
            models.push(BinarySvmModel {
                support_vectors: entry.support_vectors,
                dual_coefs: entry.dual_coefs,
                bias: entry.bias,
                kernel,
            });
        }
        if let Some(s) = &file.standardization {
            if s.mean.len() != file.d || s.std.len() != file.d {
                return Err(SvmError::Format("standardization length differs from d".into()));
            }
        }
        Ok(MulticlassSvmModel {
            kernel,
            classes,
            models,
            dim: file.d,
            standardization: file.standardization,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SvmFile {
    kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    classes: Vec<ClassEntry>,
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    standardization: Option<Standardization>,
}

#[derive(Serialize, Deserialize)]
struct ClassEntry {
    label: usize,
    support_vectors: Vec<Vec<f64>>,
    dual_coefs: Vec<f64>,
    bias: f64,
}
