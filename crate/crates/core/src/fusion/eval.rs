use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FusionError, Modality, WindowSample};
use crate::classifier::{labels_of, ClassifierRegistry, TrainOptions};
use crate::folds::{grouped_folds, stratified_folds, training_indices};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LinearSVM")]
    LinearSvm,
    #[serde(rename = "RbfSVM")]
    RbfSvm,
    #[serde(rename = "CNN")]
    Cnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::LinearSvm, ModelKind::RbfSvm, ModelKind::Cnn];

    /// Name of the matching classifier in the registry.
    pub fn registry_kind(self) -> &'static str {
        match self {
            ModelKind::LinearSvm => "linear-svm",
            ModelKind::RbfSvm => "rbf-svm",
            ModelKind::Cnn => "cnn",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::LinearSvm => "LinearSVM",
            ModelKind::RbfSvm => "RbfSVM",
            ModelKind::Cnn => "CNN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.registry_kind())
    }
}

impl FromStr for ModelKind {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.registry_kind().eq_ignore_ascii_case(t) || k.label().eq_ignore_ascii_case(t))
            .ok_or_else(|| FusionError::UnknownModelKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub train: TrainOptions,
    /// Per-sample group names (e.g. subjects). When set, folds keep each
    /// group together instead of stratifying by class.
    #[serde(skip)]
    pub groups: Option<Vec<String>>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 5,
            seed: 0,
            train: TrainOptions::default(),
            groups: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub modality: Modality,
    pub model_kind: ModelKind,
    pub window_ms: u64,
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl EvalReport {
    pub fn from_folds(modality: Modality, model_kind: ModelKind, window_ms: u64, fold_accuracies: Vec<f64>) -> Self {
        let n = fold_accuracies.len().max(1) as f64;
        let mean = fold_accuracies.iter().sum::<f64>() / n;
        let std = (fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        EvalReport {
            modality,
            model_kind,
            window_ms,
            fold_accuracies,
            mean,
            std,
        }
    }
}

/// k-fold cross-validation: for each fold, train on the others with the
/// registry's classifier of `kind` and score accuracy on the held-out fold.
/// Folds run in parallel; results are kept in fold order.
pub fn evaluate(
    registry: &ClassifierRegistry,
    samples: &[WindowSample],
    modality: Modality,
    kind: ModelKind,
    window_ms: u64,
    config: &EvalConfig,
) -> Result<EvalReport, Error> {
    let labels = labels_of(samples)?;
    let folds = match &config.groups {
        Some(groups) => grouped_folds(groups, config.folds, config.seed)?,
        None => stratified_folds(&labels, config.folds, config.seed)?,
    };
    let factory = registry.get(kind.registry_kind())?;
    let accuracies = (0..folds.len())
        .into_par_iter()
        .map(|k| -> Result<f64, Error> {
            let train: Vec<WindowSample> = training_indices(&folds, k).iter().map(|&i| samples[i].clone()).collect();
            let model = factory.train(&train, modality, &config.train, config.seed.wrapping_add(k as u64))?;
            let mut correct = 0usize;
            for &i in &folds[k] {
                if model.predict(&samples[i])?.label == labels[i] {
                    correct += 1;
                }
            }
            Ok(correct as f64 / folds[k].len().max(1) as f64)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport::from_folds(modality, kind, window_ms, accuracies))
}

/// Text tables, one per window length: modality rows, model columns,
/// "mean ± std" cells in percent.
pub fn render_table(reports: &[EvalReport]) -> String {
    let windows: BTreeSet<u64> = reports.iter().map(|r| r.window_ms).collect();
    let kinds: BTreeSet<ModelKind> = reports.iter().map(|r| r.model_kind).collect();
    let mut out = String::new();
    for t in windows {
        let mut rows: BTreeMap<Modality, BTreeMap<ModelKind, &EvalReport>> = BTreeMap::new();
        for r in reports.iter().filter(|r| r.window_ms == t) {
            rows.entry(r.modality).or_default().insert(r.model_kind, r);
        }
        out.push_str(&format!("T = {t} ms\n"));
        out.push_str(&format!("{:<10}", "Modality"));
        for k in &kinds {
            out.push_str(&format!("{:>14}", k.label()));
        }
        out.push('\n');
        for (m, cells) in rows {
            out.push_str(&format!("{:<10}", m.name()));
            for k in &kinds {
                let cell = cells
                    .get(k)
                    .map_or_else(|| "-".to_string(), |r| format!("{:.1} ± {:.1}", 100.0 * r.mean, 100.0 * r.std));
                out.push_str(&format!("{cell:>14}"));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
