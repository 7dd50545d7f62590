//! k-fold selection of the slack parameter C.

use rayon::prelude::*;

use super::{train_multiclass_with, KernelSpec, SvmError};
use crate::folds::{stratified_folds, training_indices};

pub const DEFAULT_C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SlackSelection {
    pub c: f64,
    /// `(C, mean validation accuracy)` for every grid entry, ascending in C.
    pub scores: Vec<(f64, f64)>,
}

/// Per-fold validation accuracy of a multiclass SVM with slack `c`.
/// Standardization, when enabled, is fitted on each training split only.
pub fn cross_validate(
    x: &[Vec<f64>],
    labels: &[usize],
    folds: &[Vec<usize>],
    c: f64,
    kernel: KernelSpec,
    standardize: bool,
) -> Result<Vec<f64>, SvmError> {
    (0..folds.len())
        .into_par_iter()
        .map(|k| {
            let train = training_indices(folds, k);
            let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
            let ty: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
            let model = train_multiclass_with(&tx, &ty, c, kernel, standardize)?;
            let mut correct = 0usize;
            for &i in &folds[k] {
                if model.predict(&x[i])?.0 == labels[i] {
                    correct += 1;
                }
            }
            Ok(correct as f64 / folds[k].len().max(1) as f64)
        })
        .collect()
}

/// Picks the grid value with the best mean k-fold accuracy; ties go to the
/// smallest C. Fold assignment is fixed by `seed`.
pub fn select_slack(
    x: &[Vec<f64>],
    labels: &[usize],
    kernel: KernelSpec,
    grid: &[f64],
    folds: usize,
    seed: u64,
    standardize: bool,
) -> Result<SlackSelection, SvmError> {
    if grid.is_empty() {
        return Err(SvmError::InvalidParameter("empty C grid".into()));
    }
    if let Some(c) = grid.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(SvmError::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() == 1 {
        return Ok(SlackSelection {
            c: sorted[0],
            scores: vec![(sorted[0], f64::NAN)],
        });
    }

    let assignment = stratified_folds(labels, folds, seed)?;
    let mut scores = Vec::with_capacity(sorted.len());
    let mut best = (sorted[0], f64::NEG_INFINITY);
    for &c in &sorted {
        let accs = cross_validate(x, labels, &assignment, c, kernel, standardize)?;
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        if mean > best.1 {
            best = (c, mean);
        }
        scores.push((c, mean));
    }
    Ok(SlackSelection { c: best.0, scores })
}
