//! Support vector machines trained with SMO: linear and RBF kernels,
//! one-vs-rest multiclass, and k-fold selection of the slack parameter C.

pub mod kernel;
pub mod multiclass;
pub mod slack;
pub mod smo;
pub mod standardize;

pub use kernel::KernelSpec;
pub use multiclass::{argmax_lowest, train_multiclass, train_multiclass_with, MulticlassSvmModel};
pub use slack::{cross_validate, select_slack, SlackSelection, DEFAULT_C_GRID};
pub use smo::{kkt_residuals, solve_smo, train_binary, BinarySvmModel, SmoConfig, SmoSolution};
pub use standardize::Standardization;

use crate::folds::FoldError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training data contains a single class")]
    SingleClassData,
    #[error("non-finite feature value at sample {sample}, dimension {dim}")]
    NonFiniteFeature { sample: usize, dim: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Folds(#[from] FoldError),
}

pub(crate) fn check_matrix(x: &[Vec<f64>]) -> Result<usize, SvmError> {
    let d = x.first().map_or(0, |r| r.len());
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(SvmError::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(SvmError::NonFiniteFeature { sample: i, dim: j });
        }
    }
    Ok(d)
}
