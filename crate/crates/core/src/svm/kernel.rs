use serde::{Deserialize, Serialize};

use super::SvmError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelSpec {
    /// RBF with the conventional `γ = 1/d`.
    pub fn rbf_for_dim(d: usize) -> KernelSpec {
        KernelSpec::Rbf {
            gamma: 1.0 / d.max(1) as f64,
        }
    }

    pub fn validate(&self) -> Result<(), SvmError> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(SvmError::InvalidParameter(format!("RBF gamma must be positive, got {gamma}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
        if x.len() != y.len() {
            return Err(SvmError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        let rbf = KernelSpec::Rbf { gamma: 0.5 };
        assert_eq!(rbf.eval(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(KernelSpec::Linear.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        // |x - y|² = 2
        let v = rbf.eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.3678794).abs() < 1e-7);
    }

    #[test]
    fn mismatch_and_gamma() {
        assert_eq!(
            KernelSpec::Linear.eval(&[1.0], &[1.0, 2.0]),
            Err(SvmError::DimensionMismatch { expected: 1, found: 2 })
        );
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert_eq!(KernelSpec::rbf_for_dim(16), KernelSpec::Rbf { gamma: 1.0 / 16.0 });
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            x in prop::collection::vec(-10.0f64..10.0, 5),
            y in prop::collection::vec(-10.0f64..10.0, 5),
            gamma in 0.001f64..2.0,
        ) {
            for k in [KernelSpec::Linear, KernelSpec::Rbf { gamma }] {
                prop_assert_eq!(k.eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
            }
            let r = KernelSpec::Rbf { gamma }.eval(&x, &y).unwrap();
            let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            prop_assert!((0.0..=1.0).contains(&r));
            if gamma * d2 < 700.0 {
                prop_assert!(r > 0.0);
            }
        }
    }
}
