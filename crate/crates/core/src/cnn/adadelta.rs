use serde::{Deserialize, Serialize};

use super::CnnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdadeltaConfig {
    pub rho: f64,
    pub epsilon: f64,
    /// Multiplier on the Adadelta update; 1.0 is the plain method.
    pub learning_rate: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        AdadeltaConfig {
            rho: 0.95,
            epsilon: 1e-6,
            learning_rate: 1.0,
        }
    }
}

impl AdadeltaConfig {
    pub fn validate(&self) -> Result<(), CnnError> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(CnnError::InvalidHyperparameter(format!("rho must be in (0, 1), got {}", self.rho)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CnnError::InvalidHyperparameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(CnnError::InvalidHyperparameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Running averages E[g^2] and E[dx^2] for each parameter blob.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub config: AdadeltaConfig,
    pub sq_grad: Vec<Vec<f64>>,
    pub sq_delta: Vec<Vec<f64>>,
}

impl AdadeltaState {
    /// Fresh state for blobs of the given lengths.
    pub fn new(config: AdadeltaConfig, blob_lens: &[usize]) -> Result<Self, CnnError> {
        config.validate()?;
        let zeros: Vec<Vec<f64>> = blob_lens.iter().map(|&n| vec![0.0; n]).collect();
        Ok(AdadeltaState {
            config,
            sq_grad: zeros.clone(),
            sq_delta: zeros,
        })
    }

    /// One update:
    /// E[g²] ← ρE[g²] + (1−ρ)g², Δx = −√(E[Δx²]+ε)/√(E[g²]+ε)·g,
    /// E[Δx²] ← ρE[Δx²] + (1−ρ)Δx², x ← x + lr·Δx.
    pub fn step(&mut self, params: &mut [&mut Vec<f64>], grads: &[Vec<f64>]) -> Result<(), CnnError> {
        let s_lens: Vec<usize> = self.sq_grad.iter().map(Vec::len).collect();
        let p_lens: Vec<usize> = params.iter().map(|p| p.len()).collect();
        let g_lens: Vec<usize> = grads.iter().map(Vec::len).collect();
        if p_lens != s_lens || g_lens != s_lens {
            let found = if p_lens != s_lens { p_lens } else { g_lens };
            return Err(CnnError::ShapeMismatch { expected: s_lens, found });
        }
        let AdadeltaConfig { rho, epsilon, learning_rate } = self.config;
        for (b, param) in params.iter_mut().enumerate() {
            let (eg, ed) = (&mut self.sq_grad[b], &mut self.sq_delta[b]);
            for i in 0..param.len() {
                let g = grads[b][i];
                eg[i] = rho * eg[i] + (1.0 - rho) * g * g;
                let dx = -((ed[i] + epsilon).sqrt() / (eg[i] + epsilon).sqrt()) * g;
                ed[i] = rho * ed[i] + (1.0 - rho) * dx * dx;
                param[i] += learning_rate * dx;
            }
        }
        Ok(())
    }
}
