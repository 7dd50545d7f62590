use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::classifier::GestureClassifier;
use crate::fusion::make_complementary_synthetic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchStats {
    pub iterations: usize,
    pub min_us: f64,
    pub mean_us: f64,
    pub p95_us: f64,
    /// Predicted class of every iteration, for determinism checks.
    #[serde(skip)]
    pub predictions: Vec<usize>,
}

/// Value at quantile `q` of sorted data by the nearest-rank rule.
pub fn nearest_rank<T: Copy>(sorted: &[T], q: f64) -> Option<T> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

/// Times single-window inference on synthetic inputs of the model's modality.
pub fn bench(classifier: &dyn GestureClassifier, iterations: usize, seed: u64) -> Result<BenchStats, PipelineError> {
    if iterations == 0 {
        return Err(PipelineError::InvalidConfig("iterations must be at least 1".into()));
    }
    let inputs = make_complementary_synthetic(20, 0.1, seed)?;
    let mut times = Vec::with_capacity(iterations);
    let mut predictions = Vec::with_capacity(iterations);
    for i in 0..iterations {
        let sample = &inputs[i % inputs.len()];
        let t = Instant::now();
        let p = classifier.predict(sample)?;
        times.push(t.elapsed().as_secs_f64() * 1e6);
        predictions.push(p.label);
    }
    let mean_us = times.iter().sum::<f64>() / times.len() as f64;
    times.sort_by(f64::total_cmp);
    Ok(BenchStats {
        iterations,
        min_us: times[0],
        mean_us,
        p95_us: nearest_rank(&times, 0.95).expect("non-empty"),
        predictions,
    })
}
