use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AdadeltaConfig, AdadeltaState, CnnError, CnnModel, Gradients, Tensor};
use crate::svm::argmax_lowest;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdadeltaConfig,
    /// Seeds the per-epoch shuffling.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            optimizer: AdadeltaConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean training loss of each epoch.
    pub loss_history: Vec<f64>,
}

/// Mini-batch Adadelta on the mean softmax cross-entropy. Sample gradients
/// within a batch are computed in parallel and summed in batch order, so the
/// result depends only on the inputs and `config.seed`.
pub fn train(model: &mut CnnModel, data: &[(Tensor, usize)], config: &TrainConfig) -> Result<TrainReport, CnnError> {
    if data.is_empty() {
        return Err(CnnError::EmptyDataset);
    }
    if config.batch_size == 0 {
        return Err(CnnError::InvalidHyperparameter("batch size must be positive".into()));
    }
    let classes = model.class_count();
    for (x, label) in data {
        if x.shape() != model.input_shape() {
            return Err(CnnError::ShapeMismatch {
                expected: model.input_shape().to_vec(),
                found: x.shape().to_vec(),
            });
        }
        if *label >= classes {
            return Err(CnnError::InvalidLabel { label: *label, classes });
        }
    }
    let lens: Vec<usize> = model.blobs().iter().map(|b| b.len()).collect();
    let mut state = AdadeltaState::new(config.optimizer, &lens)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut report = TrainReport::default();

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results = batch
                .par_iter()
                .map(|&i| model.loss_and_gradients(&data[i].0, data[i].1))
                .collect::<Result<Vec<_>, _>>()?;
            let mut total = Gradients::zeros_like(model);
            for (loss, g) in &results {
                epoch_loss += loss;
                total.add_assign(g);
            }
            total.scale(1.0 / batch.len() as f64);
            state.step(&mut model.blobs_mut(), &total.blobs)?;
        }
        report.loss_history.push(epoch_loss / data.len() as f64);
    }
    Ok(report)
}

/// Fraction of samples whose most probable class equals the label.
pub fn accuracy(model: &CnnModel, data: &[(Tensor, usize)]) -> Result<f64, CnnError> {
    if data.is_empty() {
        return Err(CnnError::EmptyDataset);
    }
    let hits = data
        .par_iter()
        .map(|(x, y)| model.forward(x).map(|p| usize::from(argmax_lowest(&p) == *y)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / data.len() as f64)
}
