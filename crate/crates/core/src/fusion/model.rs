use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::FusionError;
use crate::cnn::layer::softmax;
use crate::cnn::{
    emg_cnn, train, vision_lenet, AdadeltaConfig, AdadeltaState, Architecture, CnnError, CnnModel, Container, Tensor,
    TrainConfig,
};

/// What the perceptron layer sees from each network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionInput {
    /// Post-softmax class probabilities.
    #[default]
    Probabilities,
    /// Pre-softmax activations.
    Logits,
}

/// Two unimodal CNNs whose outputs feed one fully connected softmax layer.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub emg_cnn: CnnModel,
    pub vision_cnn: CnnModel,
    /// `classes x 2·classes`, row-major; columns are EMG outputs then vision outputs.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input: FusionInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionTrainConfig {
    /// Settings for the two unimodal networks (their seeds are derived from
    /// the seed passed to [`train_two_step`]).
    pub cnn: TrainConfig,
    pub fusion_epochs: usize,
    pub fusion_batch_size: usize,
    pub optimizer: AdadeltaConfig,
    pub input: FusionInput,
}

impl Default for FusionTrainConfig {
    fn default() -> Self {
        FusionTrainConfig {
            cnn: TrainConfig::default(),
            fusion_epochs: 50,
            fusion_batch_size: 32,
            optimizer: AdadeltaConfig::default(),
            input: FusionInput::Probabilities,
        }
    }
}

impl FusionModel {
    pub fn new(
        emg_cnn: CnnModel,
        vision_cnn: CnnModel,
        weights: Vec<f64>,
        bias: Vec<f64>,
        input: FusionInput,
    ) -> Result<Self, CnnError> {
        let k = emg_cnn.class_count();
        if vision_cnn.class_count() != k {
            return Err(CnnError::ShapeMismatch {
                expected: vec![k],
                found: vec![vision_cnn.class_count()],
            });
        }
        if weights.len() != k * 2 * k || bias.len() != k {
            return Err(CnnError::ShapeMismatch {
                expected: vec![k, 2 * k],
                found: vec![weights.len(), bias.len()],
            });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(CnnError::NonFinite("fusion weights"));
        }
        Ok(FusionModel {
            emg_cnn,
            vision_cnn,
            weights,
            bias,
            input,
        })
    }

    pub fn class_count(&self) -> usize {
        self.bias.len()
    }

    /// The `2·classes` perceptron inputs: EMG network output then vision network output.
    pub fn branch_outputs(&self, emg: &Tensor, vision: &Tensor) -> Result<Vec<f64>, CnnError> {
        let run = |m: &CnnModel, x: &Tensor| match self.input {
            FusionInput::Probabilities => m.forward(x),
            FusionInput::Logits => m.logits(x),
        };
        let mut z = run(&self.emg_cnn, emg)?;
        z.extend(run(&self.vision_cnn, vision)?);
        Ok(z)
    }

    /// Perceptron logits for precomputed branch outputs.
    pub fn perceptron_logits(&self, z: &[f64]) -> Vec<f64> {
        let d = z.len();
        (0..self.class_count())
            .map(|j| self.bias[j] + self.weights[j * d..(j + 1) * d].iter().zip(z).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }

    pub fn forward(&self, emg: &Tensor, vision: &Tensor) -> Result<Vec<f64>, CnnError> {
        Ok(softmax(&self.perceptron_logits(&self.branch_outputs(emg, vision)?)))
    }

    pub fn to_container(&self) -> Container {
        let mut blobs: Vec<Vec<f64>> = self.emg_cnn.blobs().into_iter().cloned().collect();
        blobs.extend(self.vision_cnn.blobs().into_iter().cloned());
        blobs.push(self.weights.clone());
        blobs.push(self.bias.clone());
        Container {
            descriptor: json!({
                "kind": "fusion",
                "input": self.input,
                "emg": self.emg_cnn.architecture(),
                "vision": self.vision_cnn.architecture(),
            }),
            blobs,
        }
    }

    pub fn from_container(container: Container) -> Result<Self, CnnError> {
        if container.kind() != Some("fusion") {
            return Err(CnnError::Format(format!("expected a fusion descriptor, found {:?}", container.kind())));
        }
        let field = |key: &str| container.descriptor.get(key).cloned().unwrap_or_default();
        let parse_err = |e: serde_json::Error| CnnError::Format(format!("fusion descriptor: {e}"));
        let emg: Architecture = serde_json::from_value(field("emg")).map_err(parse_err)?;
        let vision: Architecture = serde_json::from_value(field("vision")).map_err(parse_err)?;
        let input: FusionInput = serde_json::from_value(field("input")).map_err(parse_err)?;
        let n_emg = 2 * emg.layers.iter().filter(|l| l.has_parameters()).count();
        let n_vis = 2 * vision.layers.iter().filter(|l| l.has_parameters()).count();
        let mut blobs = container.blobs;
        if blobs.len() != n_emg + n_vis + 2 {
            return Err(CnnError::Format(format!(
                "fusion container holds {} blobs, expected {}",
                blobs.len(),
                n_emg + n_vis + 2
            )));
        }
        let bias = blobs.pop().expect("checked length");
        let weights = blobs.pop().expect("checked length");
        let vision_blobs = blobs.split_off(n_emg);
        FusionModel::new(
            CnnModel::from_parameters(emg, blobs)?,
            CnnModel::from_parameters(vision, vision_blobs)?,
            weights,
            bias,
            input,
        )
    }
}

/// Class probabilities of the fused model.
pub fn fusion_forward(model: &FusionModel, emg: &Tensor, vision: &Tensor) -> Result<Vec<f64>, CnnError> {
    model.forward(emg, vision)
}

/// Step one trains the EMG network (seed `seed`) and the vision network
/// (seed `seed + 1`) independently. Step two freezes both and fits only the
/// perceptron weights and bias with Adadelta on softmax cross-entropy.
pub fn train_two_step(
    data: &[(Tensor, Tensor, usize)],
    config: &FusionTrainConfig,
    seed: u64,
) -> Result<FusionModel, FusionError> {
    if data.is_empty() {
        return Err(FusionError::EmptyDataset);
    }
    if config.fusion_batch_size == 0 {
        return Err(FusionError::InvalidParameter("fusion batch size must be positive".into()));
    }
    let emg_set: Vec<(Tensor, usize)> = data.iter().map(|(e, _, y)| (e.clone(), *y)).collect();
    let vis_set: Vec<(Tensor, usize)> = data.iter().map(|(_, v, y)| (v.clone(), *y)).collect();

    let mut emg_net = emg_cnn(seed)?;
    train(&mut emg_net, &emg_set, &TrainConfig { seed, ..config.cnn })?;
    let mut vis_net = vision_lenet(seed.wrapping_add(1))?;
    train(
        &mut vis_net,
        &vis_set,
        &TrainConfig {
            seed: seed.wrapping_add(1),
            ..config.cnn
        },
    )?;
    drop((emg_set, vis_set));

    let k = emg_net.class_count();
    let d = 2 * k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let limit = (6.0 / d as f64).sqrt();
    let weights = (0..k * d).map(|_| rng.random_range(-limit..limit)).collect();
    let mut model = FusionModel::new(emg_net, vis_net, weights, vec![0.0; k], config.input)?;

    let inputs = data
        .iter()
        .map(|(e, v, _)| model.branch_outputs(e, v))
        .collect::<Result<Vec<_>, _>>()?;
    let mut state = AdadeltaState::new(config.optimizer, &[k * d, k])?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..config.fusion_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.fusion_batch_size) {
            let mut gw = vec![0.0; k * d];
            let mut gb = vec![0.0; k];
            for &i in batch {
                let z = &inputs[i];
                let mut g = softmax(&model.perceptron_logits(z));
                g[data[i].2] -= 1.0;
                for j in 0..k {
                    gb[j] += g[j];
                    for (w, x) in gw[j * d..(j + 1) * d].iter_mut().zip(z) {
                        *w += g[j] * x;
                    }
                }
            }
            let scale = 1.0 / batch.len() as f64;
            gw.iter_mut().chain(gb.iter_mut()).for_each(|v| *v *= scale);
            state.step(&mut [&mut model.weights, &mut model.bias], &[gw, gb])?;
        }
    }
    Ok(model)
}
