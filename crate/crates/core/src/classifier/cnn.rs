use std::io::Write;

use rayon::prelude::*;
use serde_json::Value;

use super::{labels_of, ClassifierError, ClassifierFactory, GestureClassifier, Prediction, TrainOptions};
use crate::cnn::{emg_cnn, is_fgcn, train, vision_lenet, CnnModel, Container, Tensor, TrainConfig};
use crate::fusion::{train_two_step, FusionModel, FusionTrainConfig, Modality, WindowSample};
use crate::svm::argmax_lowest;

#[derive(Debug, Clone, PartialEq)]
pub enum CnnNetwork {
    Single(CnnModel),
    Fusion(FusionModel),
}

/// EMG or vision network for unimodal input, perceptron fusion of both for
/// fusion modalities.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnClassifier {
    modality: Modality,
    pub network: CnnNetwork,
}

impl CnnClassifier {
    pub fn new(modality: Modality, network: CnnNetwork) -> Self {
        CnnClassifier { modality, network }
    }

    fn probabilities(&self, sample: &WindowSample) -> Result<Vec<f64>, ClassifierError> {
        let m = self.modality;
        Ok(match &self.network {
            CnnNetwork::Fusion(f) => f.forward(&sample.emg_tensor(m)?, &sample.patch_tensor(m)?)?,
            CnnNetwork::Single(net) => {
                let x = if m.uses_emg() { sample.emg_tensor(m)? } else { sample.patch_tensor(m)? };
                net.forward(&x)?
            }
        })
    }
}

impl GestureClassifier for CnnClassifier {
    fn kind(&self) -> &'static str {
        "cnn"
    }

    fn modality(&self) -> Modality {
        self.modality
    }

    fn predict(&self, sample: &WindowSample) -> Result<Prediction, ClassifierError> {
        let scores = self.probabilities(sample)?;
        Ok(Prediction {
            label: argmax_lowest(&scores),
            scores,
        })
    }

    fn save(&self, w: &mut dyn Write) -> Result<(), ClassifierError> {
        let mut container = match &self.network {
            CnnNetwork::Single(net) => net.to_container(),
            CnnNetwork::Fusion(f) => f.to_container(),
        };
        container.descriptor["classifier"] = "cnn".into();
        container.descriptor["modality"] = self.modality.name().into();
        Ok(container.write(w)?)
    }
}

pub struct CnnFactory;

impl ClassifierFactory for CnnFactory {
    fn kind(&self) -> &'static str {
        "cnn"
    }

    fn train(
        &self,
        samples: &[WindowSample],
        modality: Modality,
        options: &TrainOptions,
        seed: u64,
    ) -> Result<Box<dyn GestureClassifier>, ClassifierError> {
        let labels = labels_of(samples)?;
        let network = if modality.is_fusion() {
            let data = samples
                .par_iter()
                .zip(&labels)
                .map(|(s, &y)| Ok((s.emg_tensor(modality)?, s.patch_tensor(modality)?, y)))
                .collect::<Result<Vec<_>, ClassifierError>>()?;
            let cfg = FusionTrainConfig {
                cnn: options.cnn,
                fusion_epochs: options.fusion_epochs,
                input: options.fusion_input,
                optimizer: options.cnn.optimizer,
                ..FusionTrainConfig::default()
            };
            CnnNetwork::Fusion(train_two_step(&data, &cfg, seed)?)
        } else {
            let tensor = |s: &WindowSample| -> Result<Tensor, ClassifierError> {
                Ok(if modality.uses_emg() { s.emg_tensor(modality)? } else { s.patch_tensor(modality)? })
            };
            let data = samples
                .par_iter()
                .zip(&labels)
                .map(|(s, &y)| Ok((tensor(s)?, y)))
                .collect::<Result<Vec<_>, ClassifierError>>()?;
            let mut net = if modality.uses_emg() { emg_cnn(seed)? } else { vision_lenet(seed)? };
            train(&mut net, &data, &TrainConfig { seed, ..options.cnn })?;
            CnnNetwork::Single(net)
        };
        Ok(Box::new(CnnClassifier::new(modality, network)))
    }

    fn sniff(&self, bytes: &[u8]) -> bool {
        is_fgcn(bytes)
    }

    fn load(&self, bytes: &[u8]) -> Result<Box<dyn GestureClassifier>, ClassifierError> {
        let container = Container::read(bytes)?;
        let modality: Modality = container
            .descriptor
            .get("modality")
            .and_then(Value::as_str)
            .ok_or_else(|| ClassifierError::Format("missing modality".into()))?
            .parse()?;
        let network = match container.kind() {
            Some("fusion") => CnnNetwork::Fusion(FusionModel::from_container(container)?),
            _ => CnnNetwork::Single(CnnModel::from_container(container)?),
        };
        if matches!(network, CnnNetwork::Fusion(_)) != modality.is_fusion() {
            return Err(ClassifierError::Format(format!("network layout does not fit modality {modality}")));
        }
        Ok(Box::new(CnnClassifier::new(modality, network)))
    }
}
