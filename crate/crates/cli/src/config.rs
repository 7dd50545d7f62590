use std::path::Path;

use anyhow::Context;
use gesture_fusion::classifier::TrainOptions;
use gesture_fusion::pipeline::PipelineConfig;
use serde::Deserialize;

/// Contents of `--config`: pipeline fields at the top level, training
/// settings under `train`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    #[serde(flatten)]
    pub pipeline: PipelineConfig,
    pub train: TrainOptions,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}
