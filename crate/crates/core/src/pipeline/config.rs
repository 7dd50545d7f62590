use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::fusion::Modality;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReplaySpeed {
    /// Each window is released when its end timestamp is reached.
    #[default]
    Realtime,
    /// No pacing.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropPolicy {
    /// Producers never wait: a full queue discards its oldest window, and
    /// windows whose partner batch does not arrive within 2·T are dropped.
    #[default]
    KeepLatest,
    /// Producers block on a full queue and nothing is dropped.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub window_ms: u64,
    pub modality: Modality,
    pub model_path: Option<PathBuf>,
    pub speed: ReplaySpeed,
    pub queue_capacity: usize,
    pub drop_policy: DropPolicy,
    /// Extra time spent per window in the processing role (testing aid).
    pub processing_delay_ms: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_ms: 200,
            modality: Modality::FusDvs,
            model_path: None,
            speed: ReplaySpeed::Realtime,
            queue_capacity: 8,
            drop_policy: DropPolicy::KeepLatest,
            processing_delay_ms: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.window_ms == 0 {
            return Err(PipelineError::InvalidConfig("window length must be positive".into()));
        }
        if self.queue_capacity == 0 {
            return Err(PipelineError::InvalidConfig("queue capacity must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_and_names() {
        let c: PipelineConfig = serde_json::from_str(r#"{"window_ms": 150, "drop_policy": "none", "speed": "max"}"#).unwrap();
        assert_eq!(c.window_ms, 150);
        assert_eq!(c.queue_capacity, 8);
        assert_eq!(c.drop_policy, DropPolicy::None);
        assert_eq!(c.speed, ReplaySpeed::Max);
        let v = serde_json::to_value(PipelineConfig::default()).unwrap();
        assert_eq!(v["drop_policy"], "keep-latest");
        assert_eq!(v["modality"], "FUS-DVS");
    }

    #[test]
    fn validation() {
        assert!(PipelineConfig::default().validate().is_ok());
        let zero = PipelineConfig {
            window_ms: 0,
            ..PipelineConfig::default()
        };
        assert!(zero.validate().is_err());
        let q = PipelineConfig {
            queue_capacity: 0,
            ..PipelineConfig::default()
        };
        assert!(q.validate().is_err());
    }
}
