//! Time-domain EMG features: per-channel MAV and RMS over a window,
//! concatenated as `[MAV(x_1..x_C), RMS(x_1..x_C)]`.
//!
//! No mean removal, filtering or window function is applied; samples enter
//! the formulas as raw amplitudes.

use crate::sensor_io::{EmgSlice, SyncWindow};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("window contains no EMG samples")]
    EmptyWindow,
    #[error("sample {index} has {found} channels, expected {expected}")]
    RaggedWindow { index: usize, expected: usize, found: usize },
}

/// Mean absolute value, `(1/N) Σ |x_i|`.
pub fn mav(samples: &[f64]) -> Result<f64, FeatureError> {
    if samples.is_empty() {
        return Err(FeatureError::EmptyWindow);
    }
    Ok(samples.iter().map(|x| x.abs()).sum::<f64>() / samples.len() as f64)
}

/// Root mean square, `sqrt((1/N) Σ x_i²)`.
pub fn rms(samples: &[f64]) -> Result<f64, FeatureError> {
    if samples.is_empty() {
        return Err(FeatureError::EmptyWindow);
    }
    Ok((samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmgFeatureVector {
    pub n: usize,
    /// MAV block (one entry per channel) followed by the RMS block.
    pub values: Vec<f64>,
}

impl EmgFeatureVector {
    pub fn channel_count(&self) -> usize {
        self.values.len() / 2
    }

    pub fn mav_block(&self) -> &[f64] {
        &self.values[..self.channel_count()]
    }

    pub fn rms_block(&self) -> &[f64] {
        &self.values[self.channel_count()..]
    }
}

pub fn emg_feature_vector(window: &SyncWindow) -> Result<EmgFeatureVector, FeatureError> {
    features_from_slice(window.n, &window.emg)
}

pub fn features_from_slice(n: usize, emg: &EmgSlice) -> Result<EmgFeatureVector, FeatureError> {
    let c = emg.channel_count;
    if emg.samples.is_empty() || c == 0 {
        return Err(FeatureError::EmptyWindow);
    }
    if let Some((index, row)) = emg.samples.iter().enumerate().find(|(_, r)| r.len() != c) {
        return Err(FeatureError::RaggedWindow {
            index,
            expected: c,
            found: row.len(),
        });
    }
    let mut values = vec![0.0; 2 * c];
    for ch in 0..c {
        let x = emg.channel(ch);
        values[ch] = mav(&x)?;
        values[c + ch] = rms(&x)?;
    }
    Ok(EmgFeatureVector { n, values })
}

/// Renders feature vectors as CSV rows `n,f0,...,f{2C-1}` with a header.
pub fn features_csv(vectors: &[EmgFeatureVector]) -> String {
    let width = vectors.first().map_or(16, |v| v.values.len());
    let mut out = String::from("n");
    for i in 0..width {
        out.push_str(&format!(",f{i}"));
    }
    out.push('\n');
    for v in vectors {
        out.push_str(&v.n.to_string());
        for x in &v.values {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    out
}
