use rayon::prelude::*;

use super::{FusionError, Modality};
use crate::cnn::{Tensor, EMG_INPUT_LEN, VISION_INPUT_SIDE};
use crate::emg_features::{emg_feature_vector, EmgFeatureVector};
use crate::sensor_io::{slice_window, window_bounds, SensorGeometry, Session, SyncWindow, WindowLength};
use crate::vision::{hog, window_patch, HogDescriptor, Patch};

/// Model-ready inputs of one window. Which parts are present depends on the
/// modality the sample was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub n: usize,
    pub t_start: u64,
    pub t_end: u64,
    /// Class index, when the window is annotated.
    pub label: Option<usize>,
    /// MAV block then RMS block.
    pub emg: Option<Vec<f64>>,
    /// 60x60 row-major patch in [0, 1].
    pub patch: Option<Vec<f64>>,
    pub hog: Option<Vec<f64>>,
}

/// EMG block followed by the HOG block; both must come from window `n`.
pub fn concat_features(emg: &EmgFeatureVector, vision: &HogDescriptor) -> Result<Vec<f64>, FusionError> {
    if emg.n != vision.n {
        return Err(FusionError::WindowIndexMismatch {
            emg: emg.n,
            vision: vision.n,
        });
    }
    Ok(emg.values.iter().chain(&vision.values).copied().collect())
}

impl WindowSample {
    fn part<'a>(&self, part: &'a Option<Vec<f64>>, modality: Modality, what: &'static str) -> Result<&'a [f64], FusionError> {
        part.as_deref().ok_or(FusionError::MissingInput { modality, what })
    }

    /// Flat feature vector for SVMs: EMG features, HOG, or their concatenation.
    pub fn svm_features(&self, modality: Modality) -> Result<Vec<f64>, FusionError> {
        let mut out = Vec::new();
        if modality.uses_emg() {
            out.extend_from_slice(self.part(&self.emg, modality, "EMG features")?);
        }
        if modality.vision_source().is_some() {
            out.extend_from_slice(self.part(&self.hog, modality, "a HOG descriptor")?);
        }
        Ok(out)
    }

    /// EMG features as a 1x16 signal.
    pub fn emg_tensor(&self, modality: Modality) -> Result<Tensor, FusionError> {
        let v = self.part(&self.emg, modality, "EMG features")?;
        Ok(Tensor::new(vec![1, EMG_INPUT_LEN], v.to_vec())?)
    }

    /// The patch as a 1x60x60 image.
    pub fn patch_tensor(&self, modality: Modality) -> Result<Tensor, FusionError> {
        let v = self.part(&self.patch, modality, "an image patch")?;
        Ok(Tensor::new(vec![1, VISION_INPUT_SIDE, VISION_INPUT_SIDE], v.to_vec())?)
    }
}

/// Builds the model inputs for one window. The same function serves offline
/// evaluation and live replay.
pub fn sample_from_window(
    window: &SyncWindow,
    geometry: SensorGeometry,
    modality: Modality,
) -> Result<WindowSample, FusionError> {
    let emg = if modality.uses_emg() {
        Some(emg_feature_vector(window)?)
    } else {
        None
    };
    let (patch, descriptor) = match modality.vision_source() {
        Some(source) => {
            let patch: Patch = window_patch(window, geometry, source)?;
            let d = hog(&patch)?;
            (Some(patch.pixels), Some(d))
        }
        None => (None, None),
    };
    if let (Some(e), Some(d)) = (&emg, &descriptor) {
        concat_features(e, d)?;
    }
    Ok(WindowSample {
        n: window.n,
        t_start: window.t_start,
        t_end: window.t_end,
        label: window.label.map(|g| g.index()),
        emg: emg.map(|e| e.values),
        patch,
        hog: descriptor.map(|d| d.values),
    })
}

/// Samples for every annotated window of a session, in window order.
pub fn build_samples(session: &Session, modality: Modality, length: WindowLength) -> Result<Vec<WindowSample>, FusionError> {
    window_bounds(&session.manifest.annotations, length)
        .par_iter()
        .map(|b| sample_from_window(&slice_window(session, b), session.geometry, modality))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emg(n: usize, v: f64) -> EmgFeatureVector {
        EmgFeatureVector { n, values: vec![v; 16] }
    }

    fn hog_of(n: usize, v: f64) -> HogDescriptor {
        HogDescriptor { n, values: vec![v; 900] }
    }

    #[test]
    fn concatenation_layout() {
        let f = concat_features(&emg(3, 1.0), &hog_of(3, 2.0)).unwrap();
        assert_eq!(f.len(), 916);
        assert!(f[..16].iter().all(|v| *v == 1.0));
        assert!(f[16..].iter().all(|v| *v == 2.0));
        let z = concat_features(&emg(0, 0.0), &hog_of(0, 0.0)).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
        assert_eq!(
            concat_features(&emg(1, 0.0), &hog_of(2, 0.0)),
            Err(FusionError::WindowIndexMismatch { emg: 1, vision: 2 })
        );
    }

    #[test]
    fn missing_parts_are_reported() {
        let s = WindowSample {
            n: 0,
            t_start: 0,
            t_end: 1,
            label: None,
            emg: Some(vec![0.0; 16]),
            patch: None,
            hog: None,
        };
        assert_eq!(s.svm_features(Modality::Emg).unwrap().len(), 16);
        assert!(matches!(s.svm_features(Modality::FusDvs), Err(FusionError::MissingInput { .. })));
        assert!(s.emg_tensor(Modality::Emg).is_ok());
        assert!(s.patch_tensor(Modality::Dvs).is_err());
    }
}
