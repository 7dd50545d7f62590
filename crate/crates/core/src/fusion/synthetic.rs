//! Paired synthetic data where each modality alone confuses one pair of
//! classes but the pair of modalities identifies every class.
//!
//! EMG vectors (16 values) carry a unit bump on one group of four dimensions;
//! classes 0 and 1 share group 0, classes 2, 3, 4 use groups 1, 2, 3.
//! Vision patches (60x60) hold a Gaussian blob in one quadrant; classes 3 and
//! 4 share the bottom-right quadrant. With no noise, a single modality can
//! reach at most 80% accuracy and the pair 100%.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{FusionError, WindowSample};
use crate::cnn::{EMG_INPUT_LEN, VISION_INPUT_SIDE};
use crate::vision::{hog, Patch};
use crate::CLASS_COUNT;

pub const MIN_PER_CLASS: usize = 20;

const EMG_GROUP: [usize; CLASS_COUNT] = [0, 0, 1, 2, 3];
const BLOB_CENTER: [(f64, f64); CLASS_COUNT] = [(15.0, 15.0), (45.0, 15.0), (15.0, 45.0), (45.0, 45.0), (45.0, 45.0)];
const BLOB_SIGMA: f64 = 6.0;
/// Nominal window length used for the synthetic timestamps.
const WINDOW_US: u64 = 200_000;

fn emg_mean(class: usize) -> Vec<f64> {
    let g = EMG_GROUP[class];
    (0..EMG_INPUT_LEN).map(|d| f64::from(u8::from(d / 4 == g))).collect()
}

fn blob(class: usize) -> Vec<f64> {
    let (cx, cy) = BLOB_CENTER[class];
    let s2 = 2.0 * BLOB_SIGMA * BLOB_SIGMA;
    (0..VISION_INPUT_SIDE * VISION_INPUT_SIDE)
        .map(|i| {
            let (x, y) = ((i % VISION_INPUT_SIDE) as f64, (i / VISION_INPUT_SIDE) as f64);
            (-((x - cx).powi(2) + (y - cy).powi(2)) / s2).exp()
        })
        .collect()
}

/// `n_per_class` samples of each class, ordered round-robin over the
/// classes. `noise` is the standard deviation of additive Gaussian noise on
/// both modalities.
pub fn make_complementary_synthetic(n_per_class: usize, noise: f64, seed: u64) -> Result<Vec<WindowSample>, FusionError> {
    if n_per_class < MIN_PER_CLASS {
        return Err(FusionError::InvalidParameter(format!(
            "need at least {MIN_PER_CLASS} samples per class, got {n_per_class}"
        )));
    }
    let bad_noise = || FusionError::InvalidParameter(format!("noise must be finite and non-negative, got {noise}"));
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(bad_noise());
    }
    let normal = Normal::new(0.0, noise).map_err(|_| bad_noise())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<Vec<f64>> = (0..CLASS_COUNT).map(emg_mean).collect();
    let blobs: Vec<Vec<f64>> = (0..CLASS_COUNT).map(blob).collect();
    let mut out = Vec::with_capacity(n_per_class * CLASS_COUNT);
    for i in 0..n_per_class {
        for class in 0..CLASS_COUNT {
            let n = i * CLASS_COUNT + class;
            let mut jitter = |v: &f64| if noise > 0.0 { v + normal.sample(&mut rng) } else { *v };
            let emg: Vec<f64> = means[class].iter().map(&mut jitter).collect();
            let pixels: Vec<f64> = blobs[class].iter().map(&mut jitter).collect();
            let patch = Patch {
                n,
                side: VISION_INPUT_SIDE,
                pixels,
                source_center: (VISION_INPUT_SIDE / 2, VISION_INPUT_SIDE / 2),
            };
            let descriptor = hog(&patch)?;
            out.push(WindowSample {
                n,
                t_start: n as u64 * WINDOW_US,
                t_end: (n as u64 + 1) * WINDOW_US,
                label: Some(class),
                emg: Some(emg),
                patch: Some(patch.pixels),
                hog: Some(descriptor.values),
            });
        }
    }
    Ok(out)
}
