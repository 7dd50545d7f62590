use super::{GrayImage, VisionError, DAVIS_PATCH_SIDE, PATCH_SIDE};
use crate::sensor_io::SyncWindow;

/// Square crop of a frame around the detected hand.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub n: usize,
    pub side: usize,
    /// Row-major, `side * side` values in [0,1].
    pub pixels: Vec<f64>,
    /// Requested centre in source-frame coordinates.
    pub source_center: (usize, usize),
}

impl Patch {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.side + x]
    }
}

/// Top-left corner of a `side`-long span centred at `center`, shifted to lie
/// inside `[0, extent)`.
fn clamped_origin(center: usize, side: usize, extent: usize) -> usize {
    let start = center as i64 - (side / 2) as i64;
    start.clamp(0, (extent - side) as i64) as usize
}

/// Crops a `side x side` window centred at `center`. Near the border the
/// window is translated to fit rather than padded.
pub fn extract_patch(image: &GrayImage, n: usize, center: (usize, usize), side: usize) -> Result<Patch, VisionError> {
    if side == 0 || side > image.width || side > image.height {
        return Err(VisionError::PatchLargerThanFrame {
            side,
            width: image.width,
            height: image.height,
        });
    }
    let x0 = clamped_origin(center.0, side, image.width);
    let y0 = clamped_origin(center.1, side, image.height);
    let mut pixels = Vec::with_capacity(side * side);
    for y in y0..y0 + side {
        let row = y * image.width;
        pixels.extend_from_slice(&image.data[row + x0..row + x0 + side]);
    }
    Ok(Patch {
        n,
        side,
        pixels,
        source_center: center,
    })
}

/// Reduces a 120x120 patch to 60x60 by averaging each 2x2 block.
pub fn subsample(patch: &Patch) -> Result<Patch, VisionError> {
    if patch.side != DAVIS_PATCH_SIDE {
        return Err(VisionError::WrongPatchSize {
            expected: DAVIS_PATCH_SIDE,
            found: patch.side,
        });
    }
    let side = PATCH_SIDE;
    let mut pixels = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let s = patch.get(2 * x, 2 * y)
                + patch.get(2 * x + 1, 2 * y)
                + patch.get(2 * x, 2 * y + 1)
                + patch.get(2 * x + 1, 2 * y + 1);
            pixels.push(s / 4.0);
        }
    }
    Ok(Patch {
        n: patch.n,
        side,
        pixels,
        source_center: patch.source_center,
    })
}

/// Per-pixel mean of the APS frames captured during the window.
pub fn average_aps(window: &SyncWindow) -> Result<GrayImage, VisionError> {
    let first = window.aps_frames.first().ok_or(VisionError::NoApsFrames)?;
    let (w, h) = (first.width, first.height);
    let mut sum = vec![0.0; w * h];
    for f in &window.aps_frames {
        if (f.width, f.height) != (w, h) || f.pixels.len() != w * h {
            return Err(VisionError::DimensionMismatch(format!(
                "APS frame {}x{} in a {w}x{h} window",
                f.width, f.height
            )));
        }
        for (acc, p) in sum.iter_mut().zip(&f.pixels) {
            *acc += p;
        }
    }
    let k = window.aps_frames.len() as f64;
    GrayImage::new(w, h, sum.into_iter().map(|s| s / k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor_io::{ApsFrame, EmgSlice};
    use proptest::prelude::*;

    fn ramp(width: usize, height: usize) -> GrayImage {
        let data = (0..width * height).map(|i| i as f64).collect();
        GrayImage::new(width, height, data).unwrap()
    }

    #[test]
    fn centred_patch_rows_and_cols() {
        let img = ramp(128, 128);
        let p = extract_patch(&img, 0, (64, 64), 60).unwrap();
        assert_eq!(p.pixels.len(), 3600);
        // rows 34..=93, cols 34..=93
        assert_eq!(p.get(0, 0), (34 * 128 + 34) as f64);
        assert_eq!(p.get(59, 59), (93 * 128 + 93) as f64);
    }

    #[test]
    fn corner_patch_is_clamped() {
        let img = ramp(128, 128);
        let p = extract_patch(&img, 0, (0, 0), 60).unwrap();
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(59, 59), (59 * 128 + 59) as f64);
        let p = extract_patch(&img, 0, (127, 127), 60).unwrap();
        assert_eq!(p.get(59, 59), (127 * 128 + 127) as f64);
        assert_eq!(p.source_center, (127, 127));
    }

    #[test]
    fn oversized_patch() {
        let img = ramp(128, 128);
        assert!(matches!(
            extract_patch(&img, 0, (64, 64), 200),
            Err(VisionError::PatchLargerThanFrame { side: 200, .. })
        ));
        // DAVIS frames are 180 tall, so a 120 patch fits and a 181 patch does not
        let davis = ramp(240, 180);
        assert!(extract_patch(&davis, 0, (120, 90), 120).is_ok());
        assert!(extract_patch(&davis, 0, (120, 90), 181).is_err());
    }

    fn patch_of(side: usize, pixels: Vec<f64>) -> Patch {
        Patch { n: 0, side, pixels, source_center: (0, 0) }
    }

    #[test]
    fn subsample_cases() {
        let p = subsample(&patch_of(120, vec![0.7; 14400])).unwrap();
        assert_eq!(p.side, 60);
        assert!(p.pixels.iter().all(|&v| (v - 0.7).abs() < 1e-15));

        let mut px = vec![0.0; 14400];
        px[120] = 1.0;
        px[121] = 1.0; // second row of the first 2x2 block
        let p = subsample(&patch_of(120, px)).unwrap();
        assert_eq!(p.pixels[0], 0.5);

        assert_eq!(
            subsample(&patch_of(60, vec![0.0; 3600])),
            Err(VisionError::WrongPatchSize { expected: 120, found: 60 })
        );
    }

    fn window_with(frames: Vec<ApsFrame>) -> SyncWindow {
        SyncWindow {
            n: 0,
            position: 0,
            t_start: 0,
            t_end: 200_000,
            emg: EmgSlice::default(),
            events: vec![],
            aps_frames: frames,
            label: None,
        }
    }

    fn aps(t: u64, v: f64) -> ApsFrame {
        ApsFrame { width: 4, height: 3, t, pixels: vec![v; 12] }
    }

    #[test]
    fn aps_average_cases() {
        assert_eq!(average_aps(&window_with(vec![])), Err(VisionError::NoApsFrames));
        let one = average_aps(&window_with(vec![aps(0, 0.3)])).unwrap();
        assert_eq!(one.data, vec![0.3; 12]);
        let two = average_aps(&window_with(vec![aps(0, 0.0), aps(1, 1.0)])).unwrap();
        assert_eq!(two.data, vec![0.5; 12]);
        let mut bad = aps(2, 0.0);
        bad.width = 3;
        assert!(average_aps(&window_with(vec![aps(0, 0.0), bad])).is_err());
    }

    proptest! {
        #[test]
        fn subsample_preserves_mean(px in prop::collection::vec(0.0f64..1.0, 14400)) {
            let before = px.iter().sum::<f64>() / 14400.0;
            let p = subsample(&patch_of(120, px)).unwrap();
            let after = p.pixels.iter().sum::<f64>() / 3600.0;
            prop_assert!((before - after).abs() < 1e-12);
        }

        #[test]
        fn patch_reads_stay_in_bounds(cx in 0usize..400, cy in 0usize..400, side in 1usize..128) {
            let img = ramp(128, 128);
            let p = extract_patch(&img, 0, (cx, cy), side).unwrap();
            prop_assert_eq!(p.pixels.len(), side * side);
            prop_assert!(p.pixels.iter().all(|&v| v >= 0.0 && v < (128 * 128) as f64));
        }
    }
}
