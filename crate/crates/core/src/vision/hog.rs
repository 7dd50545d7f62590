//! Histogram of oriented gradients over 60x60 patches.
//!
//! Fixed parameterisation: central-difference gradients with replicated
//! borders, 10x10-pixel cells (6x6 grid), 9 unsigned orientation bins of 20°
//! over [0°, 180°) with magnitude-weighted hard binning, 2x2-cell blocks at a
//! stride of one cell (5x5 blocks), each block L2-normalised as
//! `v / sqrt(|v|² + ε²)`. Output order: block row, block column, cell row,
//! cell column, bin. Length 5·5·2·2·9 = 900.

use super::{Patch, VisionError, PATCH_SIDE};

pub const CELL: usize = 10;
pub const BINS: usize = 9;
pub const CELLS_PER_SIDE: usize = PATCH_SIDE / CELL;
pub const BLOCKS_PER_SIDE: usize = CELLS_PER_SIDE - 1;
pub const HOG_LEN: usize = BLOCKS_PER_SIDE * BLOCKS_PER_SIDE * 4 * BINS;
pub const BLOCK_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct HogDescriptor {
    pub n: usize,
    pub values: Vec<f64>,
}

impl HogDescriptor {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

fn check_side(patch: &Patch) -> Result<(), VisionError> {
    if patch.side != PATCH_SIDE || patch.pixels.len() != PATCH_SIDE * PATCH_SIDE {
        return Err(VisionError::WrongPatchSize {
            expected: PATCH_SIDE,
            found: patch.side,
        });
    }
    Ok(())
}

/// Gradient `(gx, gy)` at a pixel: `I(x+1) - I(x-1)` along each axis with
/// border pixels replicated.
#[inline]
pub fn gradient(patch: &Patch, x: usize, y: usize) -> (f64, f64) {
    let last = patch.side - 1;
    let gx = patch.get((x + 1).min(last), y) - patch.get(x.saturating_sub(1), y);
    let gy = patch.get(x, (y + 1).min(last)) - patch.get(x, y.saturating_sub(1));
    (gx, gy)
}

/// Unsigned orientation bin of a gradient, 0..9.
#[inline]
pub fn orientation_bin(gx: f64, gy: f64) -> usize {
    let mut angle = gy.atan2(gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if angle >= 180.0 {
        angle -= 180.0;
    }
    ((angle / (180.0 / BINS as f64)) as usize).min(BINS - 1)
}

/// Unnormalised per-cell histograms, `[cell_row][cell_col][bin]` flattened.
pub fn cell_histograms(patch: &Patch) -> Result<Vec<f64>, VisionError> {
    check_side(patch)?;
    let mut hist = vec![0.0; CELLS_PER_SIDE * CELLS_PER_SIDE * BINS];
    for y in 0..PATCH_SIDE {
        for x in 0..PATCH_SIDE {
            let (gx, gy) = gradient(patch, x, y);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let cell = (y / CELL) * CELLS_PER_SIDE + x / CELL;
            hist[cell * BINS + orientation_bin(gx, gy)] += mag;
        }
    }
    Ok(hist)
}

pub fn hog(patch: &Patch) -> Result<HogDescriptor, VisionError> {
    let cells = cell_histograms(patch)?;
    let mut values = Vec::with_capacity(HOG_LEN);
    let mut block = [0.0; 4 * BINS];
    for by in 0..BLOCKS_PER_SIDE {
        for bx in 0..BLOCKS_PER_SIDE {
            let mut k = 0;
            for cy in by..by + 2 {
                for cx in bx..bx + 2 {
                    let cell = cy * CELLS_PER_SIDE + cx;
                    block[k..k + BINS].copy_from_slice(&cells[cell * BINS..(cell + 1) * BINS]);
                    k += BINS;
                }
            }
            let norm = (block.iter().map(|v| v * v).sum::<f64>() + BLOCK_EPSILON * BLOCK_EPSILON).sqrt();
            values.extend(block.iter().map(|v| v / norm));
        }
    }
    Ok(HogDescriptor { n: patch.n, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn patch_of(pixels: Vec<f64>) -> Patch {
        Patch { n: 0, side: PATCH_SIDE, pixels, source_center: (0, 0) }
    }

    #[test]
    fn constant_patch_is_all_zero() {
        let d = hog(&patch_of(vec![0.4; 3600])).unwrap();
        assert_eq!(d.dim(), 900);
        assert_eq!(HOG_LEN, 5 * 5 * 2 * 2 * 9);
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_size_rejected() {
        let p = Patch { n: 0, side: 30, pixels: vec![0.0; 900], source_center: (0, 0) };
        assert_eq!(hog(&p), Err(VisionError::WrongPatchSize { expected: 60, found: 30 }));
    }

    #[test]
    fn orientation_bins() {
        assert_eq!(orientation_bin(1.0, 0.0), 0);
        assert_eq!(orientation_bin(-1.0, 0.0), 0);
        assert_eq!(orientation_bin(-1.0, -0.0), 0);
        assert_eq!(orientation_bin(0.0, 1.0), 4);
        assert_eq!(orientation_bin(0.0, -1.0), 4);
        assert_eq!(orientation_bin(-1.0, 1e-12), 8);
    }

    /// Step edge at column 35: only cells in column 3 see gradient, all of it
    /// horizontal (bin 0).
    #[test]
    fn vertical_step_edge() {
        let px = (0..3600).map(|i| if i % 60 >= 35 { 1.0 } else { 0.0 }).collect();
        let cells = cell_histograms(&patch_of(px)).unwrap();
        for cy in 0..6 {
            for cx in 0..6 {
                let h = &cells[(cy * 6 + cx) * 9..(cy * 6 + cx + 1) * 9];
                if cx == 3 {
                    // columns 34 and 35 each see a difference of 1 per row
                    assert_eq!(h[0], 20.0);
                    assert!(h[1..].iter().all(|&v| v == 0.0));
                } else {
                    assert!(h.iter().all(|&v| v == 0.0));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn blocks_are_unit_or_zero(px in prop::collection::vec(0.0f64..1.0, 3600)) {
            let d = hog(&patch_of(px)).unwrap();
            prop_assert!(d.values.iter().all(|&v| v >= 0.0));
            for block in d.values.chunks(36) {
                let n: f64 = block.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(n <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn offset_invariance(px in prop::collection::vec(0.0f64..0.5, 3600), c in 0.0f64..0.5) {
            let a = hog(&patch_of(px.clone())).unwrap();
            let b = hog(&patch_of(px.iter().map(|v| v + c).collect())).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
