//! Visual features: event-count frames, hand localisation, fixed-size
//! patches around the hand and HOG descriptors of those patches.

use serde::{Deserialize, Serialize};

use crate::sensor_io::{SensorGeometry, SensorKind, SyncWindow};

pub mod frame;
pub mod hog;
pub mod patch;

pub use frame::{accumulate_event_frame, accumulate_events, hand_center, locate_hand, minmax_normalize, EventFrame};
pub use hog::{cell_histograms, hog, HogDescriptor, HOG_LEN};
pub use patch::{average_aps, extract_patch, subsample, Patch};

/// Side of the patches fed to HOG and the vision CNN.
pub const PATCH_SIDE: usize = 60;
/// Side of the patch cut from DAVIS-resolution images before 2x2 subsampling.
pub const DAVIS_PATCH_SIDE: usize = 120;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VisionError {
    #[error("frame has no events")]
    EmptyFrame,
    #[error("patch side {side} exceeds {width}x{height} frame")]
    PatchLargerThanFrame { side: usize, width: usize, height: usize },
    #[error("expected a {expected}x{expected} patch, got {found}x{found}")]
    WrongPatchSize { expected: usize, found: usize },
    #[error("window contains no APS frames")]
    NoApsFrames,
    #[error("image dimensions disagree: {0}")]
    DimensionMismatch(String),
    #[error("event ({x}, {y}) outside {width}x{height} sensor")]
    EventOutOfBounds { x: u16, y: u16, width: u16, height: u16 },
    #[error("{requested:?} patches need a {needed:?} sensor, session has {found:?}")]
    WrongSensor { requested: VisionSource, needed: SensorKind, found: SensorKind },
}

/// Row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, VisionError> {
        if data.len() != width * height {
            return Err(VisionError::DimensionMismatch(format!(
                "{} values for {width}x{height}",
                data.len()
            )));
        }
        Ok(GrayImage { width, height, data })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Which image the vision feature is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VisionSource {
    /// Event frames of the 128x128 DVS.
    Dvs,
    /// Event frames of the 240x180 DAVIS.
    Dav,
    /// Averaged DAVIS APS frames, localised with the DAVIS event frame.
    Frm,
}

/// Produces the 60x60 patch for one window.
///
/// DVS frames are cut directly at 60x60; DAVIS event and APS images are cut
/// at 120x120 around the hand found in the DAVIS event frame and reduced by
/// 2x2 block averaging.
pub fn window_patch(window: &SyncWindow, geometry: SensorGeometry, source: VisionSource) -> Result<Patch, VisionError> {
    let needed = match source {
        VisionSource::Dvs => SensorKind::Dvs128,
        VisionSource::Dav | VisionSource::Frm => SensorKind::Davis240,
    };
    if geometry.kind != needed {
        return Err(VisionError::WrongSensor {
            requested: source,
            needed,
            found: geometry.kind,
        });
    }
    let frame = minmax_normalize(&accumulate_event_frame(window, geometry)?);
    let center = locate_hand(&frame);
    match source {
        VisionSource::Dvs => extract_patch(&frame.gray_image(), window.n, center, PATCH_SIDE),
        VisionSource::Dav => subsample(&extract_patch(&frame.gray_image(), window.n, center, DAVIS_PATCH_SIDE)?),
        VisionSource::Frm => {
            let aps = average_aps(window)?;
            if (aps.width, aps.height) != (frame.width, frame.height) {
                return Err(VisionError::DimensionMismatch(format!(
                    "APS {}x{} vs events {}x{}",
                    aps.width, aps.height, frame.width, frame.height
                )));
            }
            subsample(&extract_patch(&aps, window.n, center, DAVIS_PATCH_SIDE)?)
        }
    }
}
