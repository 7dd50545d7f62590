use super::{GrayImage, VisionError};
use crate::sensor_io::{DvsEvent, SensorGeometry, SyncWindow};

/// Per-pixel event counts over one window, polarity ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct EventFrame {
    pub n: usize,
    pub width: usize,
    pub height: usize,
    /// Row-major, `counts[y * width + x]`.
    pub counts: Vec<u32>,
    /// Min-max normalised counts, once computed.
    pub gray: Option<Vec<f64>>,
}

impl EventFrame {
    pub fn count(&self, x: usize, y: usize) -> u32 {
        self.counts[y * self.width + x]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// The normalised frame as an image (raw counts normalised on the fly if
    /// `gray` is not filled yet).
    pub fn gray_image(&self) -> GrayImage {
        let data = match &self.gray {
            Some(g) => g.clone(),
            None => normalized(&self.counts),
        };
        GrayImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

pub fn accumulate_event_frame(window: &SyncWindow, geometry: SensorGeometry) -> Result<EventFrame, VisionError> {
    accumulate_events(window.n, &window.events, geometry)
}

pub fn accumulate_events(n: usize, events: &[DvsEvent], geometry: SensorGeometry) -> Result<EventFrame, VisionError> {
    let (width, height) = (usize::from(geometry.width), usize::from(geometry.height));
    let mut counts = vec![0u32; width * height];
    for e in events {
        if !geometry.contains(e.x.into(), e.y.into()) {
            return Err(VisionError::EventOutOfBounds {
                x: e.x,
                y: e.y,
                width: geometry.width,
                height: geometry.height,
            });
        }
        counts[usize::from(e.y) * width + usize::from(e.x)] += 1;
    }
    Ok(EventFrame {
        n,
        width,
        height,
        counts,
        gray: None,
    })
}

fn normalized(counts: &[u32]) -> Vec<f64> {
    let min = counts.iter().copied().min().unwrap_or(0);
    let max = counts.iter().copied().max().unwrap_or(0);
    if max == min {
        return vec![0.0; counts.len()];
    }
    let range = f64::from(max - min);
    counts.iter().map(|&c| f64::from(c - min) / range).collect()
}

/// Maps counts linearly so the minimum becomes 0 and the maximum 1. A
/// uniform frame (max = min) maps to all zeros.
pub fn minmax_normalize(frame: &EventFrame) -> EventFrame {
    EventFrame {
        gray: Some(normalized(&frame.counts)),
        ..frame.clone()
    }
}

/// Count centroid `(M10/M00, M01/M00)` rounded to the nearest pixel.
pub fn hand_center(frame: &EventFrame) -> Result<(usize, usize), VisionError> {
    let (mut m00, mut m10, mut m01) = (0u64, 0u64, 0u64);
    for y in 0..frame.height {
        for x in 0..frame.width {
            let c = u64::from(frame.count(x, y));
            m00 += c;
            m10 += c * x as u64;
            m01 += c * y as u64;
        }
    }
    if m00 == 0 {
        return Err(VisionError::EmptyFrame);
    }
    let cx = (m10 as f64 / m00 as f64).round() as usize;
    let cy = (m01 as f64 / m00 as f64).round() as usize;
    Ok((cx, cy))
}

/// [`hand_center`], falling back to the frame centre for empty frames.
pub fn locate_hand(frame: &EventFrame) -> (usize, usize) {
    hand_center(frame).unwrap_or((frame.width / 2, frame.height / 2))
}
