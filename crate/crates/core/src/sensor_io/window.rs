//! Fixed-length, non-overlapping windows tiled from each annotated gesture
//! interval. A trailing remainder shorter than the window is discarded and
//! rest periods between annotations produce no windows.

use super::{ApsFrame, DvsEvent, EmgRecording, SensorError, Session};
use crate::gesture::Gesture;

/// Window length in microseconds; always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowLength(u64);

impl WindowLength {
    pub fn from_ms(ms: u64) -> Result<Self, SensorError> {
        if ms == 0 {
            return Err(SensorError::InvalidWindow(ms));
        }
        Ok(WindowLength(ms * 1000))
    }

    pub fn as_us(self) -> u64 {
        self.0
    }

    pub fn as_ms(self) -> u64 {
        self.0 / 1000
    }
}

/// Time span and label of one window, without its data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowBounds {
    /// Session-wide running window index.
    pub n: usize,
    /// Index of the window within its gesture interval.
    pub position: usize,
    pub t_start: u64,
    pub t_end: u64,
    pub label: Option<Gesture>,
}

/// Tiles every annotation from its start. Annotations are expected sorted.
pub fn window_bounds(annotations: &[super::Annotation], length: WindowLength) -> Vec<WindowBounds> {
    let mut out = Vec::new();
    for a in annotations {
        out.extend(tile_bounds(a.start_us, a.end_us, length, out.len(), Some(a.label)));
    }
    out
}

/// Tiles `[start, end)` with whole windows, numbering from `first_n`.
pub fn tile_bounds(
    start: u64,
    end: u64,
    length: WindowLength,
    first_n: usize,
    label: Option<Gesture>,
) -> Vec<WindowBounds> {
    let len = length.as_us();
    let count = end.saturating_sub(start) / len;
    (0..count as usize)
        .map(|k| {
            let t_start = start + k as u64 * len;
            WindowBounds {
                n: first_n + k,
                position: k,
                t_start,
                t_end: t_start + len,
                label,
            }
        })
        .collect()
}

/// EMG samples belonging to one window.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmgSlice {
    pub channel_count: usize,
    pub timestamps: Vec<u64>,
    pub samples: Vec<Vec<f64>>,
}

impl EmgSlice {
    pub fn from_recording(rec: &EmgRecording, start: u64, end: u64) -> EmgSlice {
        let range = rec.index_range(start, end);
        EmgSlice {
            channel_count: rec.channel_count,
            timestamps: rec.timestamps[range.clone()].to_vec(),
            samples: rec.samples[range].to_vec(),
        }
    }

    /// Samples of one channel in time order.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        self.samples.iter().filter_map(|row| row.get(c).copied()).collect()
    }
}

/// One window of synchronized sensor data.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncWindow {
    pub n: usize,
    pub position: usize,
    pub t_start: u64,
    pub t_end: u64,
    pub emg: EmgSlice,
    pub events: Vec<DvsEvent>,
    pub aps_frames: Vec<ApsFrame>,
    pub label: Option<Gesture>,
}

impl SyncWindow {
    pub fn bounds(&self) -> WindowBounds {
        WindowBounds {
            n: self.n,
            position: self.position,
            t_start: self.t_start,
            t_end: self.t_end,
            label: self.label,
        }
    }
}

/// Events with `start <= t < end`; `events` must be time-ordered.
pub fn slice_events(events: &[DvsEvent], start: u64, end: u64) -> &[DvsEvent] {
    let lo = events.partition_point(|e| e.t < start);
    let hi = events.partition_point(|e| e.t < end).max(lo);
    &events[lo..hi]
}

pub fn slice_aps(frames: &[ApsFrame], start: u64, end: u64) -> &[ApsFrame] {
    let lo = frames.partition_point(|f| f.t < start);
    let hi = frames.partition_point(|f| f.t < end).max(lo);
    &frames[lo..hi]
}

pub fn slice_window(session: &Session, b: &WindowBounds) -> SyncWindow {
    SyncWindow {
        n: b.n,
        position: b.position,
        t_start: b.t_start,
        t_end: b.t_end,
        emg: EmgSlice::from_recording(&session.emg, b.t_start, b.t_end),
        events: slice_events(&session.events, b.t_start, b.t_end).to_vec(),
        aps_frames: slice_aps(&session.aps, b.t_start, b.t_end).to_vec(),
        label: b.label,
    }
}

pub fn window_slices(session: &Session, length: WindowLength) -> Vec<SyncWindow> {
    window_bounds(&session.manifest.annotations, length)
        .iter()
        .map(|b| slice_window(session, b))
        .collect()
}
