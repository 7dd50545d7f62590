//! Event-camera streams, EMG recordings, session manifests and the
//! synchronized windows every later stage consumes.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub mod aedat;
pub mod emg_csv;
pub mod session;
pub mod synthetic;
pub mod window;

pub use aedat::{encode_aedat, parse_aedat, read_aedat_file, write_aedat, AedatReader};
pub use emg_csv::{parse_emg_csv, read_emg_csv, write_emg_csv, EmgRecording, MYO_SAMPLE_RATE_HZ};
pub use session::{load_session, Annotation, ApsFrame, Session, SessionManifest};
pub use window::{
    slice_aps, slice_events, slice_window, tile_bounds, window_bounds, window_slices, EmgSlice, SyncWindow, WindowBounds,
    WindowLength,
};

#[derive(Debug, thiserror::Error)]
pub enum SensorError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated event record: {trailing} trailing byte(s) after {events} complete events")]
    TruncatedEvent { events: u64, trailing: usize },
    #[error("event coordinate ({x}, {y}) outside {width}x{height} sensor")]
    CoordinateOutOfRange { x: u32, y: u32, width: u16, height: u16 },
    #[error("timestamp went backwards at record {index}: {previous} -> {current}")]
    NonMonotonicTime { index: u64, previous: u64, current: u64 },
    #[error("timestamp {t} at event {index} cannot be represented in a 32-bit AEDAT stream")]
    UnrepresentableTimestamp { index: usize, t: u64 },
    #[error("line {line}: expected {expected} columns, found {found}")]
    RaggedRow { line: u64, expected: usize, found: usize },
    #[error("line {line}: cannot parse `{value}` as a number")]
    InvalidNumber { line: u64, value: String },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("annotations overlap: [{0}, {1}) and [{2}, {3})")]
    OverlappingAnnotations(u64, u64, u64, u64),
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error("invalid window length: {0} ms")]
    InvalidWindow(u64),
    #[error("invalid image: {0}")]
    Image(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Off,
    On,
}

/// One address-event: pixel column/row, session-relative microsecond timestamp
/// and polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DvsEvent {
    pub x: u16,
    pub y: u16,
    pub t: u64,
    pub polarity: Polarity,
}

impl DvsEvent {
    pub fn new(x: u16, y: u16, t: u64, polarity: Polarity) -> Self {
        DvsEvent { x, y, t, polarity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SensorKind {
    #[serde(rename = "DVS128")]
    Dvs128,
    #[serde(rename = "DAVIS240")]
    Davis240,
}

impl SensorKind {
    pub fn chip_name(self) -> &'static str {
        match self {
            SensorKind::Dvs128 => "DVS128",
            SensorKind::Davis240 => "DAVIS240",
        }
    }

    pub fn from_chip_name(name: &str) -> Option<SensorKind> {
        match name.trim() {
            "DVS128" => Some(SensorKind::Dvs128),
            "DAVIS240" => Some(SensorKind::Davis240),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub width: u16,
    pub height: u16,
    pub kind: SensorKind,
}

impl SensorGeometry {
    pub const DVS128: SensorGeometry = SensorGeometry {
        width: 128,
        height: 128,
        kind: SensorKind::Dvs128,
    };
    pub const DAVIS240: SensorGeometry = SensorGeometry {
        width: 240,
        height: 180,
        kind: SensorKind::Davis240,
    };

    pub fn for_kind(kind: SensorKind) -> SensorGeometry {
        match kind {
            SensorKind::Dvs128 => Self::DVS128,
            SensorKind::Davis240 => Self::DAVIS240,
        }
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < u32::from(self.width) && y < u32::from(self.height)
    }

    pub fn pixel_count(&self) -> usize {
        usize::from(self.width) * usize::from(self.height)
    }
}
