//! EMG recordings in the canonical CSV import format:
//! header `t_us,ch0,...,chN`, integer microsecond timestamps, raw amplitudes.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::SensorError;

/// Myo armband sampling rate, used when a recording is too short to infer one.
pub const MYO_SAMPLE_RATE_HZ: f64 = 200.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EmgRecording {
    pub sample_rate: f64,
    pub channel_count: usize,
    /// Session-relative timestamp of the first sample (µs).
    pub t0: u64,
    pub timestamps: Vec<u64>,
    /// One vector of `channel_count` raw amplitudes per timestep.
    pub samples: Vec<Vec<f64>>,
}

impl EmgRecording {
    /// Builds a recording, inferring `t0` and the sample rate from the timestamps.
    pub fn new(channel_count: usize, timestamps: Vec<u64>, samples: Vec<Vec<f64>>) -> Self {
        let t0 = timestamps.first().copied().unwrap_or(0);
        let sample_rate = infer_sample_rate(&timestamps);
        EmgRecording {
            sample_rate,
            channel_count,
            t0,
            timestamps,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index range of samples with `start <= t < end`.
    pub fn index_range(&self, start: u64, end: u64) -> std::ops::Range<usize> {
        let lo = self.timestamps.partition_point(|&t| t < start);
        let hi = self.timestamps.partition_point(|&t| t < end);
        lo..hi.max(lo)
    }
}

fn infer_sample_rate(timestamps: &[u64]) -> f64 {
    match (timestamps.first(), timestamps.last()) {
        (Some(&a), Some(&b)) if b > a => (timestamps.len() - 1) as f64 * 1e6 / (b - a) as f64,
        _ => MYO_SAMPLE_RATE_HZ,
    }
}

pub fn read_emg_csv(path: &Path) -> Result<EmgRecording, SensorError> {
    if !path.exists() {
        return Err(SensorError::MissingFile(path.to_path_buf()));
    }
    parse_emg_csv(File::open(path)?)
}

pub fn parse_emg_csv<R: Read>(source: R) -> Result<EmgRecording, SensorError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("t_us") || headers.len() < 2 {
        return Err(SensorError::MalformedHeader(
            "EMG CSV header must be `t_us,ch0,...`".into(),
        ));
    }
    for (i, name) in headers.iter().skip(1).enumerate() {
        if name != format!("ch{i}") {
            return Err(SensorError::MalformedHeader(format!(
                "expected column `ch{i}`, found `{name}`"
            )));
        }
    }
    let channel_count = headers.len() - 1;

    let mut timestamps = Vec::new();
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != channel_count + 1 {
            return Err(SensorError::RaggedRow {
                line,
                expected: channel_count + 1,
                found: record.len(),
            });
        }
        let t: u64 = record[0].parse().map_err(|_| SensorError::InvalidNumber {
            line,
            value: record[0].to_string(),
        })?;
        if let Some(&prev) = timestamps.last() {
            if t < prev {
                return Err(SensorError::NonMonotonicTime {
                    index: timestamps.len() as u64,
                    previous: prev,
                    current: t,
                });
            }
        }
        let row = record
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>().map_err(|_| SensorError::InvalidNumber {
                    line,
                    value: v.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        timestamps.push(t);
        samples.push(row);
    }

    Ok(EmgRecording::new(channel_count, timestamps, samples))
}

pub fn write_emg_csv<W: Write>(sink: W, recording: &EmgRecording) -> Result<(), SensorError> {
    let mut writer = csv::Writer::from_writer(sink);
    let mut header = vec!["t_us".to_string()];
    header.extend((0..recording.channel_count).map(|c| format!("ch{c}")));
    writer.write_record(&header)?;
    for (t, row) in recording.timestamps.iter().zip(&recording.samples) {
        let mut fields = vec![t.to_string()];
        fields.extend(row.iter().map(|v| v.to_string()));
        writer.write_record(&fields)?;
    }
    writer.flush()?;
    Ok(())
}
