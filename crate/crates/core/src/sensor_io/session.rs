//! Session manifests: one JSON document per recording session tying together
//! the event stream, the EMG recording, optional APS frames and the gesture
//! annotations on a shared session-relative clock.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_aedat_file, read_emg_csv, DvsEvent, EmgRecording, SensorError, SensorGeometry};
use crate::gesture::Gesture;
use crate::pgm;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: Gesture,
    pub start_us: u64,
    pub end_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub subject: String,
    pub session: String,
    pub events_file: PathBuf,
    pub emg_file: PathBuf,
    /// Directory of `<t_us>.pgm` APS frames, when the session has them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aps_dir: Option<PathBuf>,
    pub annotations: Vec<Annotation>,
}

impl SessionManifest {
    /// Sorts annotations by start time and checks they are non-empty and disjoint.
    pub fn normalize(&mut self) -> Result<(), SensorError> {
        for a in &self.annotations {
            if a.end_us <= a.start_us {
                return Err(SensorError::InvalidAnnotation(format!(
                    "{} interval [{}, {}) is empty",
                    a.label, a.start_us, a.end_us
                )));
            }
        }
        self.annotations.sort_by_key(|a| (a.start_us, a.end_us));
        for pair in self.annotations.windows(2) {
            if pair[1].start_us < pair[0].end_us {
                return Err(SensorError::OverlappingAnnotations(
                    pair[0].start_us,
                    pair[0].end_us,
                    pair[1].start_us,
                    pair[1].end_us,
                ));
            }
        }
        Ok(())
    }
}

/// A conventional intensity frame with values in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ApsFrame {
    pub width: usize,
    pub height: usize,
    pub t: u64,
    pub pixels: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub manifest: SessionManifest,
    pub geometry: SensorGeometry,
    pub events: Vec<DvsEvent>,
    pub emg: EmgRecording,
    /// Sorted by timestamp.
    pub aps: Vec<ApsFrame>,
}

impl Session {
    pub fn from_parts(
        mut manifest: SessionManifest,
        geometry: SensorGeometry,
        events: Vec<DvsEvent>,
        emg: EmgRecording,
        mut aps: Vec<ApsFrame>,
    ) -> Result<Session, SensorError> {
        manifest.normalize()?;
        aps.sort_by_key(|f| f.t);
        Ok(Session {
            manifest,
            geometry,
            events,
            emg,
            aps,
        })
    }
}

fn resolve(root: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

/// Loads a manifest and every stream it references. Relative paths resolve
/// against the manifest's directory.
pub fn load_session(manifest_path: &Path) -> Result<Session, SensorError> {
    if !manifest_path.exists() {
        return Err(SensorError::MissingFile(manifest_path.to_path_buf()));
    }
    let manifest: SessionManifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));

    let events_path = resolve(root, &manifest.events_file);
    let emg_path = resolve(root, &manifest.emg_file);
    for p in [&events_path, &emg_path] {
        if !p.exists() {
            return Err(SensorError::MissingFile(p.clone()));
        }
    }
    let (geometry, events) = read_aedat_file(&events_path)?;
    let emg = read_emg_csv(&emg_path)?;
    let aps = match &manifest.aps_dir {
        Some(dir) => read_aps_dir(&resolve(root, dir))?,
        None => Vec::new(),
    };
    Session::from_parts(manifest, geometry, events, emg, aps)
}

/// Reads every `<t_us>.pgm` in a directory as an APS frame.
pub fn read_aps_dir(dir: &Path) -> Result<Vec<ApsFrame>, SensorError> {
    if !dir.is_dir() {
        return Err(SensorError::MissingFile(dir.to_path_buf()));
    }
    let mut frames = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("pgm") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let t: u64 = stem
            .parse()
            .map_err(|_| SensorError::Image(format!("APS file name `{stem}` is not a µs timestamp")))?;
        let (width, height, pixels) = pgm::read_pgm(&fs::read(&path)?)
            .map_err(|e| SensorError::Image(format!("{}: {e}", path.display())))?;
        frames.push(ApsFrame {
            width,
            height,
            t,
            pixels,
        });
    }
    frames.sort_by_key(|f| f.t);
    Ok(frames)
}

pub fn write_aps_frame(dir: &Path, frame: &ApsFrame) -> Result<(), SensorError> {
    let file = fs::File::create(dir.join(format!("{}.pgm", frame.t)))?;
    pgm::write_pgm(std::io::BufWriter::new(file), frame.width, frame.height, &frame.pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest(annotations: Vec<(Gesture, u64, u64)>) -> SessionManifest {
        SessionManifest {
            subject: "s01".into(),
            session: "1".into(),
            events_file: "events.aedat".into(),
            emg_file: "emg.csv".into(),
            aps_dir: None,
            annotations: annotations
                .into_iter()
                .map(|(label, start_us, end_us)| Annotation { label, start_us, end_us })
                .collect(),
        }
    }

    #[test]
    fn overlapping_annotations_rejected() {
        let mut m = manifest(vec![
            (Gesture::Yo, 0, 2_000_000),
            (Gesture::Elle, 1_500_000, 3_000_000),
        ]);
        assert!(matches!(m.normalize(), Err(SensorError::OverlappingAnnotations(..))));
    }

    #[test]
    fn annotations_are_sorted() {
        let mut m = manifest(vec![
            (Gesture::Yo, 3_000_000, 5_000_000),
            (Gesture::Elle, 0, 2_000_000),
        ]);
        m.normalize().unwrap();
        assert_eq!(m.annotations[0].label, Gesture::Elle);
        let mut empty = manifest(vec![(Gesture::Yo, 10, 10)]);
        assert!(matches!(empty.normalize(), Err(SensorError::InvalidAnnotation(_))));
    }

    #[test]
    fn json_schema() {
        let text = r#"{"subject":"s02","session":"3","events_file":"e.aedat","emg_file":"m.csv",
            "annotations":[{"label":"thumb","start_us":0,"end_us":2000000}]}"#;
        let m: SessionManifest = serde_json::from_str(text).unwrap();
        assert_eq!(m.aps_dir, None);
        assert_eq!(m.annotations[0].label, Gesture::Thumb);
        let bad = text.replace("thumb", "fist");
        assert!(serde_json::from_str::<SessionManifest>(&bad).is_err());
    }

    #[test]
    fn missing_manifest_and_streams() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("session.json");
        assert!(matches!(load_session(&path), Err(SensorError::MissingFile(_))));
        fs::write(&path, serde_json::to_vec(&manifest(vec![])).unwrap()).unwrap();
        match load_session(&path) {
            Err(SensorError::MissingFile(p)) => assert!(p.ends_with("events.aedat")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
