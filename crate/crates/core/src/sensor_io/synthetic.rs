//! Synthetic recording sessions with the dataset's timing layout: 5 gestures
//! x 5 repetitions, 2 s each, separated by 1 s rest. Events are drawn from a
//! gesture-specific hand silhouette, EMG from gesture-specific per-channel
//! amplitudes and APS frames (DAVIS only) render the same silhouette.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};

use super::session::write_aps_frame;
use super::{
    write_aedat, write_emg_csv, Annotation, ApsFrame, DvsEvent, EmgRecording, Polarity, SensorError,
    SensorGeometry, SensorKind, Session, SessionManifest,
};
use crate::gesture::Gesture;

const GESTURE_US: u64 = 2_000_000;
const REST_US: u64 = 1_000_000;
const EMG_PERIOD_US: u64 = 5_000;
const APS_PERIOD_US: u64 = 50_000;

#[derive(Debug, Clone)]
pub struct SyntheticSessionConfig {
    pub subject: String,
    pub session: String,
    pub kind: SensorKind,
    pub repetitions: usize,
    pub with_aps: bool,
    /// Event rate while a gesture is held (events per second).
    pub event_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSessionConfig {
    fn default() -> Self {
        SyntheticSessionConfig {
            subject: "synthetic".into(),
            session: "1".into(),
            kind: SensorKind::Dvs128,
            repetitions: 5,
            with_aps: false,
            event_rate: 4000.0,
            seed: 0,
        }
    }
}

/// Finger rectangles in hand units relative to the palm centre: (x0, x1, y0, y1).
const THUMB: (i32, i32, i32, i32) = (-22, -9, 0, 4);
const INDEX: (i32, i32, i32, i32) = (-7, -3, -26, -10);
const PINKY: (i32, i32, i32, i32) = (6, 9, -21, -10);

fn fingers(g: Gesture) -> &'static [(i32, i32, i32, i32)] {
    match g {
        Gesture::Pinky => &[PINKY],
        Gesture::Elle => &[THUMB, INDEX],
        Gesture::Yo => &[INDEX, PINKY],
        Gesture::Index => &[INDEX],
        Gesture::Thumb => &[THUMB],
    }
}

/// Pixel offsets covered by the hand silhouette of a gesture.
pub fn hand_silhouette(g: Gesture, scale: f64) -> Vec<(i32, i32)> {
    let mut px = Vec::new();
    let reach = (30.0 * scale).ceil() as i32;
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let (ux, uy) = (dx as f64 / scale, dy as f64 / scale);
            let palm = (ux / 9.0).powi(2) + (uy / 11.0).powi(2) <= 1.0;
            let finger = fingers(g).iter().any(|&(x0, x1, y0, y1)| {
                ux >= x0 as f64 && ux <= x1 as f64 && uy >= y0 as f64 && uy <= y1 as f64
            });
            if palm || finger {
                px.push((dx, dy));
            }
        }
    }
    px
}

/// Per-channel EMG standard deviation while holding a gesture.
fn emg_amplitudes(g: Gesture) -> [f64; 8] {
    match g {
        Gesture::Pinky => [6.0, 8.0, 14.0, 30.0, 26.0, 10.0, 6.0, 5.0],
        Gesture::Elle => [28.0, 22.0, 8.0, 6.0, 8.0, 12.0, 24.0, 30.0],
        Gesture::Yo => [20.0, 10.0, 12.0, 24.0, 22.0, 8.0, 10.0, 18.0],
        Gesture::Index => [10.0, 26.0, 28.0, 10.0, 6.0, 6.0, 12.0, 14.0],
        Gesture::Thumb => [16.0, 6.0, 6.0, 8.0, 12.0, 28.0, 30.0, 14.0],
    }
}

struct Interval {
    gesture: Gesture,
    start: u64,
    end: u64,
    center: (i32, i32),
}

/// Builds a session in memory.
pub fn synthetic_session(cfg: &SyntheticSessionConfig) -> Session {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let geometry = SensorGeometry::for_kind(cfg.kind);
    let scale = match cfg.kind {
        SensorKind::Dvs128 => 1.0,
        SensorKind::Davis240 => 2.0,
    } * rng.random_range(0.9..1.1);
    let gain = rng.random_range(0.8..1.25);
    let (w, h) = (i32::from(geometry.width), i32::from(geometry.height));
    let jitter = (8.0 * scale) as i32;

    let mut intervals = Vec::new();
    let mut t = REST_US / 2;
    for _rep in 0..cfg.repetitions {
        for g in Gesture::ALL {
            let center = (
                w / 2 + rng.random_range(-jitter..=jitter),
                h / 2 + rng.random_range(-jitter..=jitter),
            );
            intervals.push(Interval {
                gesture: g,
                start: t,
                end: t + GESTURE_US,
                center,
            });
            t += GESTURE_US + REST_US;
        }
    }
    let duration = t;

    let silhouettes: Vec<Vec<(i32, i32)>> = Gesture::ALL.iter().map(|&g| hand_silhouette(g, scale)).collect();
    let active = |t: u64| intervals.iter().find(|iv| t >= iv.start && t < iv.end);

    // events: Poisson process, fast during gestures, sparse background noise otherwise
    let mut events = Vec::new();
    let gesture_gap = Exp::new(cfg.event_rate / 1e6).expect("positive rate");
    let noise_gap = Exp::new(cfg.event_rate * 0.05 / 1e6).expect("positive rate");
    let mut t = 0.0f64;
    loop {
        let now = t as u64;
        let iv = active(now);
        t += match iv {
            Some(_) => gesture_gap.sample(&mut rng),
            None => noise_gap.sample(&mut rng),
        };
        let ts = t as u64;
        if ts >= duration {
            break;
        }
        let (x, y) = match active(ts) {
            Some(iv) if rng.random_bool(0.92) => {
                let shape = &silhouettes[iv.gesture.index()];
                let (dx, dy) = shape[rng.random_range(0..shape.len())];
                (iv.center.0 + dx + rng.random_range(-1..=1), iv.center.1 + dy + rng.random_range(-1..=1))
            }
            _ => (rng.random_range(0..w), rng.random_range(0..h)),
        };
        if x < 0 || y < 0 || x >= w || y >= h {
            continue;
        }
        let polarity = if rng.random_bool(0.5) { Polarity::On } else { Polarity::Off };
        events.push(DvsEvent::new(x as u16, y as u16, ts, polarity));
    }

    // EMG at 200 Hz
    let mut timestamps = Vec::new();
    let mut samples = Vec::new();
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let mut ts = 0;
    while ts < duration {
        let amp = match active(ts) {
            Some(iv) => emg_amplitudes(iv.gesture).map(|a| a * gain),
            None => [2.0; 8],
        };
        let row = amp
            .iter()
            .map(|a| (a * unit.sample(&mut rng)).round().clamp(-128.0, 127.0))
            .collect();
        timestamps.push(ts);
        samples.push(row);
        ts += EMG_PERIOD_US;
    }
    let emg = EmgRecording::new(8, timestamps, samples);

    let mut aps = Vec::new();
    if cfg.with_aps && cfg.kind == SensorKind::Davis240 {
        let mut ts = 0;
        while ts < duration {
            let mut pixels = vec![0.9; geometry.pixel_count()];
            if let Some(iv) = active(ts) {
                for &(dx, dy) in &silhouettes[iv.gesture.index()] {
                    let (x, y) = (iv.center.0 + dx, iv.center.1 + dy);
                    if x >= 0 && y >= 0 && x < w && y < h {
                        pixels[(y * w + x) as usize] = 0.3;
                    }
                }
            }
            for p in pixels.iter_mut() {
                *p = (*p + 0.03 * unit.sample(&mut rng)).clamp(0.0, 1.0);
            }
            aps.push(ApsFrame {
                width: w as usize,
                height: h as usize,
                t: ts,
                pixels,
            });
            ts += APS_PERIOD_US;
        }
    }

    let manifest = SessionManifest {
        subject: cfg.subject.clone(),
        session: cfg.session.clone(),
        events_file: "events.aedat".into(),
        emg_file: "emg.csv".into(),
        aps_dir: (!aps.is_empty()).then(|| PathBuf::from("aps")),
        annotations: intervals
            .iter()
            .map(|iv| Annotation {
                label: iv.gesture,
                start_us: iv.start,
                end_us: iv.end,
            })
            .collect(),
    };
    Session::from_parts(manifest, geometry, events, emg, aps).expect("generated annotations are disjoint")
}

/// Writes a session's files into `dir` and returns the manifest path.
pub fn write_session(dir: &Path, session: &Session) -> Result<PathBuf, SensorError> {
    fs::create_dir_all(dir)?;
    let m = &session.manifest;
    write_aedat(
        BufWriter::new(fs::File::create(dir.join(&m.events_file))?),
        session.geometry,
        &session.events,
    )?;
    write_emg_csv(BufWriter::new(fs::File::create(dir.join(&m.emg_file))?), &session.emg)?;
    if let Some(aps_dir) = &m.aps_dir {
        let aps_dir = dir.join(aps_dir);
        fs::create_dir_all(&aps_dir)?;
        for frame in &session.aps {
            write_aps_frame(&aps_dir, frame)?;
        }
    }
    let path = dir.join("session.json");
    fs::write(&path, serde_json::to_vec_pretty(m)?)?;
    Ok(path)
}
