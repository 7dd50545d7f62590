use std::collections::BTreeMap;
use std::io::Write;
use std::thread;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, never, select, Receiver, Sender, TrySendError};
use serde::{Deserialize, Serialize};

use super::{nearest_rank, DropPolicy, PipelineConfig, PipelineError, ReplaySpeed};
use crate::classifier::{ClassifierRegistry, GestureClassifier};
use crate::fusion::sample_from_window;
use crate::sensor_io::{
    slice_aps, slice_events, window_bounds, ApsFrame, DvsEvent, EmgSlice, Session, SyncWindow, WindowBounds, WindowLength,
};
use crate::Gesture;

/// One output line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub n: usize,
    pub t_start_us: u64,
    pub t_end_us: u64,
    pub label: String,
    pub scores: Vec<f64>,
    /// From joining both batches to having the prediction.
    pub latency_us: u64,
    #[serde(skip)]
    pub predicted: usize,
    #[serde(skip)]
    pub truth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub windows: usize,
    pub classified: usize,
    pub dropped: usize,
    /// Accuracy over classified windows that carry a label.
    pub accuracy: Option<f64>,
    pub mean_latency_us: Option<f64>,
    pub p95_latency_us: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub records: Vec<ClassificationRecord>,
    pub summary: ReplaySummary,
}

struct EventBatch {
    bounds: WindowBounds,
    events: Vec<DvsEvent>,
    aps: Vec<ApsFrame>,
}

struct EmgBatch {
    n: usize,
    emg: EmgSlice,
}

/// Loads the configured model and checks that it matches the modality.
pub fn load_classifier(
    registry: &ClassifierRegistry,
    config: &PipelineConfig,
) -> Result<Box<dyn GestureClassifier>, PipelineError> {
    let path = config.model_path.as_ref().ok_or(PipelineError::NoModelPath)?;
    if !path.is_file() {
        return Err(PipelineError::MissingModel(path.clone()));
    }
    let model = registry.load_file(path)?;
    if model.modality() != config.modality {
        return Err(PipelineError::ModelModalityMismatch {
            model: model.modality(),
            configured: config.modality,
        });
    }
    Ok(model)
}

/// Sends without blocking under keep-latest: when the queue is full the
/// oldest queued item is evicted through `evict`.
fn push<T>(tx: &Sender<T>, evict: &Receiver<T>, mut item: T, policy: DropPolicy) -> bool {
    match policy {
        DropPolicy::None => tx.send(item).is_ok(),
        DropPolicy::KeepLatest => loop {
            match tx.try_send(item) {
                Ok(()) => return true,
                Err(TrySendError::Full(back)) => {
                    let _ = evict.try_recv();
                    item = back;
                }
                Err(TrySendError::Disconnected(_)) => return false,
            }
        },
    }
}

/// Sleeps until the window's end time under realtime pacing.
fn pace(speed: ReplaySpeed, start: Instant, t0: u64, b: &WindowBounds) {
    if speed == ReplaySpeed::Realtime {
        let due = start + Duration::from_micros(b.t_end.saturating_sub(t0));
        if let Some(wait) = due.checked_duration_since(Instant::now()) {
            thread::sleep(wait);
        }
    }
}

/// Replays `session` through the four-role pipeline, writing one JSON line
/// per classified window to `out`.
pub fn run_replay(
    session: &Session,
    classifier: &dyn GestureClassifier,
    config: &PipelineConfig,
    out: &mut (dyn Write + Send),
) -> Result<ReplayOutcome, PipelineError> {
    config.validate()?;
    if classifier.modality() != config.modality {
        return Err(PipelineError::ModelModalityMismatch {
            model: classifier.modality(),
            configured: config.modality,
        });
    }
    if let Some(needed) = config.modality.sensor_kind() {
        if needed != session.geometry.kind {
            return Err(PipelineError::InvalidConfig(format!(
                "{} needs a {} recording, session is {}",
                config.modality,
                needed.chip_name(),
                session.geometry.kind.chip_name()
            )));
        }
    }
    let length = WindowLength::from_ms(config.window_ms).map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
    let bounds = window_bounds(&session.manifest.annotations, length);
    let total = bounds.len();
    let t0 = bounds.first().map_or(0, |b| b.t_start);
    let policy = config.drop_policy;
    let join_timeout = Duration::from_millis(2 * config.window_ms);

    let (ev_tx, ev_rx) = bounded::<EventBatch>(config.queue_capacity);
    let (emg_tx, emg_rx) = bounded::<EmgBatch>(config.queue_capacity);
    let (out_tx, out_rx) = bounded::<ClassificationRecord>(config.queue_capacity);
    let start = Instant::now();

    thread::scope(|s| {
        let bounds = &bounds;
        let ev_evict = ev_rx.clone();
        s.spawn(move || {
            for b in bounds {
                pace(config.speed, start, t0, b);
                let batch = EventBatch {
                    bounds: *b,
                    events: slice_events(&session.events, b.t_start, b.t_end).to_vec(),
                    aps: slice_aps(&session.aps, b.t_start, b.t_end).to_vec(),
                };
                if !push(&ev_tx, &ev_evict, batch, policy) {
                    break;
                }
            }
        });

        let emg_evict = emg_rx.clone();
        s.spawn(move || {
            for b in bounds {
                pace(config.speed, start, t0, b);
                let batch = EmgBatch {
                    n: b.n,
                    emg: EmgSlice::from_recording(&session.emg, b.t_start, b.t_end),
                };
                if !push(&emg_tx, &emg_evict, batch, policy) {
                    break;
                }
            }
        });

        let processing = s.spawn(move || -> Result<(), PipelineError> {
            let mut ev_rx = ev_rx;
            let mut emg_rx = emg_rx;
            let mut ev_pending: BTreeMap<usize, (EventBatch, Instant)> = BTreeMap::new();
            let mut emg_pending: BTreeMap<usize, (EmgBatch, Instant)> = BTreeMap::new();
            let (mut ev_done, mut emg_done) = (false, false);
            // Highest index seen on each queue; anything lower that is still
            // unmatched on the other side has lost its partner.
            let (mut ev_seen, mut emg_seen): (Option<usize>, Option<usize>) = (None, None);

            while !(ev_done && emg_done) {
                let tick = match policy {
                    DropPolicy::KeepLatest => join_timeout,
                    DropPolicy::None => Duration::from_secs(3600),
                };
                select! {
                    recv(ev_rx) -> msg => match msg {
                        Ok(batch) => {
                            ev_seen = Some(batch.bounds.n);
                            ev_pending.insert(batch.bounds.n, (batch, Instant::now()));
                        }
                        Err(_) => { ev_done = true; ev_rx = never(); }
                    },
                    recv(emg_rx) -> msg => match msg {
                        Ok(batch) => {
                            emg_seen = Some(batch.n);
                            emg_pending.insert(batch.n, (batch, Instant::now()));
                        }
                        Err(_) => { emg_done = true; emg_rx = never(); }
                    },
                    default(tick) => {}
                }

                // Both queues deliver in index order, so the smaller unmatched
                // front can never be joined.
                while let (Some((&a, _)), Some((&b, _))) = (ev_pending.first_key_value(), emg_pending.first_key_value()) {
                    if a == b {
                        let (ev, _) = ev_pending.remove(&a).expect("present");
                        let (emg, _) = emg_pending.remove(&b).expect("present");
                        let record = process(classifier, config, session, ev, emg)?;
                        if out_tx.send(record).is_err() {
                            return Ok(());
                        }
                    } else if a < b {
                        ev_pending.remove(&a);
                    } else {
                        emg_pending.remove(&b);
                    }
                }
                let orphaned = |n: usize, seen: Option<usize>, done: bool| done || seen.is_some_and(|m| n <= m);
                ev_pending.retain(|&n, _| !orphaned(n, emg_seen, emg_done));
                emg_pending.retain(|&n, _| !orphaned(n, ev_seen, ev_done));
                if policy == DropPolicy::KeepLatest {
                    let now = Instant::now();
                    ev_pending.retain(|_, (_, t)| now.duration_since(*t) <= join_timeout);
                    emg_pending.retain(|_, (_, t)| now.duration_since(*t) <= join_timeout);
                }
            }
            Ok(())
        });

        let output = s.spawn(move || -> Result<Vec<ClassificationRecord>, PipelineError> {
            let mut records = Vec::new();
            for record in out_rx {
                serde_json::to_writer(&mut *out, &record).map_err(std::io::Error::from)?;
                out.write_all(b"\n")?;
                records.push(record);
            }
            out.flush()?;
            Ok(records)
        });

        let processed = processing.join().map_err(|_| PipelineError::ThreadPanic)?;
        let records = output.join().map_err(|_| PipelineError::ThreadPanic)?;
        processed?;
        let records = records?;
        let summary = summarize(total, &records);
        Ok(ReplayOutcome { records, summary })
    })
}

fn process(
    classifier: &dyn GestureClassifier,
    config: &PipelineConfig,
    session: &Session,
    ev: EventBatch,
    emg: EmgBatch,
) -> Result<ClassificationRecord, PipelineError> {
    let joined = Instant::now();
    let b = ev.bounds;
    let window = SyncWindow {
        n: b.n,
        position: b.position,
        t_start: b.t_start,
        t_end: b.t_end,
        emg: emg.emg,
        events: ev.events,
        aps_frames: ev.aps,
        label: b.label,
    };
    if config.processing_delay_ms > 0 {
        thread::sleep(Duration::from_millis(config.processing_delay_ms));
    }
    let sample = sample_from_window(&window, session.geometry, config.modality)?;
    let prediction = classifier.predict(&sample)?;
    let latency_us = joined.elapsed().as_micros() as u64;
    Ok(ClassificationRecord {
        n: b.n,
        t_start_us: b.t_start,
        t_end_us: b.t_end,
        label: Gesture::from_index(prediction.label).map_or_else(|| prediction.label.to_string(), |g| g.name().to_string()),
        scores: prediction.scores,
        latency_us,
        predicted: prediction.label,
        truth: sample.label,
    })
}

fn summarize(total: usize, records: &[ClassificationRecord]) -> ReplaySummary {
    let labelled: Vec<&ClassificationRecord> = records.iter().filter(|r| r.truth.is_some()).collect();
    let correct = labelled.iter().filter(|r| r.truth == Some(r.predicted)).count();
    let mut latencies: Vec<u64> = records.iter().map(|r| r.latency_us).collect();
    latencies.sort_unstable();
    ReplaySummary {
        windows: total,
        classified: records.len(),
        dropped: total - records.len(),
        accuracy: (!labelled.is_empty()).then(|| correct as f64 / labelled.len() as f64),
        mean_latency_us: (!latencies.is_empty()).then(|| latencies.iter().sum::<u64>() as f64 / latencies.len() as f64),
        p95_latency_us: nearest_rank(&latencies, 0.95),
    }
}
