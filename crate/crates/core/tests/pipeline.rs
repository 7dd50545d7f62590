use gesture_fusion::classifier::{ClassifierRegistry, GestureClassifier, TrainOptions};
use gesture_fusion::fusion::{build_samples, Modality};
use gesture_fusion::pipeline::{
    bench, load_classifier, run_replay, DropPolicy, PipelineConfig, PipelineError, ReplaySpeed,
};
use gesture_fusion::sensor_io::synthetic::{synthetic_session, SyntheticSessionConfig};
use gesture_fusion::sensor_io::{Session, WindowLength};

fn session(seed: u64) -> Session {
    synthetic_session(&SyntheticSessionConfig {
        seed,
        ..SyntheticSessionConfig::default()
    })
}

fn trained(modality: Modality) -> Box<dyn GestureClassifier> {
    let train = build_samples(&session(100), modality, WindowLength::from_ms(200).unwrap()).unwrap();
    let opts = TrainOptions {
        c: Some(1.0),
        ..TrainOptions::default()
    };
    ClassifierRegistry::builtin().train("linear-svm", &train, modality, &opts, 0).unwrap()
}

fn no_drop(modality: Modality) -> PipelineConfig {
    PipelineConfig {
        modality,
        speed: ReplaySpeed::Max,
        drop_policy: DropPolicy::None,
        ..PipelineConfig::default()
    }
}

#[test]
fn replay_matches_offline_predictions() {
    let model = trained(Modality::FusDvs);
    let s = session(7);
    let mut out = Vec::new();
    let outcome = run_replay(&s, model.as_ref(), &no_drop(Modality::FusDvs), &mut out).unwrap();
    assert_eq!(outcome.records.len(), 250);
    assert_eq!(outcome.summary.windows, 250);
    assert_eq!(outcome.summary.dropped, 0);
    assert!(outcome.records.windows(2).all(|w| w[0].n < w[1].n));

    let offline = build_samples(&s, Modality::FusDvs, WindowLength::from_ms(200).unwrap()).unwrap();
    for (rec, sample) in outcome.records.iter().zip(&offline) {
        let p = model.predict(sample).unwrap();
        assert_eq!(rec.n, sample.n);
        assert_eq!(rec.predicted, p.label);
        assert_eq!(rec.scores, p.scores);
    }

    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 250);
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    let keys: Vec<&String> = first.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 6);
    for k in ["n", "t_start_us", "t_end_us", "label", "scores", "latency_us"] {
        assert!(first.get(k).is_some(), "{k}");
    }
    assert_eq!(first["scores"].as_array().unwrap().len(), 5);
}

#[test]
fn empty_session_yields_no_records() {
    let model = trained(Modality::Emg);
    let mut s = session(1);
    s.manifest.annotations.clear();
    let outcome = run_replay(&s, model.as_ref(), &no_drop(Modality::Emg), &mut Vec::new()).unwrap();
    assert!(outcome.records.is_empty());
    assert_eq!(outcome.summary.windows, 0);
    assert_eq!(outcome.summary.accuracy, None);
}

#[test]
fn slow_processing_drops_are_counted_exactly() {
    let model = trained(Modality::Emg);
    let s = session(2);
    let cfg = PipelineConfig {
        modality: Modality::Emg,
        speed: ReplaySpeed::Max,
        drop_policy: DropPolicy::KeepLatest,
        queue_capacity: 1,
        processing_delay_ms: 5,
        ..PipelineConfig::default()
    };
    let outcome = run_replay(&s, model.as_ref(), &cfg, &mut Vec::new()).unwrap();
    let sum = &outcome.summary;
    assert_eq!(sum.windows, 250);
    assert!(sum.dropped > 0, "producers should outrun a slow consumer");
    assert_eq!(sum.classified + sum.dropped, sum.windows);
    assert_eq!(sum.classified, outcome.records.len());
    assert!(outcome.records.windows(2).all(|w| w[0].n < w[1].n));
}

#[test]
fn modality_and_model_checks() {
    let model = trained(Modality::Emg);
    let err = run_replay(&session(3), model.as_ref(), &no_drop(Modality::FusDvs), &mut Vec::new()).unwrap_err();
    assert!(matches!(err, PipelineError::ModelModalityMismatch { .. }));

    let dir = tempfile::tempdir().unwrap();
    let missing = PipelineConfig {
        model_path: Some(dir.path().join("absent.json")),
        ..no_drop(Modality::Emg)
    };
    let registry = ClassifierRegistry::builtin();
    assert!(matches!(load_classifier(&registry, &missing), Err(PipelineError::MissingModel(_))));

    let path = dir.path().join("emg.json");
    std::fs::write(&path, model.to_bytes().unwrap()).unwrap();
    let wrong = PipelineConfig {
        model_path: Some(path.clone()),
        ..no_drop(Modality::Dvs)
    };
    assert!(matches!(load_classifier(&registry, &wrong), Err(PipelineError::ModelModalityMismatch { .. })));
    let right = PipelineConfig {
        model_path: Some(path),
        ..no_drop(Modality::Emg)
    };
    assert_eq!(load_classifier(&registry, &right).unwrap().modality(), Modality::Emg);
}

#[test]
fn bench_statistics() {
    let model = trained(Modality::FusDvs);
    let one = bench(model.as_ref(), 1, 0).unwrap();
    assert_eq!(one.min_us, one.mean_us);
    assert_eq!(one.mean_us, one.p95_us);
    let a = bench(model.as_ref(), 20, 0).unwrap();
    let b = bench(model.as_ref(), 20, 0).unwrap();
    assert_eq!(a.predictions, b.predictions);
    assert!(a.min_us <= a.mean_us && a.min_us <= a.p95_us);
    assert!(bench(model.as_ref(), 0, 0).is_err());
}
