//! End-to-end acceptance suite. Prints one PASS / FAIL / SKIP line per
//! criterion and exits non-zero if any criterion fails.
//!
//! The optional dataset criterion runs only when `GFUSE_DATASET` points at a
//! directory of converted `session.json` recordings.

use std::mem::discriminant;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use gesture_fusion::classifier::{ClassifierRegistry, TrainOptions};
use gesture_fusion::cnn::{
    emg_cnn_architecture, vision_lenet_architecture, Activation, Architecture, CnnModel, LayerSpec, Tensor,
};
use gesture_fusion::emg_features::features_from_slice;
use gesture_fusion::folds::{stratified_folds, training_indices};
use gesture_fusion::fusion::{
    build_samples, evaluate, make_complementary_synthetic, EvalConfig, Modality, ModelKind, WindowSample,
};
use gesture_fusion::pipeline::{run_replay, DropPolicy, PipelineConfig, ReplaySpeed};
use gesture_fusion::sensor_io::synthetic::{synthetic_session, SyntheticSessionConfig};
use gesture_fusion::sensor_io::{
    encode_aedat, parse_aedat, DvsEvent, EmgSlice, Polarity, SensorGeometry, WindowLength,
};
use gesture_fusion::svm::{kkt_residuals, solve_smo, train_multiclass, KernelSpec, SmoConfig};
use gesture_fusion::vision::{accumulate_events, cell_histograms, hand_center, hog, subsample, Patch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

// ---------------------------------------------------------------- gradients

fn relu() -> LayerSpec {
    LayerSpec::Activation { function: Activation::Relu }
}

fn tanh() -> LayerSpec {
    LayerSpec::Activation { function: Activation::Tanh }
}

fn max_gradient_error(arch: Architecture, seed: u64) -> f64 {
    let mut model = CnnModel::new(arch, seed).expect("valid architecture");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    // zero-initialised biases put dead ReLU units exactly on the kink
    for blob in model.blobs_mut() {
        for v in blob.iter_mut() {
            *v += rng.random_range(-0.1..0.1);
        }
    }
    let shape = model.input_shape().to_vec();
    let len = shape.iter().product();
    let x = Tensor::new(shape, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let label = rng.random_range(0..model.class_count());
    let (_, grads) = model.loss_and_gradients(&x, label).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (b, blob) in grads.blobs.iter().enumerate() {
        for (i, &analytic) in blob.iter().enumerate() {
            let mut plus = model.clone();
            plus.blobs_mut()[b][i] += h;
            let mut minus = model.clone();
            minus.blobs_mut()[b][i] -= h;
            let numeric = (plus.loss_and_gradients(&x, label).unwrap().0 - minus.loss_and_gradients(&x, label).unwrap().0)
                / (2.0 * h);
            let scale = analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    }
    worst
}

fn kinds(arch: &Architecture) -> Vec<std::mem::Discriminant<LayerSpec>> {
    arch.layers.iter().map(discriminant).collect()
}

fn gradient_correctness() -> Outcome {
    use LayerSpec::{Conv1d, Conv2d, Dense, MaxPool2d, Softmax};
    let small: Vec<(&str, Architecture)> = vec![
        ("dense", Architecture { input_shape: vec![7], layers: vec![Dense { inputs: 7, outputs: 5 }, Softmax] }),
        (
            "conv2d",
            Architecture {
                input_shape: vec![2, 5, 5],
                layers: vec![Conv2d { in_channels: 2, out_channels: 3, kernel: 3 }, Dense { inputs: 27, outputs: 5 }, Softmax],
            },
        ),
        (
            "conv1d",
            Architecture {
                input_shape: vec![3, 8],
                layers: vec![Conv1d { in_channels: 3, out_channels: 2, kernel: 4 }, Dense { inputs: 10, outputs: 5 }, Softmax],
            },
        ),
        (
            "maxpool",
            Architecture {
                input_shape: vec![2, 6, 6],
                layers: vec![MaxPool2d { size: 2 }, Dense { inputs: 18, outputs: 5 }, Softmax],
            },
        ),
        (
            "relu",
            Architecture {
                input_shape: vec![6],
                layers: vec![Dense { inputs: 6, outputs: 8 }, relu(), Dense { inputs: 8, outputs: 5 }, Softmax],
            },
        ),
        (
            "tanh",
            Architecture {
                input_shape: vec![6],
                layers: vec![Dense { inputs: 6, outputs: 8 }, tanh(), Dense { inputs: 8, outputs: 5 }, Softmax],
            },
        ),
    ];
    // same layer sequence as the full networks, fewer channels and units
    let lenet = Architecture {
        input_shape: vec![1, 24, 24],
        layers: vec![
            Conv2d { in_channels: 1, out_channels: 2, kernel: 5 },
            relu(),
            MaxPool2d { size: 2 },
            Conv2d { in_channels: 2, out_channels: 3, kernel: 5 },
            relu(),
            MaxPool2d { size: 2 },
            Dense { inputs: 27, outputs: 8 },
            relu(),
            Dense { inputs: 8, outputs: 6 },
            relu(),
            Dense { inputs: 6, outputs: 5 },
            Softmax,
        ],
    };
    let emg = Architecture {
        input_shape: vec![1, 16],
        layers: vec![
            Conv1d { in_channels: 1, out_channels: 2, kernel: 5 },
            relu(),
            Conv1d { in_channels: 2, out_channels: 3, kernel: 5 },
            relu(),
            Dense { inputs: 24, outputs: 8 },
            relu(),
            Dense { inputs: 8, outputs: 5 },
            Softmax,
        ],
    };
    ensure!(kinds(&lenet) == kinds(&vision_lenet_architecture()), "reduced LeNet diverges from the full layout");
    ensure!(kinds(&emg) == kinds(&emg_cnn_architecture()), "reduced EMG net diverges from the full layout");

    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (name, arch) in small.into_iter().chain([("lenet", lenet), ("emg-cnn", emg)]) {
        for seed in 0..5 {
            let e = max_gradient_error(arch.clone(), seed);
            ensure!(e <= 1e-4, "{name} seed {seed}: relative error {e:.2e}");
            worst = worst.max(e);
            cases += 1;
        }
    }
    Ok(format!("{cases} networks, max relative error {worst:.1e}"))
}

// ------------------------------------------------------------------ parser

fn random_events(geometry: SensorGeometry, n: usize, start: u64, rng: &mut ChaCha8Rng) -> Vec<DvsEvent> {
    let mut t = start;
    (0..n)
        .map(|_| {
            t += rng.random_range(0..=1500);
            let pol = if rng.random_bool(0.5) { Polarity::On } else { Polarity::Off };
            DvsEvent::new(rng.random_range(0..geometry.width), rng.random_range(0..geometry.height), t, pol)
        })
        .collect()
}

fn parser_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut total = 0;
    for geometry in [SensorGeometry::DVS128, SensorGeometry::DAVIS240] {
        // starts 3 s before the 32-bit microsecond counter rolls over
        let events = random_events(geometry, 10_000, (1u64 << 32) - 3_000_000, &mut rng);
        ensure!(events.last().unwrap().t > 1u64 << 32, "sequence does not cross the wrap");
        let bytes = encode_aedat(geometry, &events).map_err(|e| e.to_string())?;
        let (g, back) = parse_aedat(&bytes).map_err(|e| e.to_string())?;
        ensure!(g == geometry, "geometry {g:?} != {geometry:?}");
        ensure!(back == events, "{:?}: decoded events differ", geometry.kind);
        total += back.len();
    }
    Ok(format!("{total} events, both sensors, across the timestamp wrap"))
}

// ---------------------------------------------------------------- features

fn feature_oracles() -> Outcome {
    const TRIALS: usize = 120;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    for _ in 0..TRIALS {
        let len = rng.random_range(1..60);
        let samples: Vec<Vec<f64>> =
            (0..len).map(|_| (0..8).map(|_| rng.random_range(-128i32..=127) as f64).collect()).collect();
        let slice = EmgSlice { channel_count: 8, timestamps: (0..len as u64).map(|i| i * 5000).collect(), samples };
        let f = features_from_slice(0, &slice).map_err(|e| e.to_string())?;
        for c in 0..8 {
            let (mut abs, mut sq) = (0.0, 0.0);
            for row in &slice.samples {
                abs += row[c].abs();
                sq += row[c] * row[c];
            }
            let mav = abs / len as f64;
            let rms = (sq / len as f64).sqrt();
            ensure!(close(f.values[c], mav, 1e-12), "MAV channel {c}: {} vs {mav}", f.values[c]);
            ensure!(close(f.values[8 + c], rms, 1e-12), "RMS channel {c}: {} vs {rms}", f.values[8 + c]);
        }
    }

    for trial in 0..TRIALS {
        let geometry = if trial % 2 == 0 { SensorGeometry::DVS128 } else { SensorGeometry::DAVIS240 };
        let events = random_events(geometry, rng.random_range(1..400), 0, &mut rng);
        let frame = accumulate_events(0, &events, geometry).map_err(|e| e.to_string())?;
        for y in 0..frame.height {
            for x in 0..frame.width {
                let expected = events.iter().filter(|e| usize::from(e.x) == x && usize::from(e.y) == y).count();
                ensure!(frame.count(x, y) as usize == expected, "count at ({x},{y})");
            }
        }
        let (sx, sy) = events.iter().fold((0.0, 0.0), |(a, b), e| (a + f64::from(e.x), b + f64::from(e.y)));
        let k = events.len() as f64;
        let expected = ((sx / k).round() as usize, (sy / k).round() as usize);
        let got = hand_center(&frame).map_err(|e| e.to_string())?;
        ensure!(got == expected, "centroid {got:?} vs {expected:?}");
    }

    for _ in 0..TRIALS {
        let pixels: Vec<f64> = (0..120 * 120).map(|_| rng.random()).collect();
        let big = Patch { n: 0, side: 120, pixels: pixels.clone(), source_center: (0, 0) };
        let small = subsample(&big).map_err(|e| e.to_string())?;
        for y in 0..60 {
            for x in 0..60 {
                let mut s = 0.0;
                for dy in 0..2 {
                    for dx in 0..2 {
                        s += pixels[(2 * y + dy) * 120 + 2 * x + dx];
                    }
                }
                ensure!(close(small.get(x, y), s / 4.0, 1e-12), "subsample at ({x},{y})");
            }
        }
    }

    let mut hog_blocks = 0;
    for _ in 0..TRIALS {
        let pixels: Vec<f64> = (0..3600).map(|_| rng.random()).collect();
        let patch = Patch { n: 0, side: 60, pixels: pixels.clone(), source_center: (0, 0) };
        let cells = oracle_cells(&pixels);
        let got = cell_histograms(&patch).map_err(|e| e.to_string())?;
        for (i, (&a, &b)) in got.iter().zip(&cells).enumerate() {
            ensure!(close(a, b, 1e-12), "HOG cell value {i}: {a} vs {b}");
        }
        let descriptor = hog(&patch).map_err(|e| e.to_string())?;
        let blocks = oracle_blocks(&cells);
        ensure!(descriptor.values.len() == blocks.len(), "HOG length {}", descriptor.values.len());
        for (i, (&a, &b)) in descriptor.values.iter().zip(&blocks).enumerate() {
            ensure!(close(a, b, 1e-9), "HOG block value {i}: {a} vs {b}");
        }
        hog_blocks += 1;
    }
    Ok(format!("{TRIALS} inputs each for MAV/RMS, frames, centroid, subsample; {hog_blocks} HOG patches"))
}

/// Per-cell 9-bin unsigned orientation histograms, magnitude weighted.
fn oracle_cells(px: &[f64]) -> Vec<f64> {
    let at = |x: isize, y: isize| px[(y.clamp(0, 59) * 60 + x.clamp(0, 59)) as usize];
    let mut out = vec![0.0; 36 * 9];
    for cy in 0..6 {
        for cx in 0..6 {
            for y in cy * 10..cy * 10 + 10 {
                for x in cx * 10..cx * 10 + 10 {
                    let gx = at(x + 1, y) - at(x - 1, y);
                    let gy = at(x, y + 1) - at(x, y - 1);
                    let mag = (gx * gx + gy * gy).sqrt();
                    if mag == 0.0 {
                        continue;
                    }
                    let deg = gy.atan2(gx).to_degrees().rem_euclid(180.0);
                    let bin = (0..9).find(|&b| deg < 20.0 * (b + 1) as f64).unwrap_or(8);
                    out[((cy * 6 + cx) * 9 + bin) as usize] += mag;
                }
            }
        }
    }
    out
}

fn oracle_blocks(cells: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for by in 0..5 {
        for bx in 0..5 {
            let mut v = Vec::new();
            for cy in by..by + 2 {
                for cx in bx..bx + 2 {
                    v.extend_from_slice(&cells[(cy * 6 + cx) * 9..(cy * 6 + cx + 1) * 9]);
                }
            }
            let norm = (v.iter().map(|a| a * a).sum::<f64>() + 1e-12).sqrt();
            out.extend(v.iter().map(|a| a / norm));
        }
    }
    out
}

// --------------------------------------------------------------------- SVM

fn gaussian_clusters(centres: &[(f64, f64, usize)], per: usize, sigma: f64, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for &(cx, cy, label) in centres {
        for _ in 0..per {
            // sum of uniforms, bounded and roughly normal
            let u = |rng: &mut ChaCha8Rng| (0..4).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() * sigma;
            x.push(vec![cx + u(rng), cy + u(rng)]);
            y.push(label);
        }
    }
    (x, y)
}

fn accuracy(model: &gesture_fusion::svm::MulticlassSvmModel, x: &[Vec<f64>], y: &[usize]) -> f64 {
    let hits = x.iter().zip(y).filter(|(p, &l)| model.predict(p).unwrap().0 == l).count();
    hits as f64 / y.len() as f64
}

fn worst_kkt(x: &[Vec<f64>], labels: &[usize], c: f64, kernel: KernelSpec) -> Result<f64, String> {
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut worst: f64 = 0.0;
    for k in classes {
        let y: Vec<f64> = labels.iter().map(|&l| if l == k { 1.0 } else { -1.0 }).collect();
        let sol = solve_smo(x, &y, kernel, &SmoConfig::new(c)).map_err(|e| e.to_string())?;
        let r = kkt_residuals(x, &y, &sol.alphas, sol.bias, c, kernel);
        worst = worst.max(r.into_iter().fold(0.0, f64::max));
    }
    Ok(worst)
}

fn svm_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let blobs = [(0.0, 0.0, 0), (6.0, 0.0, 1), (0.0, 6.0, 2), (6.0, 6.0, 3), (3.0, 12.0, 4)];
    let (bx, by) = gaussian_clusters(&blobs, 40, 0.5, &mut rng);
    let linear = train_multiclass(&bx, &by, 10.0, KernelSpec::Linear).map_err(|e| e.to_string())?;
    let blob_acc = accuracy(&linear, &bx, &by);
    ensure!(blob_acc == 1.0, "linear training accuracy on blobs {blob_acc}");

    let xor = [(1.0, 1.0, 0), (-1.0, -1.0, 0), (1.0, -1.0, 1), (-1.0, 1.0, 1)];
    let (xx, xy) = gaussian_clusters(&xor, 50, 0.15, &mut rng);
    let (tx, ty) = gaussian_clusters(&xor, 50, 0.15, &mut rng);
    let rbf = KernelSpec::rbf_for_dim(2);
    let rbf_acc = accuracy(&train_multiclass(&xx, &xy, 10.0, rbf).map_err(|e| e.to_string())?, &tx, &ty);
    let lin_acc = accuracy(&train_multiclass(&xx, &xy, 10.0, KernelSpec::Linear).map_err(|e| e.to_string())?, &tx, &ty);
    ensure!(rbf_acc >= 0.95, "RBF XOR accuracy {rbf_acc}");
    ensure!(lin_acc <= 0.75, "linear XOR accuracy {lin_acc}");

    let kkt = worst_kkt(&bx, &by, 10.0, KernelSpec::Linear)?
        .max(worst_kkt(&xx, &xy, 10.0, rbf)?)
        .max(worst_kkt(&xx, &xy, 10.0, KernelSpec::Linear)?);
    ensure!(kkt <= 1e-3, "KKT residual {kkt:.2e}");
    Ok(format!(
        "blobs {:.0}%, XOR rbf {:.0}% / linear {:.0}%, max KKT residual {kkt:.1e}",
        100.0 * blob_acc,
        100.0 * rbf_acc,
        100.0 * lin_acc
    ))
}

// ------------------------------------------------------------------ fusion

fn holdout_accuracy(samples: &[WindowSample], kind: &str, modality: Modality, opts: &TrainOptions, seed: u64) -> Result<f64, String> {
    let labels: Vec<usize> = samples.iter().map(|s| s.label.unwrap()).collect();
    let folds = stratified_folds(&labels, 5, seed).map_err(|e| e.to_string())?;
    let train: Vec<WindowSample> = training_indices(&folds, 0).into_iter().map(|i| samples[i].clone()).collect();
    let model = ClassifierRegistry::builtin()
        .train(kind, &train, modality, opts, seed)
        .map_err(|e| e.to_string())?;
    let hits = folds[0]
        .iter()
        .filter(|&&i| model.predict(&samples[i]).unwrap().label == labels[i])
        .count();
    Ok(hits as f64 / folds[0].len() as f64)
}

fn fusion_benefit() -> Outcome {
    let seed = 5;
    let samples = make_complementary_synthetic(100, 0.0, seed).map_err(|e| e.to_string())?;
    let mut opts = TrainOptions { c: Some(1.0), ..TrainOptions::default() };
    opts.cnn.epochs = 5;
    opts.fusion_epochs = 20;
    let mut summary = Vec::new();
    for kind in ["linear-svm", "rbf-svm", "cnn"] {
        let acc = |m| holdout_accuracy(&samples, kind, m, &opts, seed);
        let (emg, dvs, fused) = (acc(Modality::Emg)?, acc(Modality::Dvs)?, acc(Modality::FusDvs)?);
        ensure!(
            fused >= emg.max(dvs) + 0.05,
            "{kind}: fused {fused:.3} vs EMG {emg:.3} / DVS {dvs:.3}"
        );
        summary.push(format!("{kind} {:.0}/{:.0}->{:.0}", 100.0 * emg, 100.0 * dvs, 100.0 * fused));
    }
    Ok(format!("EMG/DVS->FUS-DVS %: {}", summary.join(", ")))
}

// ----------------------------------------------------------------- runtime

fn replay_equivalence() -> Outcome {
    let length = WindowLength::from_ms(200).unwrap();
    let train_session = synthetic_session(&SyntheticSessionConfig { seed: 60, ..Default::default() });
    let live = synthetic_session(&SyntheticSessionConfig { seed: 61, ..Default::default() });
    let mut opts = TrainOptions { c: Some(1.0), ..TrainOptions::default() };
    opts.cnn.epochs = 1;
    opts.fusion_epochs = 2;
    let registry = ClassifierRegistry::builtin();
    let mut checked = 0;
    for (kind, modality) in [("linear-svm", Modality::FusDvs), ("rbf-svm", Modality::Dvs), ("cnn", Modality::FusDvs)] {
        let train = build_samples(&train_session, modality, length).map_err(|e| e.to_string())?;
        let model = registry.train(kind, &train, modality, &opts, 0).map_err(|e| e.to_string())?;
        let cfg = PipelineConfig {
            modality,
            speed: ReplaySpeed::Max,
            drop_policy: DropPolicy::None,
            ..PipelineConfig::default()
        };
        let outcome = run_replay(&live, model.as_ref(), &cfg, &mut std::io::sink()).map_err(|e| e.to_string())?;
        let offline = build_samples(&live, modality, length).map_err(|e| e.to_string())?;
        ensure!(outcome.records.len() == 250 && offline.len() == 250, "{kind}: {} records", outcome.records.len());
        for (rec, sample) in outcome.records.iter().zip(&offline) {
            let p = model.predict(sample).map_err(|e| e.to_string())?;
            ensure!(
                rec.n == sample.n && rec.predicted == p.label && rec.scores == p.scores,
                "{kind} {modality}: window {} differs",
                sample.n
            );
        }
        checked += outcome.records.len();
    }
    Ok(format!("{checked} windows over 3 models identical to the offline path"))
}

fn gfuse(args: &[&str], cwd: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gfuse"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "gfuse {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let data = ["--synthetic", "--per-class", "20", "--noise", "0.3"];
    let train = |seed: &str, kind: &str, modality: &str, out: &str| -> Result<Vec<u8>, String> {
        let mut args = vec!["--seed", seed, "train", "--model", kind, "--modality", modality, "--epochs", "2", "--fusion-epochs", "2", "--out", out];
        args.extend_from_slice(&data);
        gfuse(&args, d)?;
        std::fs::read(d.join(out)).map_err(|e| e.to_string())
    };
    for (kind, modality) in [("linear-svm", "FUS-DVS"), ("rbf-svm", "EMG"), ("cnn", "FUS-DVS")] {
        let a = train("11", kind, modality, "a")?;
        let b = train("11", kind, modality, "b")?;
        ensure!(a == b, "{kind}: models differ between runs");
        if kind == "cnn" {
            ensure!(train("12", kind, modality, "c")? != a, "cnn: seed has no effect");
        }
    }
    let eval = || {
        let mut args = vec!["--json", "--seed", "11", "eval", "--model", "linear-svm,cnn", "--modality", "DVS,FUS-DVS", "--folds", "2", "--epochs", "1", "--fusion-epochs", "2"];
        args.extend_from_slice(&data);
        gfuse(&args, d)
    };
    let (first, second) = (eval()?, eval()?);
    ensure!(first == second, "eval reports differ between runs");
    Ok(format!("3 model kinds and {} eval report lines bit-identical", first.iter().filter(|&&c| c == b'\n').count()))
}

// ----------------------------------------------------------------- dataset

fn dataset_trends(dir: &Path) -> Outcome {
    let mut sessions = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let p = entry.map_err(|e| e.to_string())?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == "session.json") {
                sessions.push(gesture_fusion::sensor_io::load_session(&p).map_err(|e| e.to_string())?);
            }
        }
    }
    ensure!(!sessions.is_empty(), "no session.json under {}", dir.display());
    let length = WindowLength::from_ms(200).unwrap();
    let registry = ClassifierRegistry::builtin();
    let cfg = EvalConfig { folds: 5, seed: 0, ..EvalConfig::default() };
    let pairs = [(Modality::Dvs, Modality::FusDvs), (Modality::Dav, Modality::FusDav), (Modality::Frm, Modality::FusFrm)];
    let mut lines = Vec::new();
    let mut emg_linear = None;
    for (vision, fused) in pairs {
        let kind = vision.sensor_kind();
        let usable: Vec<_> = sessions.iter().filter(|s| kind.is_none_or(|k| k == s.geometry.kind)).collect();
        if usable.is_empty() {
            continue;
        }
        let build = |m: Modality| -> Result<Vec<WindowSample>, String> {
            let mut all = Vec::new();
            for s in &usable {
                all.extend(build_samples(s, m, length).map_err(|e| e.to_string())?);
            }
            Ok(all)
        };
        let (emg_s, vis_s, fus_s) = (build(Modality::Emg)?, build(vision)?, build(fused)?);
        let mut means = Vec::new();
        for kind in ModelKind::ALL {
            let run = |s: &[WindowSample], m| evaluate(&registry, s, m, kind, 200, &cfg).map_err(|e| e.to_string());
            let (e, v, f) = (run(&emg_s, Modality::Emg)?, run(&vis_s, vision)?, run(&fus_s, fused)?);
            for k in 0..cfg.folds {
                let (a, b, c) = (e.fold_accuracies[k], v.fold_accuracies[k], f.fold_accuracies[k]);
                ensure!(c >= a && c >= b, "{kind} {fused} fold {k}: {c:.3} < unimodal {a:.3}/{b:.3}");
            }
            if kind == ModelKind::LinearSvm && emg_linear.is_none() {
                emg_linear = Some(e.mean);
            }
            if kind == ModelKind::Cnn && fused == Modality::FusDvs {
                ensure!(f.mean >= 0.90, "FUS-DVS CNN mean {:.3}", f.mean);
            }
            means.push((e.mean, v.mean, f.mean));
        }
        for i in 1..means.len() {
            let (p, q) = (means[i - 1], means[i]);
            ensure!(q.0 >= p.0 && q.1 >= p.1 && q.2 >= p.2, "model ordering violated for {fused}: {means:?}");
        }
        lines.push(format!("{fused} ok"));
    }
    let emg = emg_linear.ok_or("no sessions evaluated")?;
    ensure!((emg - 0.544).abs() <= 0.10, "EMG linear-SVM mean {emg:.3}");
    Ok(lines.join(", "))
}

// -------------------------------------------------------------------- main

fn main() {
    panic::set_hook(Box::new(|_| {}));
    type Criterion = (&'static str, Box<dyn Fn() -> Option<Outcome>>);
    let criteria: Vec<Criterion> = vec![
        ("gradient correctness", Box::new(|| Some(gradient_correctness()))),
        ("AEDAT round trip", Box::new(|| Some(parser_round_trip()))),
        ("feature oracles", Box::new(|| Some(feature_oracles()))),
        ("SVM sanity", Box::new(|| Some(svm_sanity()))),
        ("fusion benefit", Box::new(|| Some(fusion_benefit()))),
        ("replay / offline equivalence", Box::new(|| Some(replay_equivalence()))),
        ("seeded determinism", Box::new(|| Some(determinism()))),
        (
            "dataset trends",
            Box::new(|| std::env::var_os("GFUSE_DATASET").map(|d| dataset_trends(Path::new(&d)))),
        ),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Some(Err(msg))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Some(Ok(detail)) => println!("PASS  {}. {name} ({secs:.1} s): {detail}", i + 1),
            Some(Err(why)) => {
                failed += 1;
                println!("FAIL  {}. {name} ({secs:.1} s): {why}", i + 1);
            }
            None => println!("SKIP  {}. {name}: set GFUSE_DATASET to a directory of session.json recordings", i + 1),
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
