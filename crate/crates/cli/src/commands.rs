use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use gesture_fusion::classifier::{ClassifierRegistry, TrainOptions};
use gesture_fusion::cnn::{is_fgcn, Container};
use gesture_fusion::emg_features::{features_csv, features_from_slice};
use gesture_fusion::fusion::{
    build_samples, evaluate, make_complementary_synthetic, render_table, EvalConfig, Modality, ModelKind, WindowSample,
};
use gesture_fusion::pgm::write_pgm;
use gesture_fusion::pipeline::{bench, load_classifier, run_replay, DropPolicy, PipelineConfig, ReplaySpeed};
use gesture_fusion::sensor_io::synthetic::{synthetic_session, write_session, SyntheticSessionConfig};
use gesture_fusion::sensor_io::{
    load_session, read_aedat_file, read_emg_csv, slice_events, tile_bounds, EmgSlice, SensorKind, SyncWindow,
    WindowLength,
};
use gesture_fusion::vision::{accumulate_event_frame, minmax_normalize, window_patch, VisionSource};
use log::{info, warn};
use serde_json::json;

use crate::config::FileConfig;
use crate::{
    BenchArgs, Cli, Command, ConvertCommand, DataArgs, EvalArgs, InspectArgs, ReplayArgs, SensorArg, SynthSessionArgs,
    TrainArgs, TrainingFlags,
};

struct Ctx {
    file: FileConfig,
    seed: u64,
    json: bool,
    registry: ClassifierRegistry,
}

pub fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let ctx = Ctx {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        json: cli.json,
        registry: ClassifierRegistry::builtin(),
        file,
    };
    match cli.command {
        Command::Convert(c) => convert(&ctx, c),
        Command::Inspect(a) => inspect(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Replay(a) => replay(&ctx, a, cli.config.is_some()),
        Command::Bench(a) => bench_cmd(&ctx, a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn parse_modality(s: &str) -> Result<Modality> {
    Ok(s.parse::<Modality>()?)
}

fn convert(ctx: &Ctx, cmd: ConvertCommand) -> Result<()> {
    match cmd {
        ConvertCommand::ModelToJson { input, output } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let doc = if is_fgcn(&bytes) {
                Container::read(&bytes)?.to_json()
            } else {
                ctx.registry.load(&bytes)?;
                serde_json::from_slice(&bytes)?
            };
            let mut w = create(&output)?;
            serde_json::to_writer_pretty(&mut w, &doc)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        ConvertCommand::JsonToModel { input, output } => {
            let text = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let doc: serde_json::Value = serde_json::from_slice(&text)?;
            let bytes = if doc.get("format").and_then(|f| f.as_str()) == Some("FGCN") {
                Container::from_json(doc)?.to_bytes()
            } else {
                ctx.registry.load(&text)?.to_bytes()?
            };
            ctx.registry.load(&bytes).context("converted model does not load")?;
            fs::write(&output, bytes).with_context(|| format!("writing {}", output.display()))?;
        }
        ConvertCommand::SynthSession(a) => synth_session(ctx, a)?,
    }
    Ok(())
}

fn synth_session(ctx: &Ctx, a: SynthSessionArgs) -> Result<()> {
    let kind = match a.sensor {
        SensorArg::Dvs128 => SensorKind::Dvs128,
        SensorArg::Davis240 => SensorKind::Davis240,
    };
    if a.aps && kind != SensorKind::Davis240 {
        bail!("--aps requires --sensor davis240");
    }
    let session = synthetic_session(&SyntheticSessionConfig {
        subject: a.subject,
        session: a.session,
        kind,
        repetitions: a.repetitions,
        with_aps: a.aps,
        seed: ctx.seed,
        ..SyntheticSessionConfig::default()
    });
    let manifest = write_session(&a.out, &session)?;
    if ctx.json {
        println!("{}", json!({ "manifest": manifest, "events": session.events.len(), "emg_samples": session.emg.len() }));
    } else {
        println!("wrote {}", manifest.display());
    }
    Ok(())
}

fn inspect(ctx: &Ctx, a: InspectArgs) -> Result<()> {
    let length = WindowLength::from_ms(a.window)?;
    if let Some(path) = &a.events {
        let (geometry, events) = read_aedat_file(path)?;
        let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let bounds = match (events.first(), events.last()) {
            (Some(f), Some(l)) => tile_bounds(f.t, l.t + 1, length, 0, None),
            _ => Vec::new(),
        };
        let source = match geometry.kind {
            SensorKind::Dvs128 => VisionSource::Dvs,
            SensorKind::Davis240 => VisionSource::Dav,
        };
        for b in &bounds {
            let window = SyncWindow {
                n: b.n,
                position: b.position,
                t_start: b.t_start,
                t_end: b.t_end,
                emg: EmgSlice::default(),
                events: slice_events(&events, b.t_start, b.t_end).to_vec(),
                aps_frames: Vec::new(),
                label: None,
            };
            let frame = minmax_normalize(&accumulate_event_frame(&window, geometry)?).gray_image();
            write_pgm(create(&dir.join(format!("frame_{:05}.pgm", b.n)))?, frame.width, frame.height, &frame.data)?;
            let patch = window_patch(&window, geometry, source)?;
            write_pgm(create(&dir.join(format!("patch_{:05}.pgm", b.n)))?, patch.side, patch.side, &patch.pixels)?;
        }
        if ctx.json {
            println!("{}", json!({ "windows": bounds.len(), "out": dir }));
        } else {
            println!("{} windows written to {}", bounds.len(), dir.display());
        }
    }
    if let Some(path) = &a.emg {
        let rec = read_emg_csv(path)?;
        let bounds = match (rec.timestamps.first(), rec.timestamps.last()) {
            (Some(&f), Some(&l)) => tile_bounds(f, l + 1, length, 0, None),
            _ => Vec::new(),
        };
        let mut vectors = Vec::with_capacity(bounds.len());
        for b in &bounds {
            match features_from_slice(b.n, &EmgSlice::from_recording(&rec, b.t_start, b.t_end)) {
                Ok(v) => vectors.push(v),
                Err(e) => warn!("window {}: {e}", b.n),
            }
        }
        let csv = features_csv(&vectors);
        match &a.out {
            Some(p) if a.events.is_none() => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
            _ => io::stdout().write_all(csv.as_bytes())?,
        }
    }
    Ok(())
}

fn training_options(base: &TrainOptions, flags: &TrainingFlags) -> TrainOptions {
    let mut opts = base.clone();
    if flags.c.is_some() {
        opts.c = flags.c;
    }
    if let Some(e) = flags.epochs {
        opts.cnn.epochs = e;
    }
    if let Some(e) = flags.fusion_epochs {
        opts.fusion_epochs = e;
    }
    if let Some(b) = flags.batch {
        opts.cnn.batch_size = b;
    }
    opts
}

/// Session manifests named `session.json` below `dir`, sorted by path.
fn find_manifests(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).with_context(|| format!("listing {}", d.display()))? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "session.json") {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

/// Samples plus the subject of each sample.
fn load_samples(data: &DataArgs, modality: Modality, window_ms: u64, seed: u64) -> Result<(Vec<WindowSample>, Vec<String>)> {
    if data.synthetic {
        let samples = make_complementary_synthetic(data.per_class, data.noise, seed)?;
        let groups = vec!["synthetic".to_string(); samples.len()];
        return Ok((samples, groups));
    }
    let dir = data.data.as_ref().ok_or_else(|| anyhow!("--data or --synthetic is required"))?;
    let length = WindowLength::from_ms(window_ms)?;
    let mut samples = Vec::new();
    let mut groups = Vec::new();
    for manifest in find_manifests(dir)? {
        let session = load_session(&manifest)?;
        if modality.sensor_kind().is_some_and(|k| k != session.geometry.kind) {
            info!("skipping {} ({} recording, {modality} needs another sensor)", manifest.display(), session.geometry.kind.chip_name());
            continue;
        }
        let s = build_samples(&session, modality, length).with_context(|| format!("processing {}", manifest.display()))?;
        groups.extend(std::iter::repeat_n(session.manifest.subject.clone(), s.len()));
        samples.extend(s);
    }
    if samples.is_empty() {
        bail!("no usable {modality} windows under {}", dir.display());
    }
    Ok((samples, groups))
}

fn train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let modality = match &a.modality {
        Some(m) => parse_modality(m)?,
        None => ctx.file.pipeline.modality,
    };
    let window = a.window.unwrap_or(ctx.file.pipeline.window_ms);
    let kind: ModelKind = a.model.parse()?;
    let (samples, _) = load_samples(&a.data, modality, window, ctx.seed)?;
    let opts = training_options(&ctx.file.train, &a.training);
    info!("training {kind} on {} {modality} windows", samples.len());
    let model = ctx.registry.train(kind.registry_kind(), &samples, modality, &opts, ctx.seed)?;
    let mut w = create(&a.out)?;
    model.save(&mut w)?;
    w.flush()?;
    if ctx.json {
        println!("{}", json!({ "model": a.out, "kind": kind.registry_kind(), "modality": modality, "windows": samples.len() }));
    } else {
        println!("trained {kind} for {modality} on {} windows, saved to {}", samples.len(), a.out.display());
    }
    Ok(())
}

fn eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let modalities = a.modality.iter().map(|m| parse_modality(m)).collect::<Result<Vec<_>>>()?;
    let kinds = a.model.iter().map(|k| Ok(k.parse::<ModelKind>()?)).collect::<Result<Vec<_>>>()?;
    let opts = training_options(&ctx.file.train, &a.training);
    let mut reports = Vec::new();
    for &window in &a.window {
        for &modality in &modalities {
            let (samples, groups) = load_samples(&a.data, modality, window, ctx.seed)?;
            let cfg = EvalConfig {
                folds: a.folds.or(ctx.file.folds).unwrap_or(5),
                seed: ctx.seed,
                train: opts.clone(),
                groups: a.per_subject.then_some(groups),
            };
            for &kind in &kinds {
                info!("evaluating {kind} on {modality}, T = {window} ms");
                let report = evaluate(&ctx.registry, &samples, modality, kind, window, &cfg)?;
                if ctx.json {
                    println!("{}", serde_json::to_string(&report)?);
                }
                reports.push(report);
            }
        }
    }
    if !ctx.json {
        print!("{}", render_table(&reports));
    }
    Ok(())
}

fn replay(ctx: &Ctx, a: ReplayArgs, have_config: bool) -> Result<()> {
    let mut cfg: PipelineConfig = ctx.file.pipeline.clone();
    if let Some(m) = &a.model {
        cfg.model_path = Some(m.clone());
    }
    if let Some(w) = a.window {
        cfg.window_ms = w;
    }
    if a.no_drop {
        cfg.drop_policy = DropPolicy::None;
    }
    if let Some(s) = &a.speed {
        cfg.speed = if s == "max" { ReplaySpeed::Max } else { ReplaySpeed::Realtime };
    }
    if let Some(q) = a.queue {
        cfg.queue_capacity = q;
    }
    match &a.modality {
        Some(m) => cfg.modality = parse_modality(m)?,
        None if !have_config => {
            // Without an explicit modality, run whatever the model was trained for.
            let path = cfg.model_path.clone().ok_or_else(|| anyhow!("--model is required"))?;
            if path.is_file() {
                cfg.modality = ctx.registry.load_file(&path)?.modality();
            }
        }
        None => {}
    }
    let model = load_classifier(&ctx.registry, &cfg)?;
    let session = load_session(&a.session)?;
    let mut sink: Box<dyn Write + Send> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout()),
    };
    let outcome = run_replay(&session, model.as_ref(), &cfg, &mut sink)?;
    drop(sink);
    let s = &outcome.summary;
    if ctx.json {
        eprintln!("{}", serde_json::to_string(s)?);
    } else {
        eprintln!(
            "windows {}  classified {}  dropped {}  accuracy {}  latency mean {} us  p95 {} us",
            s.windows,
            s.classified,
            s.dropped,
            s.accuracy.map_or("-".into(), |v| format!("{:.1}%", 100.0 * v)),
            s.mean_latency_us.map_or("-".into(), |v| format!("{v:.0}")),
            s.p95_latency_us.map_or("-".into(), |v| v.to_string()),
        );
    }
    Ok(())
}

fn bench_cmd(ctx: &Ctx, a: BenchArgs) -> Result<()> {
    let path = a
        .model
        .or_else(|| ctx.file.pipeline.model_path.clone())
        .ok_or_else(|| anyhow!("--model is required"))?;
    let mut cfg = ctx.file.pipeline.clone();
    cfg.model_path = Some(path.clone());
    match &a.modality {
        Some(m) => cfg.modality = parse_modality(m)?,
        None if path.is_file() => cfg.modality = ctx.registry.load_file(&path)?.modality(),
        None => {}
    }
    let model = load_classifier(&ctx.registry, &cfg)?;
    let stats = bench(model.as_ref(), a.iterations, ctx.seed)?;
    if ctx.json {
        println!("{}", serde_json::to_string(&stats)?);
    } else {
        println!(
            "{} {}: {} iterations  min {:.1} us  mean {:.1} us  p95 {:.1} us",
            model.kind(),
            model.modality(),
            stats.iterations,
            stats.min_us,
            stats.mean_us,
            stats.p95_us
        );
    }
    Ok(())
}
