//! One function per subcommand. Each resolves its flags against the
//! preset and any dataset manifest, runs the pipeline stage, and writes a
//! run manifest next to its outputs.

use crate::dataset::{load_dataset, load_frames_dir};
use crate::manifest::{manifest_beside_file, manifest_in_dir, RunManifest};
use crate::overlay::overlay;
use crate::{
    DetectArgs, EvalArgs, FinetuneArgs, GridArgs, PlotArgs, RegisterArgs, Scene, SynthArgs, TargetsArgs,
    TrainArgs,
};
use satvid::dataio::{
    frame_file_name, list_frame_files, load_annotations, load_frame_png, save_annotations, save_frame_png,
    save_homographies, tile_roobis, AnnotationRecord, PointAnnotations,
};
use satvid::evaluate::{match_points, ratios};
use satvid::model::ModelWeights;
use satvid::postprocess::{extractor, PostprocessConfig};
use satvid::register::{register_sequence, RegistrationParams};
use satvid::seeds;
use satvid::synth::{domain_pair, generate, write_dataset, ScenarioSpec};
use satvid::targets::{heatmap_target, Accumulation, TargetSpec};
use satvid::train::{
    fine_tune, grid_config, run_config_grid, split_train_val, stabilized_samples, GridData, GridResults,
    GridSpec, ModelKind, StopReason, TrainConfig, TrainLog, TrainSample,
};
use satvid::{Error, GrayFrame, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut manifest = RunManifest::new("synth");
    let c = args.c.unwrap_or(args.preset.channels());
    let theta = args.theta.unwrap_or(args.preset.theta());
    if args.scene == Scene::Pair
        && (args.frames.is_some() || args.vehicles.is_some() || args.width.is_some() || args.height.is_some())
    {
        return Err(Error::data(
            "synth",
            "scene pair is fixed by its seed; size overrides apply to default, dense, and domain-b",
        ));
    }
    match args.scene {
        Scene::Pair => {
            let (a, b) = domain_pair(args.seed)?;
            write_dataset(args.out.join("domain_a"), &a, c, args.k, args.roobi, f64::from(theta), args.seed)?;
            write_dataset(args.out.join("domain_b"), &b, c, args.k, args.roobi, f64::from(theta), args.seed)?;
            println!(
                "wrote domain_a ({} frames) and domain_b ({} frames) under {}",
                a.frames.len(),
                b.frames.len(),
                args.out.display()
            );
        }
        _ => {
            let mut spec = match args.scene {
                Scene::Default => ScenarioSpec::default_scene(args.seed),
                Scene::Dense => ScenarioSpec::dense_traffic(args.seed),
                Scene::DomainB => ScenarioSpec::domain_b(args.seed),
                Scene::Pair => unreachable!("handled above"),
            };
            if let Some(n) = args.frames {
                spec.frame_count = n;
            }
            if let Some(n) = args.vehicles {
                spec.vehicle_count = n;
            }
            if let Some(w) = args.width {
                spec.width = w;
            }
            if let Some(h) = args.height {
                spec.height = h;
            }
            manifest.push("width", spec.width);
            manifest.push("height", spec.height);
            manifest.push("frames", spec.frame_count);
            manifest.push("vehicles", spec.vehicle_count);
            let data = generate(&spec)?;
            write_dataset(&args.out, &data, c, args.k, args.roobi, f64::from(theta), args.seed)?;
            println!(
                "wrote {} frames, {} annotation records to {}",
                data.frames.len(),
                data.annotations.len(),
                args.out.display()
            );
        }
    }
    manifest.push("scene", format!("{:?}", args.scene).to_lowercase());
    manifest.push("seed", args.seed);
    manifest.push("c", c);
    manifest.push("k", args.k);
    manifest.push("roobi", args.roobi);
    manifest.push("theta", theta);
    manifest.push_path("out", &args.out);
    manifest.write(&manifest_in_dir(&args.out))
}

pub fn register(args: &RegisterArgs) -> Result<()> {
    let mut manifest = RunManifest::new("register");
    let frames = load_frames_dir(&args.frames)?;
    let defaults = RegistrationParams::default();
    let params = RegistrationParams {
        response_threshold: args.response_threshold.unwrap_or(defaults.response_threshold),
        max_points: args.max_points.unwrap_or(defaults.max_points),
        match_ratio: args.match_ratio.unwrap_or(defaults.match_ratio),
        inlier_threshold: args.inlier_threshold.unwrap_or(defaults.inlier_threshold),
        max_iterations: args.max_iterations.unwrap_or(defaults.max_iterations),
        seed: args.seed,
    };
    let registered = register_sequence(&frames, args.reference, &params)?;

    let frames_dir = args.out.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let mut homographies = Vec::with_capacity(registered.len());
    for (i, r) in registered.iter().enumerate() {
        save_frame_png(&r.frame, frames_dir.join(frame_file_name(i)))?;
        homographies.push(r.homography.clone());
    }
    save_homographies(args.out.join("homographies.txt"), &homographies)?;
    println!("registered {} frames to reference {}", registered.len(), args.reference);

    manifest.push_path("frames", &args.frames);
    manifest.push("reference", args.reference);
    manifest.push("response_threshold", params.response_threshold);
    manifest.push("max_points", params.max_points);
    manifest.push("match_ratio", params.match_ratio);
    manifest.push("inlier_threshold", params.inlier_threshold);
    manifest.push("max_iterations", params.max_iterations);
    manifest.push("seed", args.seed);
    manifest.push_path("out", &args.out);
    manifest.write(&manifest_in_dir(&args.out))
}

pub fn targets(args: &TargetsArgs) -> Result<()> {
    let mut manifest = RunManifest::new("targets");
    let annotations = load_annotations(&args.gt)?;
    let sigma = args.sigma.unwrap_or(args.preset.sigma());
    let spec = TargetSpec::new(sigma, args.scale_exp, args.accumulation.to_lib(), !args.raw_peaks)?;
    let out_width = args.width >> args.scale_exp;
    let out_height = args.height >> args.scale_exp;
    let frames: Vec<usize> = if args.frame.is_empty() {
        let Some(max) = annotations.max_frame_index() else {
            return Err(Error::data("targets", "no annotations to render; pass --frame for empty maps"));
        };
        (0..=max).collect()
    } else {
        args.frame.clone()
    };
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    for &i in &frames {
        let points: Vec<(f64, f64)> =
            annotations.points_in_frame(i).iter().map(|&(x, y)| (f64::from(x), f64::from(y))).collect();
        let heatmap = heatmap_target(&points, &spec, out_width, out_height);
        let bytes: Vec<u8> =
            heatmap.data().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        save_frame_png(&GrayFrame::from_vec(out_width, out_height, bytes), args.out.join(frame_file_name(i)))?;
    }
    println!("rendered {} target maps ({out_width}x{out_height}) to {}", frames.len(), args.out.display());

    manifest.push_path("gt", &args.gt);
    manifest.push("sigma", sigma);
    manifest.push("scale_exp", args.scale_exp);
    manifest.push("accumulation", format!("{:?}", args.accumulation).to_lowercase());
    manifest.push("normalize_peak", !args.raw_peaks);
    manifest.push("seed", args.seed);
    manifest.push_path("out", &args.out);
    manifest.write(&manifest_in_dir(&args.out))
}

/// Training config shared by train, finetune, and the grid template.
#[allow(clippy::too_many_arguments)]
fn build_config(
    model: ModelKind,
    channels: usize,
    lr: f64,
    batch_size: usize,
    patience: usize,
    max_epochs: usize,
    augment: bool,
    sigma: f64,
    seed: u64,
) -> Result<TrainConfig> {
    let mut config = TrainConfig::new(model, channels)?;
    config.lr = lr;
    config.batch_size = batch_size;
    config.patience = patience;
    config.max_epochs = max_epochs;
    config.augment = augment;
    config.seed = seed;
    config.target = TargetSpec::new(sigma, config.target.downsample_exponent, Accumulation::Max, true)?;
    Ok(config)
}

fn save_training_outputs(out: &Path, weights: &ModelWeights, log: &TrainLog) -> Result<PathBuf> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let weights_path = out.join("weights.bin");
    weights.save(&weights_path)?;
    let log_path = out.join("train.log");
    std::fs::write(&log_path, log.to_text()).map_err(|e| Error::io(&log_path, e))?;
    Ok(weights_path)
}

fn log_summary(log: &TrainLog) -> String {
    let best_val = log.epochs.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
    let stop = match log.stop_reason {
        StopReason::Patience => "patience",
        StopReason::MaxEpochs => "max epochs",
    };
    format!(
        "best epoch {} of {} (val loss {:.3e}), stopped by {stop}",
        log.best_epoch,
        log.epochs.len(),
        best_val
    )
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let mut manifest = RunManifest::new("train");
    let ds = load_dataset(&args.data)?;
    let c = args.c.unwrap_or(ds.manifest.channels);
    let k = args.k.unwrap_or(ds.manifest.skip);
    let roobi = args.roobi.unwrap_or(ds.manifest.roobi_size);
    let sigma = args.sigma.unwrap_or(args.preset.sigma());
    let model = ModelKind::from_name(&args.model)?;

    let samples = stabilized_samples(&ds.frames, &ds.homographies, &ds.annotations, c, k, roobi)?;
    let (train_set, val_set) = split_train_val(samples, args.val_fraction, args.seed)?;
    let config = build_config(
        model,
        c,
        args.lr,
        args.batch_size,
        args.patience,
        args.max_epochs,
        args.augment,
        sigma,
        args.seed,
    )?;
    let (weights, log) = satvid::train::train(&config, &train_set, &val_set)?;
    let weights_path = save_training_outputs(&args.out, &weights, &log)?;
    println!(
        "trained {} c={c} on {} samples ({} val): {}",
        model.name(),
        train_set.len(),
        val_set.len(),
        log_summary(&log)
    );

    manifest.push_path("data", &args.data);
    manifest.push("model", model.name());
    manifest.push("c", c);
    manifest.push("k", k);
    manifest.push("roobi", roobi);
    manifest.push("lr", args.lr);
    manifest.push("batch_size", args.batch_size);
    manifest.push("patience", args.patience);
    manifest.push("max_epochs", args.max_epochs);
    manifest.push("augment", args.augment);
    manifest.push("val_fraction", args.val_fraction);
    manifest.push("sigma", sigma);
    manifest.push("seed", args.seed);
    manifest.push_path("weights", &weights_path);
    manifest.write(&manifest_in_dir(&args.out))
}

pub fn finetune(args: &FinetuneArgs) -> Result<()> {
    let mut manifest = RunManifest::new("finetune");
    if args.samples == 0 {
        return Err(Error::data("finetune", "need at least one sample"));
    }
    let pretrained = ModelWeights::load(&args.weights)?;
    let model = match &args.model {
        Some(name) => ModelKind::from_name(name)?,
        None => ModelKind::from_name(&pretrained.descriptor.name)?,
    };
    let c = args.c.unwrap_or(pretrained.descriptor.channels_in);
    let ds = load_dataset(&args.data)?;
    let k = args.k.unwrap_or(ds.manifest.skip);
    let roobi = args.roobi.unwrap_or(ds.manifest.roobi_size);
    let sigma = args.sigma.unwrap_or(args.preset.sigma());

    let samples = stabilized_samples(&ds.frames, &ds.homographies, &ds.annotations, c, k, roobi)?;
    if samples.len() < args.samples {
        return Err(Error::data(
            "finetune",
            format!("dataset yields {} samples, asked for {}", samples.len(), args.samples),
        ));
    }
    // Seeded uniform pick: sort indices by a derived per-index hash. The
    // few samples double as the validation set; fine-tuning never sees
    // more of the new domain than its sample budget.
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by_key(|&i| seeds::derive_indexed(args.seed, "finetune-pick", i as u64));
    let picked: Vec<TrainSample> = order[..args.samples].iter().map(|&i| samples[i].clone()).collect();

    let config = build_config(
        model,
        c,
        args.lr,
        args.batch_size,
        args.patience,
        args.max_epochs,
        args.augment,
        sigma,
        args.seed,
    )?;
    let (weights, log) = fine_tune(&args.weights, &picked, &picked, &config)?;
    let weights_path = save_training_outputs(&args.out, &weights, &log)?;
    println!("fine-tuned {} c={c} on {} samples: {}", model.name(), picked.len(), log_summary(&log));

    manifest.push_path("pretrained", &args.weights);
    manifest.push_path("data", &args.data);
    manifest.push("model", model.name());
    manifest.push("c", c);
    manifest.push("k", k);
    manifest.push("roobi", roobi);
    manifest.push("samples", args.samples);
    manifest.push("lr", args.lr);
    manifest.push("batch_size", args.batch_size);
    manifest.push("patience", args.patience);
    manifest.push("max_epochs", args.max_epochs);
    manifest.push("augment", args.augment);
    manifest.push("sigma", sigma);
    manifest.push("seed", args.seed);
    manifest.push_path("weights", &weights_path);
    manifest.write(&manifest_in_dir(&args.out))
}

pub fn detect(args: &DetectArgs) -> Result<()> {
    let mut manifest = RunManifest::new("detect");
    let weights = ModelWeights::load(&args.weights)?;
    let c = args.c.unwrap_or(weights.descriptor.channels_in);
    if c != weights.descriptor.channels_in {
        return Err(Error::data(
            "detect",
            format!("model has {} input channels, --c asked for {c}", weights.descriptor.channels_in),
        ));
    }
    let frames = load_frames_dir(&args.frames)?;
    let (width, height) = (frames[0].width(), frames[0].height());
    let roobi = args.roobi.unwrap_or(args.preset.roobi());
    let roobis = tile_roobis(width, height, roobi)?;
    let (stacks, summary) =
        satvid::dataio::make_stacks(&frames, &PointAnnotations::default(), c, args.k, &roobis)?;
    let ext = extractor(&args.method)?;
    let alpha_n = args.alpha_n.unwrap_or(args.preset.alpha_n());
    let alpha_o = args.alpha_o.unwrap_or(args.preset.alpha_o());
    let config = PostprocessConfig::new(&args.method, alpha_n, alpha_o)?;

    let mut records = Vec::new();
    for (stack, _) in &stacks {
        let heatmap = weights.forward_heatmap(&stack.to_tensor())?;
        for d in ext.extract(&heatmap, &config) {
            let x = d.x + stack.x0 as f32;
            let y = d.y + stack.y0 as f32;
            // Padded tiles extend past the frame; detections there are
            // artifacts of the padding.
            if x >= width as f32 || y >= height as f32 {
                continue;
            }
            records.push(AnnotationRecord { frame_index: stack.mid_frame_index, x, y, track_id: None });
        }
    }
    let count = records.len();
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    save_annotations(&args.out, &PointAnnotations::new(records)?)?;
    println!(
        "wrote {count} detections over {} stacks ({} edge frames skipped) to {}",
        stacks.len(),
        summary.skipped_mid_frames,
        args.out.display()
    );

    manifest.push_path("weights", &args.weights);
    manifest.push_path("frames", &args.frames);
    manifest.push("c", c);
    manifest.push("k", args.k);
    manifest.push("roobi", roobi);
    manifest.push("method", &args.method);
    manifest.push("alpha_n", alpha_n);
    manifest.push("alpha_o", alpha_o);
    manifest.push("seed", args.seed);
    manifest.push_path("out", &args.out);
    manifest.write(&manifest_beside_file(&args.out))
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let mut manifest = RunManifest::new("eval");
    let gt = load_annotations(&args.gt)?;
    let det = load_annotations(&args.det)?;
    let theta = positive_theta(args.theta.unwrap_or(args.preset.theta()), "eval")?;

    let mut frames: BTreeSet<usize> = BTreeSet::new();
    frames.extend(gt.records().iter().map(|r| r.frame_index));
    frames.extend(det.records().iter().map(|r| r.frame_index));
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for &i in &frames {
        let report = match_points(&det.points_in_frame(i), &gt.points_in_frame(i), theta);
        tp += report.tp;
        fp += report.fp;
        fn_ += report.fn_;
    }
    let (precision, recall, f1) = ratios(tp, fp, fn_);
    let report = format!(
        "theta={theta}\nframes={}\ntp={tp}\nfp={fp}\nfn={fn_}\nprecision={precision:.6}\nrecall={recall:.6}\nf1={f1:.6}\n",
        frames.len()
    );
    print!("{report}");
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(&args.out, &report).map_err(|e| Error::io(&args.out, e))?;

    manifest.push_path("gt", &args.gt);
    manifest.push_path("det", &args.det);
    manifest.push("theta", theta);
    manifest.push("seed", args.seed);
    manifest.push_path("out", &args.out);
    manifest.write(&manifest_beside_file(&args.out))
}

pub fn grid(args: &GridArgs) -> Result<()> {
    let mut manifest = RunManifest::new("grid");
    let ds = load_dataset(&args.data)?;
    let k = args.k.unwrap_or(ds.manifest.skip);
    let roobi = args.roobi.unwrap_or(ds.manifest.roobi_size);
    let theta = positive_theta(args.theta.unwrap_or(args.preset.theta()), "grid")?;
    let sigma = args.sigma.unwrap_or(args.preset.sigma());
    let alphas: Vec<f32> = if args.alphas.is_empty() {
        match args.method.as_str() {
            "otsu" => vec![args.preset.alpha_o()],
            _ => vec![args.preset.alpha_n()],
        }
    } else {
        args.alphas.clone()
    };
    let pretrained = parse_pretrained(&args.pretrained)?;

    // Stack depth is baked into the samples, so configs are grouped by
    // channel count and each group gets its own pool and splits.
    let mut groups: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
    for &id in &args.configs {
        let (_, channels, _) = grid_config(id)?;
        groups.entry(channels).or_default().push(id);
    }
    let mut merged = GridResults::default();
    for (&channels, ids) in &groups {
        let samples = stabilized_samples(&ds.frames, &ds.homographies, &ds.annotations, channels, k, roobi)?;
        let (rest, test) = split_train_val(samples, args.test_fraction, seeds::derive(args.seed, "grid-test"))?;
        let (pool, val) = split_train_val(rest, args.val_fraction, seeds::derive(args.seed, "grid-val"))?;
        let template = build_config(
            ModelKind::FoveaNet4Sat,
            channels,
            args.lr,
            args.batch_size,
            args.patience,
            args.max_epochs,
            args.augment,
            sigma,
            args.seed,
        )?;
        let spec = GridSpec {
            configs: ids.clone(),
            sample_counts: args.sample_counts.clone(),
            repeats: args.repeats,
            base_seed: args.seed,
            template,
            theta,
            method: args.method.clone(),
            alphas: alphas.clone(),
        };
        let data = GridData { pool: &pool, val: &val, test: &test, pretrained: &pretrained };
        let results = run_config_grid(&spec, &data);
        merged.rows.extend(results.rows);
        merged.failures.extend(results.failures);
    }

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let csv_path = args.out.join("grid_results.csv");
    std::fs::write(&csv_path, merged.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
    for (config, n, mean, std) in merged.summarize() {
        println!("config {config} n={n}: F1 {mean:.3} ({std:.3})");
    }
    for failure in &merged.failures {
        eprintln!("cell failed: {failure}");
    }

    manifest.push_path("data", &args.data);
    manifest.push("configs", join(&args.configs));
    manifest.push("sample_counts", join(&args.sample_counts));
    manifest.push("repeats", args.repeats);
    manifest.push("k", k);
    manifest.push("roobi", roobi);
    manifest.push("theta", theta);
    manifest.push("method", &args.method);
    manifest.push("alphas", join(&alphas));
    manifest.push("lr", args.lr);
    manifest.push("batch_size", args.batch_size);
    manifest.push("patience", args.patience);
    manifest.push("max_epochs", args.max_epochs);
    manifest.push("augment", args.augment);
    manifest.push("sigma", sigma);
    manifest.push("val_fraction", args.val_fraction);
    manifest.push("test_fraction", args.test_fraction);
    manifest.push("cells_failed", merged.failures.len());
    manifest.push("seed", args.seed);
    manifest.push_path("out", &args.out);
    manifest.write(&manifest_in_dir(&args.out))
}

pub fn plot(args: &PlotArgs) -> Result<()> {
    let mut manifest = RunManifest::new("plot");
    let files = list_frame_files(&args.frames)?;
    if files.is_empty() {
        return Err(Error::data("plot", format!("no numbered .png frames in {}", args.frames.display())));
    }
    let gt = load_annotations(&args.gt)?;
    let det = load_annotations(&args.det)?;
    let theta = positive_theta(args.theta.unwrap_or(args.preset.theta()), "plot")?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;

    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for path in &files {
        let index: usize = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse().ok())
            .expect("list_frame_files yields numeric stems");
        let frame = load_frame_png(path)?;
        let report = match_points(&det.points_in_frame(index), &gt.points_in_frame(index), theta);
        tp += report.tp;
        fp += report.fp;
        fn_ += report.fn_;
        let image = overlay(&frame, &report, theta);
        let out_path = args.out.join(frame_file_name(index));
        image.save(&out_path).map_err(|e| Error::data("plot", format!("{}: {e}", out_path.display())))?;
    }
    println!("wrote {} overlays ({tp} tp, {fp} fp, {fn_} fn markers) to {}", files.len(), args.out.display());

    manifest.push_path("frames", &args.frames);
    manifest.push_path("gt", &args.gt);
    manifest.push_path("det", &args.det);
    manifest.push("theta", theta);
    manifest.push("seed", args.seed);
    manifest.push_path("out", &args.out);
    manifest.write(&manifest_in_dir(&args.out))
}

fn positive_theta(theta: f32, context: &str) -> Result<f32> {
    if !(theta > 0.0) {
        return Err(Error::data(context, format!("theta must be positive, got {theta}")));
    }
    Ok(theta)
}

fn parse_pretrained(entries: &[String]) -> Result<HashMap<(ModelKind, usize), PathBuf>> {
    let mut map = HashMap::new();
    for entry in entries {
        let invalid = || Error::data("grid", format!("--pretrained wants model:channels=path, got {entry}"));
        let (key, path) = entry.split_once('=').ok_or_else(invalid)?;
        let (model, channels) = key.split_once(':').ok_or_else(invalid)?;
        let model = ModelKind::from_name(model)?;
        let channels: usize = channels.parse().map_err(|_| invalid())?;
        map.insert((model, channels), PathBuf::from(path));
    }
    Ok(map)
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
