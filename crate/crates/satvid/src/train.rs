//! Training orchestration: scratch training, fine-tuning, early stopping,
//! and the desk-scale configuration grid.

use crate::dataio::augment::{augment, random_op};
use crate::dataio::stacks::FrameStack;
use crate::dataio::tiles::tile_roobis;
use crate::error::{Error, Result};
use crate::evaluate::{match_points, ratios};
use crate::frame::GrayFrame;
use crate::model::{build, ArchDescriptor, Gradients, ModelWeights};
use crate::postprocess::{extractor, PostprocessConfig};
use crate::register::{warp, Homography};
use crate::seeds;
use crate::targets::{heatmap_target, TargetSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;
use tensorkit::{adam_step, mse_loss, mse_loss_backward, AdamConfig, AdamState, Tensor4};

/// The two architectures, as grid-selectable names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    FoveaNet,
    FoveaNet4Sat,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FoveaNet => "foveanet",
            ModelKind::FoveaNet4Sat => "foveanet4sat",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "foveanet" => Ok(ModelKind::FoveaNet),
            "foveanet4sat" => Ok(ModelKind::FoveaNet4Sat),
            other => Err(Error::data("ModelKind", format!("unknown model `{other}`"))),
        }
    }

    pub fn descriptor(self, channels: usize) -> Result<ArchDescriptor> {
        ArchDescriptor::by_name(self.name(), channels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainMode {
    Scratch,
    FineTune(PathBuf),
}

/// Loss selector; mean squared error is the only implemented regression
/// loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossId {
    #[default]
    Mse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub channels: usize,
    pub mode: TrainMode,
    pub lr: f64,
    pub batch_size: usize,
    /// Epochs of non-improving validation loss tolerated before stopping.
    /// Improvement means a decrease of at least 1e-7.
    pub patience: usize,
    pub max_epochs: usize,
    pub augment: bool,
    pub seed: u64,
    pub target: TargetSpec,
    pub loss: LossId,
}

impl TrainConfig {
    /// Reference defaults: Adam at 1e-5, batch 32, patience 100.
    pub fn new(model: ModelKind, channels: usize) -> Result<Self> {
        let descriptor = model.descriptor(channels)?;
        let mut target = TargetSpec::training_default(1.0)?;
        target.downsample_exponent = descriptor.output_scale_exp();
        Ok(TrainConfig {
            model,
            channels,
            mode: TrainMode::Scratch,
            lr: 1e-5,
            batch_size: 32,
            patience: 100,
            max_epochs: 10_000,
            augment: false,
            seed: 0,
            target,
            loss: LossId::Mse,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.lr <= 0.0 || !self.lr.is_finite() {
            return Err(Error::data("TrainConfig", format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.batch_size == 0 || self.patience == 0 || self.max_epochs == 0 {
            return Err(Error::data("TrainConfig", "batch size, patience, and max epochs must be at least 1"));
        }
        Ok(())
    }
}

/// One training sample: an input stack and its mid-frame points in tile
/// coordinates. Targets are rendered from the points on demand, so
/// augmentation stays consistent between image and label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub stack: FrameStack,
    pub points: Vec<(f32, f32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

impl StopReason {
    fn as_str(self) -> &'static str {
        match self {
            StopReason::Patience => "patience",
            StopReason::MaxEpochs => "max_epochs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_secs: f64,
}

/// Append-only record of a run. The best epoch always corresponds to the
/// minimum recorded validation loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    pub best_epoch: usize,
    pub stop_reason: StopReason,
    pub weights_path: Option<String>,
}

impl TrainLog {
    /// Line-oriented text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            out.push_str(&format!(
                "epoch={} train_loss={:.9e} val_loss={:.9e} wall_secs={:.3}\n",
                e.epoch, e.train_loss, e.val_loss, e.wall_secs
            ));
        }
        out.push_str(&format!("best_epoch={}\n", self.best_epoch));
        out.push_str(&format!("stop_reason={}\n", self.stop_reason.as_str()));
        if let Some(p) = &self.weights_path {
            out.push_str(&format!("weights={p}\n"));
        }
        out
    }
}

/// Target heatmap for a tile's points, as a model-output-shaped tensor.
pub fn target_tensor(points: &[(f32, f32)], spec: &TargetSpec, tile_size: usize) -> Tensor4 {
    let scale = 1usize << spec.downsample_exponent;
    let side = tile_size.div_ceil(scale);
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (f64::from(x), f64::from(y))).collect();
    let hm = heatmap_target(&pts, spec, side, side);
    Tensor4::from_vec([1, 1, side, side], hm.data().to_vec()).expect("heatmap fills its tensor")
}

fn mean_val_loss(weights: &ModelWeights, samples: &[TrainSample], spec: &TargetSpec) -> Result<f64> {
    let mut acc = 0.0f64;
    for s in samples {
        let pred = weights.forward(&s.stack.to_tensor(), false, 0)?;
        let target = target_tensor(&s.points, spec, s.stack.size);
        acc += f64::from(mse_loss(&pred, &target)?);
    }
    Ok(acc / samples.len() as f64)
}

/// Trains per the config: Adam over shuffled mini-batches, validation each
/// epoch, early stopping on `patience` non-improving epochs, best-epoch
/// weights returned. Divergence to NaN aborts with a diagnostic.
pub fn train(
    config: &TrainConfig,
    train_samples: &[TrainSample],
    val_samples: &[TrainSample],
) -> Result<(ModelWeights, TrainLog)> {
    config.validate()?;
    if train_samples.is_empty() {
        return Err(Error::data("train", "no training samples"));
    }
    if val_samples.is_empty() {
        return Err(Error::data("train", "validation set is empty"));
    }
    let descriptor = config.model.descriptor(config.channels)?;
    if config.target.downsample_exponent != descriptor.output_scale_exp() {
        return Err(Error::data(
            "train",
            format!(
                "target downsample exponent {} does not match the architecture's output scale {}",
                config.target.downsample_exponent,
                descriptor.output_scale_exp()
            ),
        ));
    }
    let mut weights = match &config.mode {
        TrainMode::Scratch => build(&descriptor, seeds::derive(config.seed, "init"))?,
        TrainMode::FineTune(path) => ModelWeights::load_expecting(path, &descriptor)?,
    };

    let param_sizes: Vec<usize> = weights
        .kernels
        .iter()
        .zip(&weights.biases)
        .flat_map(|(k, b)| [k.data().len(), b.len()])
        .collect();
    let mut adam = AdamState::<f32>::new(&param_sizes, AdamConfig { lr: config.lr, ..AdamConfig::default() });

    let mut log = TrainLog { epochs: Vec::new(), best_epoch: 0, stop_reason: StopReason::MaxEpochs, weights_path: None };
    let mut best: Option<(ModelWeights, f64)> = None;
    let mut stale_epochs = 0usize;

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        let mut order: Vec<usize> = (0..train_samples.len()).collect();
        let mut shuffle_rng =
            ChaCha8Rng::seed_from_u64(seeds::derive_indexed(config.seed, "shuffle", epoch as u64));
        order.shuffle(&mut shuffle_rng);
        let mut augment_rng =
            ChaCha8Rng::seed_from_u64(seeds::derive_indexed(config.seed, "augment", epoch as u64));

        let mut loss_acc = 0.0f64;
        for batch in order.chunks(config.batch_size) {
            let mut grads = Gradients::zeros_like(&weights);
            for &i in batch {
                let sample = &train_samples[i];
                let (stack, points);
                let (stack_ref, points_ref): (&FrameStack, &[(f32, f32)]) = if config.augment {
                    let apply: bool = rand::Rng::gen_bool(&mut augment_rng, 0.5);
                    let op = random_op(&mut augment_rng);
                    if apply {
                        let out = augment(&sample.stack, &sample.points, op);
                        stack = out.0;
                        points = out.1;
                        (&stack, &points)
                    } else {
                        (&sample.stack, &sample.points)
                    }
                } else {
                    (&sample.stack, &sample.points)
                };
                let input = stack_ref.to_tensor();
                let dropout_seed =
                    seeds::derive_indexed(config.seed, "dropout", (epoch as u64) * 1_000_003 + i as u64);
                let (pred, trace) = weights.forward_trace(&input, true, dropout_seed)?;
                let target = target_tensor(points_ref, &config.target, stack_ref.size);
                let loss = f64::from(mse_loss(&pred, &target)?);
                if !loss.is_finite() {
                    return Err(Error::numeric("train", format!("loss diverged to {loss} at epoch {epoch}")));
                }
                loss_acc += loss;
                let grad_out = mse_loss_backward(&pred, &target)?;
                grads.add_assign(&weights.backward(&trace, &grad_out)?);
            }
            let inv = 1.0 / batch.len() as f32;
            for k in &mut grads.kernels {
                for v in k.data_mut() {
                    *v *= inv;
                }
            }
            for b in &mut grads.biases {
                for v in b {
                    *v *= inv;
                }
            }
            let mut params: Vec<&mut [f32]> = Vec::with_capacity(param_sizes.len());
            let mut grad_slices: Vec<&[f32]> = Vec::with_capacity(param_sizes.len());
            for (k, b) in grads.kernels.iter().zip(&grads.biases) {
                grad_slices.push(k.data());
                grad_slices.push(b.as_slice());
            }
            for (k, b) in weights.kernels.iter_mut().zip(&mut weights.biases) {
                params.push(k.data_mut());
                params.push(b.as_mut_slice());
            }
            adam_step(&mut adam, &mut params, &grad_slices)?;
        }

        let train_loss = loss_acc / train_samples.len() as f64;
        let val_loss = mean_val_loss(&weights, val_samples, &config.target)?;
        if !val_loss.is_finite() {
            return Err(Error::numeric("train", format!("validation loss diverged to {val_loss} at epoch {epoch}")));
        }
        log.epochs.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            wall_secs: started.elapsed().as_secs_f64(),
        });

        let improved = match &best {
            None => true,
            Some((_, best_val)) => best_val - val_loss >= 1e-7,
        };
        if improved {
            best = Some((weights.clone(), val_loss));
            log.best_epoch = epoch;
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= config.patience {
                log.stop_reason = StopReason::Patience;
                break;
            }
        }
    }

    let (best_weights, _) = best.expect("at least one epoch ran");
    Ok((best_weights, log))
}

/// Fine-tuning: the identical loop, initialized from `pretrained`, all
/// layers trainable. `samples` is the (small) labeled set; validation runs
/// on `val_samples`.
pub fn fine_tune(
    pretrained: &Path,
    samples: &[TrainSample],
    val_samples: &[TrainSample],
    config: &TrainConfig,
) -> Result<(ModelWeights, TrainLog)> {
    if samples.is_empty() {
        return Err(Error::data("fine_tune", "need at least one sample"));
    }
    let mut cfg = config.clone();
    cfg.mode = TrainMode::FineTune(pretrained.to_path_buf());
    train(&cfg, samples, val_samples)
}

/// Pooled detection quality of one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub alpha: f32,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Runs the model over the samples once, then sweeps the extractor
/// threshold: `alphas` are alpha_N values for `nms`, alpha_O values for
/// `otsu`. Counts are pooled over all samples (micro-average).
pub fn evaluate_model(
    weights: &ModelWeights,
    samples: &[TrainSample],
    theta: f32,
    method: &str,
    alphas: &[f32],
) -> Result<Vec<EvalPoint>> {
    if alphas.is_empty() {
        return Err(Error::data("evaluate_model", "no thresholds to sweep"));
    }
    let ext = extractor(method)?;
    let mut heatmaps = Vec::with_capacity(samples.len());
    for s in samples {
        heatmaps.push(weights.forward_heatmap(&s.stack.to_tensor())?);
    }
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let config = match method {
            "nms" => PostprocessConfig::new(method, alpha, 3.5)?,
            _ => PostprocessConfig::new(method, 0.5, alpha)?,
        };
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (hm, s) in heatmaps.iter().zip(samples) {
            let detections = ext.extract(hm, &config);
            let points: Vec<(f32, f32)> = detections.iter().map(|d| (d.x, d.y)).collect();
            let report = match_points(&points, &s.points, theta);
            tp += report.tp;
            fp += report.fp;
            fn_ += report.fn_;
        }
        let (precision, recall, f1) = ratios(tp, fp, fn_);
        out.push(EvalPoint { alpha, tp, fp, fn_, precision, recall, f1 });
    }
    Ok(out)
}

/// The sweep point with the highest F1 (first on ties).
pub fn best_f1(points: &[EvalPoint]) -> Option<&EvalPoint> {
    points.iter().max_by(|a, b| a.f1.partial_cmp(&b.f1).expect("finite f1").then(std::cmp::Ordering::Greater))
}

/// Stabilizes frames with their (true or estimated) homographies, tiles
/// them, and assembles training samples.
pub fn stabilized_samples(
    frames: &[GrayFrame],
    homographies: &[Homography],
    annotations: &crate::dataio::annotations::PointAnnotations,
    c: usize,
    skip_k: usize,
    tile_size: usize,
) -> Result<Vec<TrainSample>> {
    if frames.len() != homographies.len() {
        return Err(Error::data(
            "stabilized_samples",
            format!("{} frames but {} homographies", frames.len(), homographies.len()),
        ));
    }
    if frames.is_empty() {
        return Err(Error::data("stabilized_samples", "no frames"));
    }
    let (w, h) = (frames[0].width(), frames[0].height());
    let stabilized: Vec<GrayFrame> =
        frames.iter().zip(homographies).map(|(f, hom)| warp(f, hom, w, h).0).collect();
    let roobis = tile_roobis(w, h, tile_size)?;
    let (samples, _) = crate::dataio::stacks::make_stacks(&stabilized, annotations, c, skip_k, &roobis)?;
    Ok(samples.into_iter().map(|(stack, points)| TrainSample { stack, points }).collect())
}

/// Seeded shuffle split; `val_fraction` of the samples (at least one)
/// becomes the validation set.
pub fn split_train_val(
    mut samples: Vec<TrainSample>,
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<TrainSample>, Vec<TrainSample>)> {
    if samples.len() < 2 {
        return Err(Error::data("split_train_val", "need at least two samples to split"));
    }
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(Error::data("split_train_val", format!("val fraction {val_fraction} not in [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, "train-val-split"));
    samples.shuffle(&mut rng);
    let n_val = ((samples.len() as f64 * val_fraction).round() as usize).clamp(1, samples.len() - 1);
    let train = samples.split_off(n_val);
    Ok((train, samples))
}

/// Grid config ids follow the fixed table: models alternate blocks of
/// four (foveanet 1-4, foveanet4sat 5-8); within a block, channels
/// alternate 3, 5 and the second pair fine-tunes.
pub fn grid_config(id: u8) -> Result<(ModelKind, usize, bool)> {
    match id {
        1 => Ok((ModelKind::FoveaNet, 3, false)),
        2 => Ok((ModelKind::FoveaNet, 5, false)),
        3 => Ok((ModelKind::FoveaNet, 3, true)),
        4 => Ok((ModelKind::FoveaNet, 5, true)),
        5 => Ok((ModelKind::FoveaNet4Sat, 3, false)),
        6 => Ok((ModelKind::FoveaNet4Sat, 5, false)),
        7 => Ok((ModelKind::FoveaNet4Sat, 3, true)),
        8 => Ok((ModelKind::FoveaNet4Sat, 5, true)),
        other => Err(Error::data("grid_config", format!("config id {other} outside 1..=8"))),
    }
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub configs: Vec<u8>,
    pub sample_counts: Vec<usize>,
    pub repeats: usize,
    pub base_seed: u64,
    /// Training hyperparameters shared by every cell; model, channels,
    /// mode, and seed are overwritten per cell.
    pub template: TrainConfig,
    pub theta: f32,
    pub method: String,
    pub alphas: Vec<f32>,
}

pub struct GridData<'a> {
    pub pool: &'a [TrainSample],
    pub val: &'a [TrainSample],
    pub test: &'a [TrainSample],
    /// Pretrained weights per (model, channels), for fine-tune configs.
    pub pretrained: &'a HashMap<(ModelKind, usize), PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub config: u8,
    pub n_samples: usize,
    pub repeat: usize,
    pub seed: u64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Default)]
pub struct GridResults {
    pub rows: Vec<GridRow>,
    pub failures: Vec<String>,
}

impl GridResults {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,n_samples,repeat,f1,precision,recall,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6},{}\n",
                r.config, r.n_samples, r.repeat, r.f1, r.precision, r.recall, r.seed
            ));
        }
        out
    }

    /// Mean and sample standard deviation of F1 per (config, sample
    /// count), in first-appearance order.
    pub fn summarize(&self) -> Vec<(u8, usize, f64, f64)> {
        let mut keys: Vec<(u8, usize)> = Vec::new();
        for r in &self.rows {
            if !keys.contains(&(r.config, r.n_samples)) {
                keys.push((r.config, r.n_samples));
            }
        }
        keys.iter()
            .map(|&(c, n)| {
                let f1s: Vec<f64> =
                    self.rows.iter().filter(|r| r.config == c && r.n_samples == n).map(|r| r.f1).collect();
                let mean = f1s.iter().sum::<f64>() / f1s.len() as f64;
                let std = if f1s.len() > 1 {
                    (f1s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (f1s.len() - 1) as f64).sqrt()
                } else {
                    0.0
                };
                (c, n, mean, std)
            })
            .collect()
    }
}

/// Runs every (config, sample count, repeat) cell with derived seeds.
/// Failing cells are recorded and the grid continues.
pub fn run_config_grid(spec: &GridSpec, data: &GridData) -> GridResults {
    let mut results = GridResults::default();
    for &config_id in &spec.configs {
        for &n in &spec.sample_counts {
            for repeat in 0..spec.repeats {
                let cell = format!("config {config_id}, n={n}, repeat {repeat}");
                let code =
                    (u64::from(config_id) << 40) | ((n as u64 & 0xFFFFF) << 20) | (repeat as u64 & 0xFFFFF);
                let seed = seeds::derive_indexed(spec.base_seed, "grid-cell", code);
                match run_grid_cell(spec, data, config_id, n, seed) {
                    Ok((f1, precision, recall)) => results.rows.push(GridRow {
                        config: config_id,
                        n_samples: n,
                        repeat,
                        seed,
                        f1,
                        precision,
                        recall,
                    }),
                    Err(e) => results.failures.push(format!("{cell}: {e}")),
                }
            }
        }
    }
    results
}

fn run_grid_cell(
    spec: &GridSpec,
    data: &GridData,
    config_id: u8,
    n: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let (model, channels, fine_tuned) = grid_config(config_id)?;
    if n == 0 || n > data.pool.len() {
        return Err(Error::data("run_config_grid", format!("cannot draw {n} of {} samples", data.pool.len())));
    }
    let mut indices: Vec<usize> = (0..data.pool.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, "subsample"));
    indices.shuffle(&mut rng);
    let subset: Vec<TrainSample> = indices[..n].iter().map(|&i| data.pool[i].clone()).collect();

    let mut config = spec.template.clone();
    config.model = model;
    config.channels = channels;
    config.seed = seed;
    let descriptor = model.descriptor(channels)?;
    config.target.downsample_exponent = descriptor.output_scale_exp();
    config.mode = if fine_tuned {
        let path = data.pretrained.get(&(model, channels)).ok_or_else(|| {
            Error::data("run_config_grid", format!("no pretrained weights for {} c={channels}", model.name()))
        })?;
        TrainMode::FineTune(path.clone())
    } else {
        TrainMode::Scratch
    };

    let (weights, _) = train(&config, &subset, data.val)?;
    let points = evaluate_model(&weights, data.test, spec.theta, &spec.method, &spec.alphas)?;
    let best = best_f1(&points).expect("sweep is non-empty");
    Ok((best.f1, best.precision, best.recall))
}
