//! Trainer behavior on real generated data: losses descend, runs are
//! reproducible bit for bit, and architecture mismatches are rejected with
//! a usable message.

use satvid::model::{build, ArchDescriptor};
use satvid::synth::{generate, ScenarioSpec};
use satvid::train::{fine_tune, stabilized_samples, train, ModelKind, TrainConfig, TrainSample};

/// Small single-channel 32x32 sample set; cheap enough for repeated runs.
fn small_samples(seed: u64, frame_count: usize) -> Vec<TrainSample> {
    let mut spec = ScenarioSpec::default_scene(seed);
    spec.frame_count = frame_count;
    let data = generate(&spec).unwrap();
    stabilized_samples(&data.frames, &data.homographies, &data.annotations, 1, 1, 32).unwrap()
}

fn small_config(seed: u64) -> TrainConfig {
    let mut config = TrainConfig::new(ModelKind::FoveaNet4Sat, 1).unwrap();
    config.lr = 1e-4;
    config.batch_size = 4;
    config.max_epochs = 3;
    config.seed = seed;
    config
}

#[test]
fn training_descends_on_generated_scenes() {
    let samples = small_samples(0xBEEF, 2);
    assert!(samples.len() >= 40, "expected a full tile grid, got {}", samples.len());
    let (train_set, val_set) = (&samples[..32], &samples[32..40]);
    let (weights, log) = train(&small_config(1), train_set, val_set).unwrap();

    assert_eq!(log.epochs.len(), 3);
    let first = log.epochs.first().unwrap().train_loss;
    let last = log.epochs.last().unwrap().train_loss;
    assert!(last < first, "loss did not descend: {first:.3e} -> {last:.3e}");
    assert!(log.epochs.iter().all(|e| e.train_loss.is_finite() && e.val_loss.is_finite()));
    assert_eq!(weights.descriptor, ArchDescriptor::foveanet4sat(1).unwrap());
}

#[test]
fn fixed_seed_reproduces_the_loss_series() {
    let samples = small_samples(0xD0, 2);
    let (train_set, val_set) = (&samples[..12], &samples[12..16]);
    let mut config = small_config(9);
    config.max_epochs = 2;
    config.augment = true;
    let (_, log_a) = train(&config, train_set, val_set).unwrap();
    let (_, log_b) = train(&config, train_set, val_set).unwrap();
    for (a, b) in log_a.epochs.iter().zip(&log_b.epochs) {
        assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits(), "epoch {}", a.epoch);
        assert_eq!(a.val_loss.to_bits(), b.val_loss.to_bits(), "epoch {}", a.epoch);
    }
}

#[test]
fn finetune_rejects_channel_mismatch_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("single-channel.fvw");
    build(&ArchDescriptor::foveanet4sat(1).unwrap(), 5).unwrap().save(&path).unwrap();

    let mut spec = ScenarioSpec::default_scene(2);
    spec.frame_count = 3;
    let data = generate(&spec).unwrap();
    let samples =
        stabilized_samples(&data.frames, &data.homographies, &data.annotations, 3, 1, 32).unwrap();

    let mut config = small_config(3);
    config.channels = 3;
    config.target.downsample_exponent = 0;
    let err = fine_tune(&path, &samples[..4], &samples[4..6], &config).unwrap_err();
    let message = err.to_string();
    assert!(message.contains("input channels"), "unhelpful error: {message}");
}
