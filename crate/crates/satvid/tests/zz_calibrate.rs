//! Throwaway calibration harness for the end-to-end training recipe.
//! Run explicitly: cargo test -p satvid --test zz_calibrate -- --ignored --nocapture

use satvid::seeds;
use satvid::synth::{generate, ScenarioSpec};
use satvid::train::{
    best_f1, evaluate_model, fine_tune, stabilized_samples, train, ModelKind, TrainConfig, TrainMode,
    TrainSample,
};
use std::time::Instant;

fn scene_samples(seed: u64, channels: usize) -> Vec<TrainSample> {
    let spec = ScenarioSpec::default_scene(seed);
    let data = generate(&spec).unwrap();
    stabilized_samples(&data.frames, &data.homographies, &data.annotations, channels, 1, 64).unwrap()
}

fn sweep() -> Vec<f32> {
    (1..=18).map(|i| i as f32 * 0.05).collect()
}

#[test]
#[ignore]
fn calibrate_step_cost() {
    let samples = scene_samples(seeds::derive(1, "train-scene"), 3);
    let mut config = TrainConfig::new(ModelKind::FoveaNet4Sat, 3).unwrap();
    config.lr = 1e-4;
    config.batch_size = 1;
    config.max_epochs = 1;
    config.seed = 7;
    let t0 = Instant::now();
    let n = 20;
    let (_, log) = train(&config, &samples[..n], &samples[n..n + 4]).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!("{} steps in {dt:.1}s => {:.3}s/step (epoch stats: {:?})", n, dt / n as f64, log.epochs);
}

#[test]
#[ignore]
fn calibrate_learning_curve() {
    let channels = 3usize;
    let mut pool: Vec<TrainSample> = Vec::new();
    for i in 0..5u64 {
        pool.extend(scene_samples(seeds::derive(1, &format!("train-scene-{i}")), channels));
    }
    let test = scene_samples(seeds::derive(1, "test-scene"), channels);
    println!("pool {} samples, test {}", pool.len(), test.len());

    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("ckpt.fvw");
    let chunk = 500usize;
    let mut trained = 0usize;
    let mut config = TrainConfig::new(ModelKind::FoveaNet4Sat, channels).unwrap();
    config.lr = 1e-4;
    config.batch_size = 1;
    config.max_epochs = 1;
    config.seed = 11;

    let t0 = Instant::now();
    while trained < pool.len() {
        let hi = (trained + chunk).min(pool.len());
        let part = &pool[trained..hi];
        let val = &test[..24];
        let result = if trained == 0 {
            train(&config, part, val)
        } else {
            config.mode = TrainMode::FineTune(ckpt.clone());
            train(&config, part, val)
        };
        let (weights, log) = result.unwrap();
        weights.save(&ckpt).unwrap();
        trained = hi;

        let te = Instant::now();
        let points = evaluate_model(&weights, &test, 4.0, "nms", &sweep()).unwrap();
        let best = best_f1(&points).unwrap();
        println!(
            "steps={trained} wall={:.0}s eval={:.0}s train_loss={:.3e} val_loss={:.3e} best_f1={:.3} (alpha={:.2} tp={} fp={} fn={})",
            t0.elapsed().as_secs_f64(),
            te.elapsed().as_secs_f64(),
            log.epochs.last().unwrap().train_loss,
            log.epochs.last().unwrap().val_loss,
            best.f1,
            best.alpha,
            best.tp,
            best.fp,
            best.fn_
        );
    }
    let _ = fine_tune; // keep the import alive for variants of this probe
}

#[test]
#[ignore]
fn calibrate_full_recipe_lr3() {
    let channels = 3usize;
    let mut pool: Vec<TrainSample> = Vec::new();
    for i in 0..5u64 {
        pool.extend(scene_samples(seeds::derive(1, &format!("train-scene-{i}")), channels));
    }
    let test = scene_samples(seeds::derive(1, "test-scene"), channels);
    println!("pool {} samples, test {}", pool.len(), test.len());

    let mut config = TrainConfig::new(ModelKind::FoveaNet4Sat, channels).unwrap();
    config.lr = 3e-4;
    config.batch_size = 1;
    config.max_epochs = 1;
    config.seed = 11;

    let t0 = Instant::now();
    let (weights, log) = train(&config, &pool, &test[..24]).unwrap();
    let train_wall = t0.elapsed().as_secs_f64();
    let te = Instant::now();
    let points = evaluate_model(&weights, &test, 4.0, "nms", &sweep()).unwrap();
    let best = best_f1(&points).unwrap();
    println!(
        "lr=3e-4 steps={} wall={train_wall:.0}s eval={:.0}s train_loss={:.3e} val_loss={:.3e} best_f1={:.3} (alpha={:.2} tp={} fp={} fn={})",
        pool.len(),
        te.elapsed().as_secs_f64(),
        log.epochs.last().unwrap().train_loss,
        log.epochs.last().unwrap().val_loss,
        best.f1,
        best.alpha,
        best.tp,
        best.fp,
        best.fn_
    );
}
