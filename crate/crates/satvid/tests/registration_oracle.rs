//! Registration accuracy against known ground-truth homographies: first at
//! the match level (noisy correspondences with outliers), then end to end on
//! rendered synthetic sequences.

mod common;

use common::{corner_error, jitter_matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use satvid::register::{register_sequence, robust_homography, RegistrationParams};
use satvid::synth::{generate, ScenarioSpec};
use satvid::GrayFrame;

#[test]
fn robust_homography_survives_noise_and_outliers() {
    let (w, h) = (192.0f64, 192.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(0x726567);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let mut corner_errors = Vec::new();
    let mut recoveries = Vec::new();
    for pair in 0..50u64 {
        let truth = jitter_matrix(&mut rng, w, h);
        let n = 200usize;
        let n_outliers = 60usize;
        let mut matches = Vec::with_capacity(n);
        let mut true_inlier = Vec::with_capacity(n);
        for i in 0..n {
            let src = (rng.gen_range(0.0..w), rng.gen_range(0.0..h));
            if i < n_outliers {
                matches.push((src, (rng.gen_range(0.0..w), rng.gen_range(0.0..h))));
                true_inlier.push(false);
            } else {
                let (dx, dy) = truth.apply(src.0, src.1);
                matches.push((src, (dx + noise.sample(&mut rng), dy + noise.sample(&mut rng))));
                true_inlier.push(true);
            }
        }
        // Threshold 2 px = 4 sigma of the per-axis noise, so essentially all
        // true inliers fall inside while random outliers almost never do.
        let (estimate, mask) = robust_homography(&matches, 2.0, 2000, 900 + pair).unwrap();
        corner_errors.push(corner_error(&estimate, &truth, w, h));
        let recovered = mask.iter().zip(&true_inlier).filter(|&(m, t)| *m && *t).count();
        let total_true = true_inlier.iter().filter(|t| **t).count();
        recoveries.push(recovered as f64 / total_true as f64);
    }
    let mean_corner = corner_errors.iter().sum::<f64>() / corner_errors.len() as f64;
    let mean_recovery = recoveries.iter().sum::<f64>() / recoveries.len() as f64;
    assert!(mean_corner < 0.5, "mean corner reprojection error {mean_corner:.4} px");
    assert!(mean_recovery >= 0.95, "mean inlier recovery {mean_recovery:.4}");
}

#[test]
fn exact_matches_recover_homography_to_1e6() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = jitter_matrix(&mut rng, 192.0, 192.0);
    let matches: Vec<_> = (0..40)
        .map(|_| {
            let src = (rng.gen_range(0.0..192.0), rng.gen_range(0.0..192.0));
            (src, truth.apply(src.0, src.1))
        })
        .collect();
    let (estimate, mask) = robust_homography(&matches, 1.0, 500, 7).unwrap();
    assert!(corner_error(&estimate, &truth, 192.0, 192.0) < 1e-6);
    assert!(mask.iter().all(|&m| m));
}

#[test]
fn register_sequence_recovers_synthetic_jitter() {
    let mut spec = ScenarioSpec::default_scene(0x5e9);
    spec.frame_count = 8;
    let data = generate(&spec).unwrap();
    let registered = register_sequence(&data.frames, 0, &RegistrationParams::default()).unwrap();
    assert_eq!(registered.len(), data.frames.len());
    let w = data.frames[0].width() as f64;
    let h = data.frames[0].height() as f64;
    let mut worst = 0.0f64;
    for (i, reg) in registered.iter().enumerate() {
        let err = corner_error(&reg.homography, &data.homographies[i], w, h);
        worst = worst.max(err);
        assert!(err < 0.5, "frame {i}: corner error {err:.3} px");
    }
    println!("worst corner error {worst:.3} px");
}

#[test]
fn black_frame_failure_names_the_frame() {
    let mut spec = ScenarioSpec::default_scene(21);
    spec.frame_count = 3;
    let mut frames = generate(&spec).unwrap().frames;
    frames[2] = GrayFrame::new(frames[0].width(), frames[0].height());
    let Err(err) = register_sequence(&frames, 0, &RegistrationParams::default()) else {
        panic!("registration against a black frame should fail");
    };
    assert!(err.to_string().contains("frame 2"), "error was: {err}");
}
