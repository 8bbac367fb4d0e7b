//! Independent reference implementations shared by the oracle tests and the
//! acceptance target. None of these share code with the production kernels
//! they check: each re-derives its answer directly from the definition.

#![allow(dead_code)] // each test binary uses its own subset

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satvid::evaluate::Point;
use satvid::register::Homography;

/// Per-pixel Gaussian target reference with the same 6-sigma support cutoff
/// as production; beyond it contributions are defined to be exactly zero.
pub fn naive_target(
    points: &[(f64, f64)],
    sigma: f64,
    scale_exp: u8,
    normalize: bool,
    sum_mode: bool,
    w: usize,
    h: usize,
) -> Vec<f64> {
    let scale = f64::from(1u32 << scale_exp);
    let amp = if normalize { 1.0 } else { 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma) };
    let cutoff2 = (6.0 * sigma) * (6.0 * sigma);
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            let mut best = 0.0f64;
            for &(px, py) in points {
                let dx = x as f64 - px / scale;
                let dy = y as f64 - py / scale;
                let r2 = dx * dx + dy * dy;
                if r2 > cutoff2 {
                    continue;
                }
                let v = amp * (-r2 / (2.0 * sigma * sigma)).exp();
                acc += v;
                best = best.max(v);
            }
            out[y * w + x] = if sum_mode { acc.min(1.0) } else { best };
        }
    }
    out
}

/// Re-derives the NMS detection set directly from the definition: value at
/// least alpha_n, no strictly larger 3x3 neighbor, and equal-valued
/// neighbors only at lexicographically larger (y, x).
pub fn brute_force_nms(values: &[f32], w: usize, h: usize, alpha_n: f32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = values[y * w + x];
            if v < alpha_n {
                continue;
            }
            let mut keep = true;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let nv = values[ny as usize * w + nx as usize];
                    if nv > v || (nv == v && (ny as usize, nx as usize) < (y, x)) {
                        keep = false;
                    }
                }
            }
            if keep {
                out.push((x, y));
            }
        }
    }
    out
}

/// Exhaustive Otsu oracle in exact integer arithmetic: between-class
/// variance for split t is (sum0*w1 - sum1*w0)^2 / (w0*w1); argmax compared
/// by cross multiplication in u128, smallest t on exact ties.
pub fn exhaustive_otsu_bin(hist: &[u64; 256]) -> Option<usize> {
    let total: u64 = hist.iter().sum();
    let total_sum: u64 = hist.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
    let mut best: Option<(usize, u128, u128)> = None;
    let mut w0 = 0u64;
    let mut sum0 = 0u64;
    for t in 0..255usize {
        w0 += hist[t];
        sum0 += t as u64 * hist[t];
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let sum1 = total_sum - sum0;
        let d = (u128::from(sum0) * u128::from(w1)).abs_diff(u128::from(sum1) * u128::from(w0));
        let num = d * d;
        let den = u128::from(w0) * u128::from(w1);
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    best.map(|(t, _, _)| t)
}

/// Min-max 256-bin histogram matching the production binning; None when the
/// input is constant and no split exists.
pub fn histogram(values: &[f32]) -> Option<[u64; 256]> {
    let min = values.iter().copied().fold(f32::INFINITY, f32::min);
    let max = values.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    if !(max > min) {
        return None;
    }
    let mut hist = [0u64; 256];
    for &v in values {
        let bin = (((v - min) / (max - min) * 256.0) as usize).min(255);
        hist[bin] += 1;
    }
    Some(hist)
}

/// Exact maximum number of GT-detection pairs with distance <= theta, by
/// exhaustive branch-and-bound over assignments (fine for <= 6x6).
pub fn optimal_tp(gt: &[Point], det: &[Point], theta: f32) -> usize {
    fn recurse(gi: usize, used: &mut [bool], within: &[Vec<usize>]) -> usize {
        if gi == within.len() {
            return 0;
        }
        // Either leave this ground-truth point unmatched...
        let mut best = recurse(gi + 1, used, within);
        // ...or match it to any free detection within radius.
        for &di in &within[gi] {
            if !used[di] {
                used[di] = true;
                best = best.max(1 + recurse(gi + 1, used, within));
                used[di] = false;
            }
        }
        best
    }
    let within: Vec<Vec<usize>> = gt
        .iter()
        .map(|g| {
            det.iter()
                .enumerate()
                .filter(|(_, d)| ((d.0 - g.0).powi(2) + (d.1 - g.1).powi(2)).sqrt() <= theta)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut used = vec![false; det.len()];
    recurse(0, &mut used, &within)
}

/// Random satellite-style jitter: rigid motion about the frame center plus
/// a slight perspective term.
pub fn jitter_matrix(rng: &mut ChaCha8Rng, w: f64, h: f64) -> Homography {
    let angle = rng.gen_range(-0.004..0.004f64);
    let (tx, ty) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let (cx, cy) = (w / 2.0, h / 2.0);
    let (s, c) = angle.sin_cos();
    let px = rng.gen_range(-1e-5..1e-5);
    let py = rng.gen_range(-1e-5..1e-5);
    let m = nalgebra::Matrix3::new(
        c,
        -s,
        tx + cx - c * cx + s * cy,
        s,
        c,
        ty + cy - s * cx - c * cy,
        px,
        py,
        1.0,
    );
    Homography::from_matrix(m).unwrap()
}

/// Mean reprojection distance between two homographies over the four frame
/// corners.
pub fn corner_error(estimate: &Homography, truth: &Homography, w: f64, h: f64) -> f64 {
    let corners = [(0.0, 0.0), (w - 1.0, 0.0), (0.0, h - 1.0), (w - 1.0, h - 1.0)];
    corners
        .iter()
        .map(|&(x, y)| {
            let (ex, ey) = estimate.apply(x, y);
            let (tx, ty) = truth.apply(x, y);
            ((ex - tx).powi(2) + (ey - ty).powi(2)).sqrt()
        })
        .sum::<f64>()
        / 4.0
}
