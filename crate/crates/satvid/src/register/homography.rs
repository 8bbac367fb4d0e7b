//! Planar homographies and robust estimation from noisy correspondences.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A 3x3 projective transform, stored with h33 normalized to 1. By
/// convention throughout the crate it maps frame coordinates to reference
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn identity() -> Self {
        Homography(Matrix3::identity())
    }

    /// Wraps a matrix, normalizing h33 to 1. Rejects singular or
    /// h33-degenerate matrices.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let h33 = m[(2, 2)];
        if h33.abs() < 1e-12 {
            return Err(Error::numeric("Homography", "h33 is zero, cannot normalize".to_string()));
        }
        let normalized = m / h33;
        if normalized.determinant().abs() < 1e-12 {
            return Err(Error::numeric("Homography", "matrix is singular".to_string()));
        }
        Ok(Homography(normalized))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Applies the transform to a point.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.0;
        let w = m[(2, 0)] * x + m[(2, 1)] * y + m[(2, 2)];
        (
            (m[(0, 0)] * x + m[(0, 1)] * y + m[(0, 2)]) / w,
            (m[(1, 0)] * x + m[(1, 1)] * y + m[(1, 2)]) / w,
        )
    }

    pub fn inverse(&self) -> Result<Homography> {
        let inv = self.0.try_inverse().ok_or_else(|| Error::numeric("Homography", "not invertible".to_string()))?;
        Homography::from_matrix(inv)
    }

    /// Row-major 9-element serialization used in sidecar files.
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }

    pub fn from_row_major(v: [f64; 9]) -> Result<Self> {
        Homography::from_matrix(Matrix3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]))
    }
}

/// Hartley normalization: translate the centroid to the origin and scale
/// the mean distance to sqrt(2).
fn normalization_transform(points: &[(f64, f64)]) -> Matrix3<f64> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = points.iter().map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()).sum::<f64>() / n;
    let s = if mean_dist > 1e-12 { std::f64::consts::SQRT_2 / mean_dist } else { 1.0 };
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

/// Direct linear transform on >= 4 correspondences (src -> dst), with
/// Hartley normalization on both sides. `None` when the system is
/// degenerate.
pub fn dlt(pairs: &[((f64, f64), (f64, f64))]) -> Option<Matrix3<f64>> {
    if pairs.len() < 4 {
        return None;
    }
    let src: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    let t_src = normalization_transform(&src);
    let t_dst = normalization_transform(&dst);
    let norm = |t: &Matrix3<f64>, p: (f64, f64)| -> (f64, f64) {
        (t[(0, 0)] * p.0 + t[(0, 2)], t[(1, 1)] * p.1 + t[(1, 2)])
    };

    // Padded to at least 9 rows: nalgebra's thin SVD of an m x 9 matrix
    // only returns min(m, 9) right singular vectors, so the minimal 4-point
    // system (8 rows) would be missing the null-space vector entirely. Zero
    // rows leave the row space untouched.
    let rows = (2 * pairs.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, pair) in pairs.iter().enumerate() {
        let (x, y) = norm(&t_src, pair.0);
        let (u, v) = norm(&t_dst, pair.1);
        let r = 2 * i;
        a[(r, 0)] = -x;
        a[(r, 1)] = -y;
        a[(r, 2)] = -1.0;
        a[(r, 6)] = u * x;
        a[(r, 7)] = u * y;
        a[(r, 8)] = u;
        a[(r + 1, 3)] = -x;
        a[(r + 1, 4)] = -y;
        a[(r + 1, 5)] = -1.0;
        a[(r + 1, 6)] = v * x;
        a[(r + 1, 7)] = v * y;
        a[(r + 1, 8)] = v;
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t?;
    // Null vector: the row for the smallest singular value, located
    // explicitly rather than assuming sort order.
    let mut min_row = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < svd.singular_values[min_row] {
            min_row = i;
        }
    }
    let h = vt.row(min_row);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let denorm = t_dst.try_inverse()? * hn * t_src;
    if denorm[(2, 2)].abs() < 1e-12 {
        return None;
    }
    Some(denorm / denorm[(2, 2)])
}

/// True when any three of the points are (nearly) collinear, relative to
/// the sample's own scale.
fn degenerate_sample(points: &[(f64, f64)]) -> bool {
    let mut scale2 = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2 = (points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2);
            scale2 = scale2.max(d2);
        }
    }
    if scale2 < 1e-12 {
        return true;
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            for k in j + 1..points.len() {
                let (ax, ay) = points[i];
                let (bx, by) = points[j];
                let (cx, cy) = points[k];
                let twice_area = ((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)).abs();
                if twice_area < 1e-6 * scale2 {
                    return true;
                }
            }
        }
    }
    false
}

fn squared_error(h: &Matrix3<f64>, pair: &((f64, f64), (f64, f64))) -> f64 {
    let ((x, y), (u, v)) = *pair;
    let w = h[(2, 0)] * x + h[(2, 1)] * y + h[(2, 2)];
    if w.abs() < 1e-12 {
        return f64::INFINITY;
    }
    let px = (h[(0, 0)] * x + h[(0, 1)] * y + h[(0, 2)]) / w;
    let py = (h[(1, 0)] * x + h[(1, 1)] * y + h[(1, 2)]) / w;
    (px - u).powi(2) + (py - v).powi(2)
}

/// Truncated-quadratic score marginalized over a coarse noise-scale sweep;
/// lower is better. The sweep makes the choice of noise scale less brittle
/// than a single-sigma MSAC score.
fn msac_score(h: &Matrix3<f64>, pairs: &[((f64, f64), (f64, f64))]) -> f64 {
    const SIGMAS: [f64; 3] = [0.5, 1.0, 2.0];
    let mut score = 0.0;
    for pair in pairs {
        let e2 = squared_error(h, pair);
        for s in SIGMAS {
            score += (e2 / (s * s)).min(9.0);
        }
    }
    score
}

/// Robust homography estimation (src -> dst): seeded
/// hypothesize-and-verify with 4-point DLT minimal samples, the truncated
/// score above, adaptive iteration count capped at `max_iterations`, and a
/// final DLT refit on the inliers of the best hypothesis. Returns the
/// homography and the inlier mask (reprojection error < inlier_threshold).
pub fn robust_homography(
    matches: &[((f64, f64), (f64, f64))],
    inlier_threshold: f64,
    max_iterations: usize,
    seed: u64,
) -> Result<(Homography, Vec<bool>)> {
    let n = matches.len();
    if n < 4 {
        return Err(Error::data("robust_homography", format!("need at least 4 matches, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold2 = inlier_threshold * inlier_threshold;

    let mut best: Option<(f64, Matrix3<f64>)> = None;
    let mut needed = max_iterations;
    let mut iter = 0;
    while iter < needed.min(max_iterations) {
        iter += 1;
        // 4 distinct indices.
        let mut idx = [0usize; 4];
        let mut filled = 0;
        while filled < 4 {
            let candidate = rng.gen_range(0..n);
            if !idx[..filled].contains(&candidate) {
                idx[filled] = candidate;
                filled += 1;
            }
        }
        let sample: Vec<_> = idx.iter().map(|&i| matches[i]).collect();
        let src: Vec<_> = sample.iter().map(|p| p.0).collect();
        let dst: Vec<_> = sample.iter().map(|p| p.1).collect();
        if degenerate_sample(&src) || degenerate_sample(&dst) {
            continue;
        }
        let Some(h) = dlt(&sample) else { continue };
        let score = msac_score(&h, matches);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            let inliers = matches.iter().filter(|p| squared_error(&h, p) < threshold2).count();
            best = Some((score, h));
            // Standard adaptive stopping: enough iterations for 99%
            // confidence of one all-inlier sample.
            let w = inliers as f64 / n as f64;
            let p_good = w.powi(4);
            if p_good > 1.0 - 1e-12 {
                needed = iter;
            } else if p_good > 0.0 {
                let est = ((1.0f64 - 0.99).ln() / (1.0 - p_good).ln()).ceil() as usize;
                needed = est.clamp(iter, max_iterations);
            }
        }
    }

    let (_, h) = best.ok_or_else(|| {
        Error::numeric("robust_homography", format!("no non-degenerate sample in {max_iterations} iterations"))
    })?;

    // Iterated refit: least-squares DLT on the current inlier set, then
    // recompute the set from the refit model. This washes out the bias of
    // the minimal sample; the set stabilizes after a couple of rounds.
    let mut refined = h;
    for _ in 0..3 {
        let inlier_pairs: Vec<_> =
            matches.iter().copied().filter(|p| squared_error(&refined, p) < threshold2).collect();
        if inlier_pairs.len() < 4 {
            break;
        }
        match dlt(&inlier_pairs) {
            Some(next) => refined = next,
            None => break,
        }
    }
    let mask: Vec<bool> = matches.iter().map(|p| squared_error(&refined, p) < threshold2).collect();
    Ok((Homography::from_matrix(refined)?, mask))
}
