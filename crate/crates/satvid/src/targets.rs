//! Ground-truth heatmap generation from point annotations.
//!
//! Each vehicle center becomes an isotropic Gaussian density
//! `exp(-(dx^2 + dy^2) / (2 sigma^2)) / (2 pi sigma^2)` on the (possibly
//! downsampled) heatmap grid. Two accumulation rules exist: `Sum` adds the
//! densities and clips at 1 so clusters saturate; `Max` takes the pixel-wise
//! maximum so nearby vehicles keep separate peaks.

use crate::error::{Error, Result};
use crate::heatmap::Heatmap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulation {
    Sum,
    Max,
}

/// How to turn annotation points into a target heatmap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    /// Gaussian standard deviation in heatmap pixels.
    pub sigma: f64,
    /// Downsampling exponent d; point coordinates are divided by 2^d.
    /// 1 for the pooled architecture, 0 for the full-resolution one.
    pub downsample_exponent: u8,
    pub accumulation: Accumulation,
    /// Scale each Gaussian by 2 pi sigma^2 so an isolated vehicle peaks at
    /// exactly 1; keeps fixed detection thresholds meaningful across sigma.
    pub normalize_peak: bool,
}

impl TargetSpec {
    pub fn new(sigma: f64, downsample_exponent: u8, accumulation: Accumulation, normalize_peak: bool) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::data("TargetSpec", format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(TargetSpec { sigma, downsample_exponent, accumulation, normalize_peak })
    }

    /// Full-resolution max-accumulation targets with unit peaks, the
    /// configuration used for training throughout.
    pub fn training_default(sigma: f64) -> Result<Self> {
        TargetSpec::new(sigma, 0, Accumulation::Max, true)
    }

    fn amplitude(&self) -> f64 {
        let two_pi_sigma2 = 2.0 * std::f64::consts::PI * self.sigma * self.sigma;
        if self.normalize_peak { 1.0 } else { 1.0 / two_pi_sigma2 }
    }
}

/// Gaussians are only evaluated within this many sigmas of their center;
/// the truncated tail is below 1.6e-8 of the peak.
const SUPPORT_RADIUS_SIGMAS: f64 = 6.0;

/// Sum accumulation: per-pixel sum of all point Gaussians, clipped at 1.
/// `out_width`/`out_height` are heatmap dimensions; points are in frame
/// coordinates and get divided by 2^d. Empty point list gives all zeros.
pub fn heatmap_sum(points: &[(f64, f64)], spec: &TargetSpec, out_width: usize, out_height: usize) -> Heatmap {
    let values = heatmap_sum_f64(points, spec, out_width, out_height);
    Heatmap::from_vec(out_width, out_height, spec.downsample_exponent, values.iter().map(|&v| v as f32).collect())
}

/// Max accumulation: per-pixel maximum over the point Gaussians. Duplicate
/// points change nothing; the empty set gives all zeros.
pub fn heatmap_max(points: &[(f64, f64)], spec: &TargetSpec, out_width: usize, out_height: usize) -> Heatmap {
    let values = heatmap_max_f64(points, spec, out_width, out_height);
    Heatmap::from_vec(out_width, out_height, spec.downsample_exponent, values.iter().map(|&v| v as f32).collect())
}

/// Dispatches on `spec.accumulation`.
pub fn heatmap_target(points: &[(f64, f64)], spec: &TargetSpec, out_width: usize, out_height: usize) -> Heatmap {
    match spec.accumulation {
        Accumulation::Sum => heatmap_sum(points, spec, out_width, out_height),
        Accumulation::Max => heatmap_max(points, spec, out_width, out_height),
    }
}

/// 64-bit path of [`heatmap_sum`], exposed so oracle tests can compare at
/// 1e-12 without an f32 cast in between.
pub fn heatmap_sum_f64(points: &[(f64, f64)], spec: &TargetSpec, out_width: usize, out_height: usize) -> Vec<f64> {
    let mut values = vec![0.0f64; out_width * out_height];
    accumulate(points, spec, out_width, out_height, &mut values, |cell, v| *cell += v);
    for v in &mut values {
        if *v > 1.0 {
            *v = 1.0;
        }
    }
    values
}

/// 64-bit path of [`heatmap_max`].
pub fn heatmap_max_f64(points: &[(f64, f64)], spec: &TargetSpec, out_width: usize, out_height: usize) -> Vec<f64> {
    let mut values = vec![0.0f64; out_width * out_height];
    accumulate(points, spec, out_width, out_height, &mut values, |cell, v| *cell = cell.max(v));
    values
}

fn accumulate(
    points: &[(f64, f64)],
    spec: &TargetSpec,
    out_width: usize,
    out_height: usize,
    values: &mut [f64],
    mut combine: impl FnMut(&mut f64, f64),
) {
    let scale = f64::from(1u32 << spec.downsample_exponent);
    let amp = spec.amplitude();
    let inv_two_sigma2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
    let radius = SUPPORT_RADIUS_SIGMAS * spec.sigma;

    for &(px, py) in points {
        let cx = px / scale;
        let cy = py / scale;
        let x_lo = ((cx - radius).floor().max(0.0)) as usize;
        let y_lo = ((cy - radius).floor().max(0.0)) as usize;
        if cx + radius < 0.0 || cy + radius < 0.0 {
            continue;
        }
        let x_hi = ((cx + radius).ceil()).min((out_width - 1) as f64) as usize;
        let y_hi = ((cy + radius).ceil()).min((out_height - 1) as f64) as usize;
        if x_lo > x_hi || y_lo > y_hi {
            continue;
        }
        for y in y_lo..=y_hi {
            let dy = y as f64 - cy;
            for x in x_lo..=x_hi {
                let dx = x as f64 - cx;
                let r2 = dx * dx + dy * dy;
                if r2 > radius * radius {
                    continue;
                }
                combine(&mut values[y * out_width + x], amp * (-r2 * inv_two_sigma2).exp());
            }
        }
    }
}
