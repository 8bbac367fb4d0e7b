//! Heatmap-to-points extraction.
//!
//! Two strategies behind a common trait, selected by name from config or the
//! CLI: `nms` (3x3 local maxima over a score threshold, the only rule that
//! separates vehicles a few pixels apart) and `otsu` (threshold the heatmap,
//! take centroids of large-enough connected components).

use crate::error::{Error, Result};
use crate::heatmap::Heatmap;

/// A point detection in frame coordinates (heatmap coordinates are mapped
/// through `Heatmap::to_frame_coords`, so half-resolution heatmaps land on
/// block centers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub x: f32,
    pub y: f32,
    pub score: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostprocessConfig {
    /// Registered extractor name: `nms` or `otsu`.
    pub method: String,
    /// NMS score threshold.
    pub alpha_n: f32,
    /// Otsu minimum segment area in pixels; components survive iff
    /// area > alpha_o.
    pub alpha_o: f32,
}

impl PostprocessConfig {
    pub fn new(method: impl Into<String>, alpha_n: f32, alpha_o: f32) -> Result<Self> {
        let method = method.into();
        if !(0.0..1.0).contains(&alpha_n) || alpha_n <= 0.0 {
            return Err(Error::data("PostprocessConfig", format!("alpha_n must be in (0,1), got {alpha_n}")));
        }
        if !(alpha_o > 0.0) {
            return Err(Error::data("PostprocessConfig", format!("alpha_o must be positive, got {alpha_o}")));
        }
        Ok(PostprocessConfig { method, alpha_n, alpha_o })
    }
}

/// Strategy interface for turning a heatmap into detections.
pub trait PointExtractor: Send + Sync {
    fn name(&self) -> &'static str;
    fn extract(&self, heatmap: &Heatmap, config: &PostprocessConfig) -> Vec<Detection>;
}

pub struct NmsExtractor;

impl PointExtractor for NmsExtractor {
    fn name(&self) -> &'static str {
        "nms"
    }

    fn extract(&self, heatmap: &Heatmap, config: &PostprocessConfig) -> Vec<Detection> {
        nms_detect(heatmap, config.alpha_n)
    }
}

pub struct OtsuExtractor;

impl PointExtractor for OtsuExtractor {
    fn name(&self) -> &'static str {
        "otsu"
    }

    fn extract(&self, heatmap: &Heatmap, config: &PostprocessConfig) -> Vec<Detection> {
        otsu_detect(heatmap, config.alpha_o)
    }
}

static EXTRACTORS: &[&dyn PointExtractor] = &[&NmsExtractor, &OtsuExtractor];

/// All registered extractors.
pub fn extractors() -> &'static [&'static dyn PointExtractor] {
    EXTRACTORS
}

/// Looks up an extractor by registered name.
pub fn extractor(name: &str) -> Result<&'static dyn PointExtractor> {
    EXTRACTORS.iter().copied().find(|e| e.name() == name).ok_or_else(|| {
        let known: Vec<_> = EXTRACTORS.iter().map(|e| e.name()).collect();
        Error::data("extractor", format!("unknown method {name:?}, expected one of {known:?}"))
    })
}

/// Non-maximum suppression: a pixel is a detection iff it is at least
/// alpha_n and strictly greater than every 3x3 neighbor, where equal-valued
/// neighbors lose to the lexicographically smaller (y, x). The tie rule
/// keeps exactly one pixel per plateau, so no two detections are within
/// Chebyshev distance 1.
pub fn nms_detect(heatmap: &Heatmap, alpha_n: f32) -> Vec<Detection> {
    let w = heatmap.width();
    let h = heatmap.height();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = heatmap.get(x, y);
            if v < alpha_n {
                continue;
            }
            let mut is_max = true;
            'scan: for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    if (nx, ny) == (x, y) {
                        continue;
                    }
                    let nv = heatmap.get(nx, ny);
                    if nv > v || (nv == v && (ny, nx) < (y, x)) {
                        is_max = false;
                        break 'scan;
                    }
                }
            }
            if is_max {
                let (fx, fy) = heatmap.to_frame_coords(x as f32, y as f32);
                out.push(Detection { x: fx, y: fy, score: v });
            }
        }
    }
    out
}

/// Otsu threshold over a 256-bin histogram spanning [min, max] of `values`.
/// Returns the chosen bin index and the threshold value (upper edge of the
/// bin); `None` when all values are equal. Among equal-variance thresholds
/// the smallest bin index wins.
pub fn otsu_threshold(values: &[f32]) -> Option<(usize, f32)> {
    let min = values.iter().copied().fold(f32::INFINITY, f32::min);
    let max = values.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    if !(max > min) {
        return None;
    }
    let mut hist = [0u64; 256];
    for &v in values {
        hist[bin_of(v, min, max)] += 1;
    }

    let total = values.len() as f64;
    let total_sum: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let mut w0 = 0.0f64;
    let mut sum0 = 0.0f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for t in 0..255 {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (total_sum - sum0) / w1;
        let variance = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if variance > best.1 {
            best = (t, variance);
        }
    }
    let threshold = min + (best.0 + 1) as f32 * (max - min) / 256.0;
    Some((best.0, threshold))
}

fn bin_of(v: f32, min: f32, max: f32) -> usize {
    (((v - min) / (max - min) * 256.0) as usize).min(255)
}

/// Otsu segmentation: binarize at the Otsu threshold (foreground strictly
/// above the threshold bin), extract 8-connected components, keep those with
/// area > alpha_o, and emit each survivor's value-weighted centroid with the
/// component's max value as score. Constant heatmaps yield no detections.
pub fn otsu_detect(heatmap: &Heatmap, alpha_o: f32) -> Vec<Detection> {
    let Some((t_bin, _)) = otsu_threshold(heatmap.data()) else {
        return Vec::new();
    };
    let min = heatmap.data().iter().copied().fold(f32::INFINITY, f32::min);
    let max = heatmap.data().iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let w = heatmap.width();
    let h = heatmap.height();
    let foreground: Vec<bool> = heatmap.data().iter().map(|&v| bin_of(v, min, max) > t_bin).collect();

    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = Vec::new();
    for start in 0..w * h {
        if !foreground[start] || seen[start] {
            continue;
        }
        // Flood-fill one component.
        queue.clear();
        queue.push(start);
        seen[start] = true;
        let mut area = 0usize;
        let mut weight = 0.0f64;
        let mut cx = 0.0f64;
        let mut cy = 0.0f64;
        let mut score = f32::NEG_INFINITY;
        while let Some(idx) = queue.pop() {
            let x = idx % w;
            let y = idx / w;
            let v = heatmap.data()[idx];
            area += 1;
            weight += f64::from(v);
            cx += f64::from(v) * x as f64;
            cy += f64::from(v) * y as f64;
            score = score.max(v);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let nidx = ny * w + nx;
                    if foreground[nidx] && !seen[nidx] {
                        seen[nidx] = true;
                        queue.push(nidx);
                    }
                }
            }
        }
        if area as f32 > alpha_o && weight > 0.0 {
            let (fx, fy) = heatmap.to_frame_coords((cx / weight) as f32, (cy / weight) as f32);
            out.push(Detection { x: fx, y: fy, score });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heatmap_from(w: usize, h: usize, cells: &[(usize, usize, f32)]) -> Heatmap {
        let mut m = Heatmap::new(w, h, 0);
        for &(x, y, v) in cells {
            m.set(x, y, v);
        }
        m
    }

    #[test]
    fn single_peak_detected() {
        let m = heatmap_from(8, 8, &[(3, 3, 0.9)]);
        let d = nms_detect(&m, 0.35);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].x, d[0].y, d[0].score), (3.0, 3.0, 0.9));
    }

    #[test]
    fn all_below_threshold_is_empty() {
        let m = heatmap_from(8, 8, &[(3, 3, 0.2), (5, 5, 0.34)]);
        assert!(nms_detect(&m, 0.35).is_empty());
    }

    #[test]
    fn plateau_keeps_lexicographically_smallest() {
        let m = heatmap_from(8, 8, &[(3, 3, 0.8), (4, 3, 0.8), (3, 4, 0.8)]);
        let d = nms_detect(&m, 0.35);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].x, d[0].y), (3.0, 3.0));
    }

    #[test]
    fn border_pixel_can_be_maximum() {
        let m = heatmap_from(8, 8, &[(0, 0, 0.7)]);
        let d = nms_detect(&m, 0.35);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].x, d[0].y), (0.0, 0.0));
    }

    #[test]
    fn raising_threshold_only_removes() {
        let m = heatmap_from(8, 8, &[(1, 1, 0.4), (5, 5, 0.9)]);
        let low = nms_detect(&m, 0.35);
        let high = nms_detect(&m, 0.5);
        assert_eq!(low.len(), 2);
        assert_eq!(high.len(), 1);
        assert!(high.iter().all(|d| low.contains(d)));
    }

    #[test]
    fn half_resolution_detections_map_to_block_centers() {
        let mut m = Heatmap::new(4, 4, 1);
        m.set(2, 1, 0.9);
        let d = nms_detect(&m, 0.35);
        assert_eq!((d[0].x, d[0].y), (4.5, 2.5));
    }

    #[test]
    fn otsu_bimodal_threshold_separates_modes() {
        let mut values = vec![0.1f32; 50];
        values.extend(vec![0.9f32; 50]);
        let (_, thr) = otsu_threshold(&values).unwrap();
        assert!(thr > 0.1 && thr < 0.9, "threshold {thr}");
    }

    #[test]
    fn otsu_constant_heatmap_is_empty() {
        let m = Heatmap::from_vec(6, 6, 0, vec![0.4; 36]);
        assert!(otsu_detect(&m, 3.5).is_empty());
        assert!(otsu_threshold(m.data()).is_none());
    }

    #[test]
    fn small_segment_discarded_by_area() {
        // 3 foreground pixels, area not > 3.5.
        let m = heatmap_from(8, 8, &[(2, 2, 0.9), (3, 2, 0.9), (2, 3, 0.9)]);
        assert!(otsu_detect(&m, 3.5).is_empty());
        // A fourth pixel pushes it over.
        let m = heatmap_from(8, 8, &[(2, 2, 0.9), (3, 2, 0.9), (2, 3, 0.9), (3, 3, 0.9)]);
        let d = otsu_detect(&m, 3.5);
        assert_eq!(d.len(), 1);
        assert!((d[0].x - 2.5).abs() < 1e-5 && (d[0].y - 2.5).abs() < 1e-5);
    }

    #[test]
    fn registry_finds_both_methods() {
        assert_eq!(extractor("nms").unwrap().name(), "nms");
        assert_eq!(extractor("otsu").unwrap().name(), "otsu");
        assert!(extractor("magic").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PostprocessConfig::new("nms", 0.35, 3.5).is_ok());
        assert!(PostprocessConfig::new("nms", 0.0, 3.5).is_err());
        assert!(PostprocessConfig::new("nms", 1.0, 3.5).is_err());
        assert!(PostprocessConfig::new("nms", 0.35, 0.0).is_err());
    }
}
