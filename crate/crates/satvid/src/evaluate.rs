//! Point-set matching and precision/recall scoring.
//!
//! A detection counts as a true positive when it is matched to a ground
//! truth point within Euclidean distance theta. Matching is globally
//! closest-pair-first greedy: sort every (detection, ground truth) pair with
//! distance <= theta by distance and accept pairs whose endpoints are both
//! still free. Distance ties fall back to coordinates (then indices), which
//! keeps the result invariant under permutation of either input list.

use crate::postprocess::{nms_detect, Detection};
use crate::Heatmap;

pub type Point = (f32, f32);

/// One accepted match: detection, ground-truth point, distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub detection: Point,
    pub ground_truth: Point,
    pub distance: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub theta: f32,
    pub matched: Vec<MatchedPair>,
    pub unmatched_detections: Vec<Point>,
    pub unmatched_ground_truth: Vec<Point>,
}

impl MatchReport {
    /// Line-oriented key=value serialization; parseable and diffable.
    pub fn to_key_values(&self) -> String {
        format!(
            "theta={}\ntp={}\nfp={}\nfn={}\nprecision={:.6}\nrecall={:.6}\nf1={:.6}\n",
            self.theta, self.tp, self.fp, self.fn_, self.precision, self.recall, self.f1
        )
    }
}

/// Computes precision/recall/F1 with zero denominators mapping to 0.
pub fn ratios(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    (precision, recall, f1)
}

/// Matches detections to ground truth within radius `theta`.
pub fn match_points(detections: &[Point], ground_truth: &[Point], theta: f32) -> MatchReport {
    assert!(theta > 0.0, "match_points: theta must be positive");
    let mut candidates: Vec<(f32, usize, usize)> = Vec::new();
    for (gi, g) in ground_truth.iter().enumerate() {
        for (di, d) in detections.iter().enumerate() {
            let dist = ((d.0 - g.0).powi(2) + (d.1 - g.1).powi(2)).sqrt();
            if dist <= theta {
                candidates.push((dist, gi, di));
            }
        }
    }
    candidates.sort_by(|a, b| {
        let ka = sort_key(a, ground_truth, detections);
        let kb = sort_key(b, ground_truth, detections);
        ka.partial_cmp(&kb).expect("finite coordinates")
    });

    let mut gt_taken = vec![false; ground_truth.len()];
    let mut det_taken = vec![false; detections.len()];
    let mut matched = Vec::new();
    for &(dist, gi, di) in &candidates {
        if gt_taken[gi] || det_taken[di] {
            continue;
        }
        gt_taken[gi] = true;
        det_taken[di] = true;
        matched.push(MatchedPair { detection: detections[di], ground_truth: ground_truth[gi], distance: dist });
    }

    let tp = matched.len();
    let fp = detections.len() - tp;
    let fn_ = ground_truth.len() - tp;
    let (precision, recall, f1) = ratios(tp, fp, fn_);
    MatchReport {
        tp,
        fp,
        fn_,
        precision,
        recall,
        f1,
        theta,
        matched,
        unmatched_detections: detections
            .iter()
            .zip(&det_taken)
            .filter(|(_, &taken)| !taken)
            .map(|(&d, _)| d)
            .collect(),
        unmatched_ground_truth: ground_truth
            .iter()
            .zip(&gt_taken)
            .filter(|(_, &taken)| !taken)
            .map(|(&g, _)| g)
            .collect(),
    }
}

// Tie-break by coordinates before indices so the matching is insensitive to
// input order; indices only separate exactly coincident duplicates.
type SortKey = (f32, f32, f32, f32, f32, usize, usize);

fn sort_key(c: &(f32, usize, usize), gt: &[Point], det: &[Point]) -> SortKey {
    let (dist, gi, di) = *c;
    let g = gt[gi];
    let d = det[di];
    (dist, g.1, g.0, d.1, d.0, gi, di)
}

/// Micro-averaged precision/recall over per-frame heatmaps at each
/// threshold: detections come from `nms_detect`, tp/fp/fn pool over frames
/// before the ratios are taken. Returns (threshold, precision, recall) rows.
pub fn pr_curve(
    heatmaps: &[Heatmap],
    ground_truth: &[Vec<Point>],
    theta: f32,
    thresholds: &[f32],
) -> Vec<(f32, f64, f64)> {
    assert_eq!(heatmaps.len(), ground_truth.len(), "pr_curve: frame count mismatch");
    assert!(thresholds.windows(2).all(|w| w[0] < w[1]), "pr_curve: thresholds must be strictly increasing");
    let mut rows = Vec::with_capacity(thresholds.len());
    for &thr in thresholds {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (hm, gt) in heatmaps.iter().zip(ground_truth) {
            let det: Vec<Point> = nms_detect(hm, thr).iter().map(|d| (d.x, d.y)).collect();
            let report = match_points(&det, gt, theta);
            tp += report.tp;
            fp += report.fp;
            fn_ += report.fn_;
        }
        let (precision, recall, _) = ratios(tp, fp, fn_);
        rows.push((thr, precision, recall));
    }
    rows
}

/// Convenience: detections as plain points.
pub fn detection_points(detections: &[Detection]) -> Vec<Point> {
    detections.iter().map(|d| (d.x, d.y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_detections_are_all_misses() {
        let gt: Vec<Point> = (0..7).map(|i| (i as f32 * 10.0, 0.0)).collect();
        let r = match_points(&[], &gt, 4.0);
        assert_eq!((r.tp, r.fp, r.fn_), (0, 0, 7));
        assert_eq!(r.recall, 0.0);
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn closest_detection_wins_radius() {
        let r = match_points(&[(1.0, 0.0), (2.0, 0.0)], &[(0.0, 0.0)], 4.0);
        assert_eq!((r.tp, r.fp, r.fn_), (1, 1, 0));
        assert_eq!(r.matched[0].detection, (1.0, 0.0));
    }

    #[test]
    fn second_chance_assignment() {
        let r = match_points(&[(1.0, 0.0), (2.0, 0.0)], &[(0.0, 0.0), (3.0, 0.0)], 4.0);
        assert_eq!((r.tp, r.fp, r.fn_), (2, 0, 0));
        // Closest pair first: (1,0)<->(0,0) at distance 1, then (2,0)<->(3,0).
        assert!(r.matched.iter().any(|m| m.detection == (1.0, 0.0) && m.ground_truth == (0.0, 0.0)));
        assert!(r.matched.iter().any(|m| m.detection == (2.0, 0.0) && m.ground_truth == (3.0, 0.0)));
    }

    #[test]
    fn permutation_invariant_counts_and_pairs() {
        let det = [(1.0, 0.0), (2.5, 1.0), (7.0, 7.0)];
        let gt = [(0.0, 0.0), (3.0, 1.0)];
        let a = match_points(&det, &gt, 4.0);
        let det_rev: Vec<Point> = det.iter().rev().copied().collect();
        let gt_rev: Vec<Point> = gt.iter().rev().copied().collect();
        let b = match_points(&det_rev, &gt_rev, 4.0);
        assert_eq!((a.tp, a.fp, a.fn_), (b.tp, b.fp, b.fn_));
        let mut pa: Vec<_> = a.matched.iter().map(|m| (m.detection, m.ground_truth)).collect();
        let mut pb: Vec<_> = b.matched.iter().map(|m| (m.detection, m.ground_truth)).collect();
        pa.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(pa, pb);
    }

    #[test]
    fn counts_always_partition_inputs() {
        let det = [(0.0, 0.0), (1.0, 1.0), (9.0, 9.0)];
        let gt = [(0.5, 0.5), (8.0, 8.0)];
        let r = match_points(&det, &gt, 2.0);
        assert_eq!(r.tp + r.fp, det.len());
        assert_eq!(r.tp + r.fn_, gt.len());
        assert_eq!(r.matched.len() + r.unmatched_detections.len(), det.len());
        assert_eq!(r.matched.len() + r.unmatched_ground_truth.len(), gt.len());
    }

    #[test]
    fn key_value_report_roundtrips_fields() {
        let r = match_points(&[(1.0, 0.0)], &[(0.0, 0.0)], 4.0);
        let text = r.to_key_values();
        assert!(text.contains("tp=1\n"));
        assert!(text.contains("fn=0\n"));
        assert!(text.contains("precision=1.000000\n"));
    }

    #[test]
    fn pr_curve_on_perfect_predictor() {
        use crate::targets::{heatmap_max, Accumulation, TargetSpec};
        let spec = TargetSpec::new(1.0, 0, Accumulation::Max, true).unwrap();
        let gt: Vec<Vec<Point>> = vec![vec![(5.0, 5.0), (12.0, 9.0)], vec![(3.0, 14.0)]];
        let heatmaps: Vec<Heatmap> = gt
            .iter()
            .map(|pts| {
                let p: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (f64::from(x), f64::from(y))).collect();
                heatmap_max(&p, &spec, 20, 20)
            })
            .collect();
        let rows = pr_curve(&heatmaps, &gt, 4.0, &[0.2, 0.5, 0.8]);
        for &(_, p, r) in &rows {
            assert_eq!((p, r), (1.0, 1.0));
        }
    }

    #[test]
    fn pr_curve_threshold_above_max_gives_zero_point() {
        let hm = Heatmap::from_vec(8, 8, 0, vec![0.1; 64]);
        let rows = pr_curve(&[hm], &[vec![(4.0, 4.0)]], 4.0, &[0.5]);
        assert_eq!(rows[0].1, 0.0);
        assert_eq!(rows[0].2, 0.0);
    }
}
