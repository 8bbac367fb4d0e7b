//! Ratio-test feature matching with exact nearest-neighbor search.

use super::descriptor::descriptor_distance;
use super::InterestPoint;

/// For each point in `a`, finds its nearest and second-nearest neighbors in
/// `b` by descriptor distance and keeps the pair iff d1/d2 < ratio. Returns
/// (index in a, index in b) pairs. Points are skipped when `b` has fewer
/// than two candidates; equidistant best pairs fail the strict ratio test.
pub fn match_features(a: &[InterestPoint], b: &[InterestPoint], ratio: f32) -> Vec<(usize, usize)> {
    assert!(ratio > 0.0 && ratio < 1.0, "match_features: ratio must be in (0,1)");
    if b.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, pa) in a.iter().enumerate() {
        let mut best = (f32::INFINITY, usize::MAX);
        let mut second = f32::INFINITY;
        for (j, pb) in b.iter().enumerate() {
            let d = descriptor_distance(&pa.descriptor, &pb.descriptor);
            if d < best.0 {
                second = best.0;
                best = (d, j);
            } else if d < second {
                second = d;
            }
        }
        if best.0 < ratio * second {
            out.push((i, best.1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn with_descriptor(desc: Vec<f32>) -> InterestPoint {
        InterestPoint { x: 0.0, y: 0.0, response: 1.0, descriptor: desc }
    }

    fn random_unit_descriptors(n: usize, seed: u64) -> Vec<InterestPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut d: Vec<f32> = (0..128).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
                let norm = d.iter().map(|v| v * v).sum::<f32>().sqrt();
                for v in &mut d {
                    *v /= norm;
                }
                with_descriptor(d)
            })
            .collect()
    }

    #[test]
    fn identical_sets_match_by_identity() {
        let a = random_unit_descriptors(20, 1);
        let matches = match_features(&a, &a, 0.75);
        assert_eq!(matches.len(), 20);
        assert!(matches.iter().all(|&(i, j)| i == j));
    }

    #[test]
    fn noisy_copy_recovers_at_least_95_percent() {
        let a = random_unit_descriptors(100, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<InterestPoint> = a
            .iter()
            .map(|p| {
                let d = p.descriptor.iter().map(|v| v + rng.gen_range(-0.01f32..0.01)).collect();
                with_descriptor(d)
            })
            .collect();
        let matches = match_features(&a, &b, 0.75);
        let correct = matches.iter().filter(|&&(i, j)| i == j).count();
        assert!(correct >= 95, "only {correct} correct of {}", matches.len());
    }

    #[test]
    fn equidistant_candidates_rejected() {
        let a = vec![with_descriptor(vec![1.0, 0.0])];
        let b = vec![with_descriptor(vec![0.0, 1.0]), with_descriptor(vec![0.0, -1.0])];
        // Both candidates are at distance sqrt(2); ratio 1 fails the test.
        assert!(match_features(&a, &b, 0.75).is_empty());
    }

    #[test]
    fn too_few_candidates_skips() {
        let a = random_unit_descriptors(5, 4);
        let b = random_unit_descriptors(1, 5);
        assert!(match_features(&a, &b, 0.75).is_empty());
    }
}
