//! Geometric augmentation of frame stacks with consistent label transforms.

use crate::dataio::stacks::FrameStack;
use rand::Rng;

/// One geometric transform, applied identically to every plane of a stack
/// and to its point labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AugmentOp {
    HFlip,
    VFlip,
    /// Counterclockwise rotation about the tile center, bilinear sampling
    /// with reflect padding.
    Rotate { degrees: f64 },
    /// Integer shift with zero padding.
    Translate { dx: i32, dy: i32 },
}

pub const TRANSLATE_RANGE: i32 = 8;

/// Uniformly picks one of the four ops; rotation angle uniform in
/// [0, 360) degrees, translation components uniform integers in
/// [-TRANSLATE_RANGE, TRANSLATE_RANGE].
pub fn random_op(rng: &mut impl Rng) -> AugmentOp {
    match rng.gen_range(0..4u8) {
        0 => AugmentOp::HFlip,
        1 => AugmentOp::VFlip,
        2 => AugmentOp::Rotate { degrees: rng.gen_range(0.0..360.0) },
        _ => AugmentOp::Translate {
            dx: rng.gen_range(-TRANSLATE_RANGE..=TRANSLATE_RANGE),
            dy: rng.gen_range(-TRANSLATE_RANGE..=TRANSLATE_RANGE),
        },
    }
}

/// Applies `op` to the stack and its labels. Points pushed outside
/// `[0, size)` on either axis are dropped.
pub fn augment(stack: &FrameStack, points: &[(f32, f32)], op: AugmentOp) -> (FrameStack, Vec<(f32, f32)>) {
    let n = stack.size;
    let planes: Vec<Vec<f32>> = (0..stack.channels()).map(|i| transform_plane(stack.plane(i), n, op)).collect();
    let out_stack =
        FrameStack::from_planes(stack.mid_frame_index, stack.skip, stack.x0, stack.y0, n, planes);
    let out_points = points
        .iter()
        .filter_map(|&(x, y)| {
            let (tx, ty) = transform_point(f64::from(x), f64::from(y), n, op);
            let inside = tx >= 0.0 && tx < n as f64 && ty >= 0.0 && ty < n as f64;
            inside.then_some((tx as f32, ty as f32))
        })
        .collect();
    (out_stack, out_points)
}

fn transform_point(x: f64, y: f64, n: usize, op: AugmentOp) -> (f64, f64) {
    let last = (n - 1) as f64;
    match op {
        AugmentOp::HFlip => (last - x, y),
        AugmentOp::VFlip => (x, last - y),
        AugmentOp::Rotate { degrees } => {
            let c = last / 2.0;
            let (s, co) = degrees.to_radians().sin_cos();
            let (dx, dy) = (x - c, y - c);
            (c + co * dx - s * dy, c + s * dx + co * dy)
        }
        AugmentOp::Translate { dx, dy } => (x + f64::from(dx), y + f64::from(dy)),
    }
}

fn transform_plane(plane: &[f32], n: usize, op: AugmentOp) -> Vec<f32> {
    let mut out = vec![0.0f32; n * n];
    match op {
        AugmentOp::HFlip => {
            for y in 0..n {
                for x in 0..n {
                    out[y * n + x] = plane[y * n + (n - 1 - x)];
                }
            }
        }
        AugmentOp::VFlip => {
            for y in 0..n {
                for x in 0..n {
                    out[y * n + x] = plane[(n - 1 - y) * n + x];
                }
            }
        }
        AugmentOp::Rotate { degrees } => {
            // Inverse mapping: output pixel looks up the source position
            // rotated by -degrees, so content moves by +degrees, matching
            // the point transform.
            let c = (n - 1) as f64 / 2.0;
            let (s, co) = (-degrees.to_radians()).sin_cos();
            for y in 0..n {
                for x in 0..n {
                    let (dx, dy) = (x as f64 - c, y as f64 - c);
                    let sx = c + co * dx - s * dy;
                    let sy = c + s * dx + co * dy;
                    out[y * n + x] = bilinear_reflect(plane, n, sx, sy);
                }
            }
        }
        AugmentOp::Translate { dx, dy } => {
            for y in 0..n {
                for x in 0..n {
                    let sx = x as i64 - i64::from(dx);
                    let sy = y as i64 - i64::from(dy);
                    if sx >= 0 && sx < n as i64 && sy >= 0 && sy < n as i64 {
                        out[y * n + x] = plane[sy as usize * n + sx as usize];
                    }
                }
            }
        }
    }
    out
}

/// Mirrors a coordinate into [0, last] without repeating the edge sample.
fn reflect(v: f64, last: f64) -> f64 {
    if last == 0.0 {
        return 0.0;
    }
    let period = 2.0 * last;
    let mut r = v.rem_euclid(period);
    if r > last {
        r = period - r;
    }
    r
}

fn bilinear_reflect(plane: &[f32], n: usize, x: f64, y: f64) -> f32 {
    let last = (n - 1) as f64;
    let x = reflect(x, last);
    let y = reflect(y, last);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(n - 1);
    let y1 = (y0 + 1).min(n - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let v00 = f64::from(plane[y0 * n + x0]);
    let v10 = f64::from(plane[y0 * n + x1]);
    let v01 = f64::from(plane[y1 * n + x0]);
    let v11 = f64::from(plane[y1 * n + x1]);
    (v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy) as f32
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stack_with_blob(n: usize, bx: usize, by: usize) -> (FrameStack, Vec<(f32, f32)>) {
        let mut plane = vec![0.0f32; n * n];
        plane[by * n + bx] = 1.0;
        let stack = FrameStack::from_planes(0, 1, 0, 0, n, vec![plane]);
        (stack, vec![(bx as f32, by as f32)])
    }

    fn centroid(plane: &[f32], n: usize) -> (f64, f64) {
        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for y in 0..n {
            for x in 0..n {
                let w = f64::from(plane[y * n + x]);
                sx += w * x as f64;
                sy += w * y as f64;
                sw += w;
            }
        }
        (sx / sw, sy / sw)
    }

    #[test]
    fn hflip_maps_point_to_mirror_column() {
        let (stack, points) = stack_with_blob(128, 10, 20);
        let (out, pts) = augment(&stack, &points, AugmentOp::HFlip);
        assert_eq!(pts, vec![(117.0, 20.0)]);
        assert_eq!(out.plane(0)[20 * 128 + 117], 1.0);
    }

    #[test]
    fn vflip_maps_point_to_mirror_row() {
        let (stack, points) = stack_with_blob(64, 10, 20);
        let (_, pts) = augment(&stack, &points, AugmentOp::VFlip);
        assert_eq!(pts, vec![(10.0, 43.0)]);
    }

    #[test]
    fn double_180_rotation_recovers_interior() {
        let n = 32;
        let mut plane = vec![0.0f32; n * n];
        for y in 0..n {
            for x in 0..n {
                plane[y * n + x] = ((x * 7 + y * 13) % 256) as f32 / 255.0;
            }
        }
        let stack = FrameStack::from_planes(0, 1, 0, 0, n, vec![plane.clone()]);
        let (once, _) = augment(&stack, &[], AugmentOp::Rotate { degrees: 180.0 });
        let (twice, _) = augment(&once, &[], AugmentOp::Rotate { degrees: 180.0 });
        for y in 2..n - 2 {
            for x in 2..n - 2 {
                let diff = (twice.plane(0)[y * n + x] - plane[y * n + x]).abs();
                assert!(diff <= 2.0 / 255.0, "({x},{y}) diff {diff}");
            }
        }
    }

    #[test]
    fn translate_moves_blob_centroid() {
        let (stack, points) = stack_with_blob(32, 10, 12);
        let (out, pts) = augment(&stack, &points, AugmentOp::Translate { dx: 5, dy: 3 });
        assert_eq!(pts, vec![(15.0, 15.0)]);
        let (cx, cy) = centroid(out.plane(0), 32);
        assert!((cx - 15.0).abs() <= 0.5 && (cy - 15.0).abs() <= 0.5);
    }

    #[test]
    fn translated_out_points_are_dropped() {
        let (stack, points) = stack_with_blob(32, 30, 5);
        let (_, pts) = augment(&stack, &points, AugmentOp::Translate { dx: 5, dy: 0 });
        assert!(pts.is_empty());
    }

    #[test]
    fn rotation_keeps_content_under_the_point() {
        let (stack, points) = stack_with_blob(64, 40, 25);
        for degrees in [30.0, 90.0, 217.0] {
            let (out, pts) = augment(&stack, &points, AugmentOp::Rotate { degrees });
            assert_eq!(pts.len(), 1);
            let (cx, cy) = centroid(out.plane(0), 64);
            assert!(
                (cx - f64::from(pts[0].0)).abs() <= 0.5 && (cy - f64::from(pts[0].1)).abs() <= 0.5,
                "{degrees} deg: centroid ({cx},{cy}) vs point {pts:?}"
            );
        }
    }

    #[test]
    fn random_op_translation_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            if let AugmentOp::Translate { dx, dy } = random_op(&mut rng) {
                assert!(dx.abs() <= TRANSLATE_RANGE && dy.abs() <= TRANSLATE_RANGE);
            }
        }
    }
}
