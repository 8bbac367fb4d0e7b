//! Harris corner detection.

use super::InterestPoint;
use crate::frame::GrayFrame;

const K: f32 = 0.04;

/// Detects Harris corners: Sobel gradients, 3x3 Gaussian-weighted structure
/// tensor, response R = det(M) - k trace(M)^2, 3x3 non-max suppression, then
/// the top `max_points` responses above `response_threshold * max(R)`.
/// Positions are refined to sub-pixel by a quadratic fit. Flat frames give
/// an empty list.
pub fn detect_corners(frame: &GrayFrame, response_threshold: f32, max_points: usize) -> Vec<InterestPoint> {
    let w = frame.width();
    let h = frame.height();
    if w < 3 || h < 3 {
        return Vec::new();
    }
    let gray: Vec<f32> = frame.data().iter().map(|&v| f32::from(v) / 255.0).collect();
    let at = |x: usize, y: usize| gray[y * w + x];

    // Sobel gradients on the interior.
    let mut ix = vec![0.0f32; w * h];
    let mut iy = vec![0.0f32; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            ix[y * w + x] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            iy[y * w + x] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }

    // Gaussian-weighted (sigma = 1, 3x3) structure tensor and response.
    const G: [f32; 9] = [1.0, 2.0, 1.0, 2.0, 4.0, 2.0, 1.0, 2.0, 1.0];
    let mut response = vec![f32::NEG_INFINITY; w * h];
    let mut max_response = f32::NEG_INFINITY;
    for y in 2..h - 2 {
        for x in 2..w - 2 {
            let mut sxx = 0.0f32;
            let mut syy = 0.0f32;
            let mut sxy = 0.0f32;
            for dy in 0..3 {
                for dx in 0..3 {
                    let g = G[dy * 3 + dx] / 16.0;
                    let idx = (y + dy - 1) * w + (x + dx - 1);
                    sxx += g * ix[idx] * ix[idx];
                    syy += g * iy[idx] * iy[idx];
                    sxy += g * ix[idx] * iy[idx];
                }
            }
            let det = sxx * syy - sxy * sxy;
            let trace = sxx + syy;
            let r = det - K * trace * trace;
            response[y * w + x] = r;
            max_response = max_response.max(r);
        }
    }
    if !(max_response > 0.0) {
        return Vec::new();
    }
    let cutoff = response_threshold * max_response;

    // 3x3 non-max suppression; ties keep the lexicographically first pixel.
    let mut candidates: Vec<InterestPoint> = Vec::new();
    for y in 2..h - 2 {
        for x in 2..w - 2 {
            let r = response[y * w + x];
            if r < cutoff {
                continue;
            }
            let mut is_max = true;
            'scan: for ny in y - 1..=y + 1 {
                for nx in x - 1..=x + 1 {
                    if (nx, ny) == (x, y) {
                        continue;
                    }
                    let nr = response[ny * w + nx];
                    if nr > r || (nr == r && (ny, nx) < (y, x)) {
                        is_max = false;
                        break 'scan;
                    }
                }
            }
            if is_max {
                let (sx, sy) = subpixel_offset(&response, w, x, y);
                candidates.push(InterestPoint { x: x as f32 + sx, y: y as f32 + sy, response: r, descriptor: Vec::new() });
            }
        }
    }

    candidates.sort_by(|a, b| b.response.total_cmp(&a.response).then(a.y.total_cmp(&b.y)).then(a.x.total_cmp(&b.x)));
    candidates.truncate(max_points);
    candidates
}

/// 1D quadratic peak refinement per axis, clamped to half a pixel.
fn subpixel_offset(response: &[f32], w: usize, x: usize, y: usize) -> (f32, f32) {
    let axis = |m1: f32, c: f32, p1: f32| -> f32 {
        let denom = m1 - 2.0 * c + p1;
        if denom.abs() < 1e-12 {
            0.0
        } else {
            (0.5 * (m1 - p1) / denom).clamp(-0.5, 0.5)
        }
    };
    let c = response[y * w + x];
    let dx = axis(response[y * w + x - 1], c, response[y * w + x + 1]);
    let dy = axis(response[(y - 1) * w + x], c, response[(y + 1) * w + x]);
    (dx, dy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_frame_yields_no_corners() {
        let f = GrayFrame::from_vec(32, 32, vec![77; 32 * 32]);
        assert!(detect_corners(&f, 0.01, 100).is_empty());
    }

    #[test]
    fn bright_square_yields_corners_near_vertices() {
        let mut f = GrayFrame::new(32, 32);
        for y in 12..20 {
            for x in 12..20 {
                f.set(x, y, 255);
            }
        }
        let pts = detect_corners(&f, 0.05, 16);
        assert!(pts.len() >= 4, "found {}", pts.len());
        // Every square vertex has a detected corner within 2 px.
        for &(vx, vy) in &[(12.0f32, 12.0f32), (19.0, 12.0), (12.0, 19.0), (19.0, 19.0)] {
            let near = pts.iter().any(|p| ((p.x - vx).powi(2) + (p.y - vy).powi(2)).sqrt() < 2.0);
            assert!(near, "no corner near ({vx},{vy})");
        }
    }

    #[test]
    fn checkerboard_junctions_recovered() {
        let cell = 8usize;
        let mut f = GrayFrame::new(64, 64);
        for y in 0..64 {
            for x in 0..64 {
                if ((x / cell) + (y / cell)) % 2 == 0 {
                    f.set(x, y, 230);
                }
            }
        }
        let pts = detect_corners(&f, 0.05, 200);
        // Interior junctions lie on the cell grid; each should have a corner
        // within 1 px.
        let mut hits = 0;
        let mut total = 0;
        for jy in (cell..64 - cell + 1).step_by(cell) {
            for jx in (cell..64 - cell + 1).step_by(cell) {
                total += 1;
                // The junction sits between pixels, at (jx - 0.5, jy - 0.5).
                let (cx, cy) = (jx as f32 - 0.5, jy as f32 - 0.5);
                if pts.iter().any(|p| ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt() <= 1.0) {
                    hits += 1;
                }
            }
        }
        assert_eq!(hits, total, "only {hits}/{total} junctions recovered");
    }
}
