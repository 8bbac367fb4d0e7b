//! Fixed-scale gradient-orientation descriptors.
//!
//! A 16x16 window around each point, split into a 4x4 grid of cells with 8
//! orientation bins each (128 dimensions). Magnitude-weighted votes are
//! linearly split between the two nearest orientation bins, the vector is
//! L2-normalized, clamped at 0.2, and renormalized. No scale-space and no
//! dominant-orientation alignment: consecutive registered satellite frames
//! share scale and orientation, which is exactly the regime this runs in.

use super::InterestPoint;
use crate::frame::GrayFrame;

const WINDOW: usize = 16;
const CELLS: usize = 4;
const BINS: usize = 8;
const MARGIN: usize = WINDOW / 2 + 1;
pub const DESCRIPTOR_LEN: usize = CELLS * CELLS * BINS;

/// Computes descriptors; points too close to the border for a full window
/// are dropped.
pub fn describe(frame: &GrayFrame, points: Vec<InterestPoint>) -> Vec<InterestPoint> {
    let w = frame.width();
    let h = frame.height();
    let gray: Vec<f32> = frame.data().iter().map(|&v| f32::from(v) / 255.0).collect();
    let at = |x: usize, y: usize| gray[y * w + x];

    points
        .into_iter()
        .filter_map(|mut p| {
            let cx = p.x.round() as isize;
            let cy = p.y.round() as isize;
            if cx < MARGIN as isize || cy < MARGIN as isize || cx + (MARGIN as isize) >= w as isize || cy + (MARGIN as isize) >= h as isize {
                return None;
            }
            let cx = cx as usize;
            let cy = cy as usize;
            let mut desc = vec![0.0f32; DESCRIPTOR_LEN];
            for wy in 0..WINDOW {
                for wx in 0..WINDOW {
                    let px = cx + wx - WINDOW / 2;
                    let py = cy + wy - WINDOW / 2;
                    let gx = at(px + 1, py) - at(px - 1, py);
                    let gy = at(px, py + 1) - at(px, py - 1);
                    let mag = (gx * gx + gy * gy).sqrt();
                    if mag == 0.0 {
                        continue;
                    }
                    let cell_size = WINDOW / CELLS;
                    let cell = (wy / cell_size) * CELLS + wx / cell_size;
                    // Orientation in [0, 2pi), linearly split across the two
                    // nearest of 8 bins.
                    let angle = gy.atan2(gx).rem_euclid(std::f32::consts::TAU);
                    let pos = angle / std::f32::consts::TAU * BINS as f32;
                    let b0 = (pos.floor() as usize) % BINS;
                    let frac = pos - pos.floor();
                    desc[cell * BINS + b0] += mag * (1.0 - frac);
                    desc[cell * BINS + (b0 + 1) % BINS] += mag * frac;
                }
            }
            if !normalize(&mut desc) {
                return None;
            }
            // Clamp large components (illumination robustness) and renormalize.
            for v in &mut desc {
                *v = v.min(0.2);
            }
            normalize(&mut desc);
            p.descriptor = desc;
            Some(p)
        })
        .collect()
}

fn normalize(v: &mut [f32]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
    if norm <= 1e-12 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

/// Euclidean distance between two descriptors.
pub fn descriptor_distance(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f32>().sqrt()
}
