//! Frame stacks: the model input samples, assembled from registered frames
//! around a mid frame with a fixed frame skip.

use crate::dataio::tiles::{extract_tile, Roobi};
use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use tensorkit::Tensor4;

/// `c` tile planes in `[0, 1]`, temporally ordered, from frames
/// `mid - h*k, ..., mid, ..., mid + h*k` with `h = (c-1)/2`. Labels for the
/// stack always refer to the mid frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    pub mid_frame_index: usize,
    pub skip: usize,
    pub x0: usize,
    pub y0: usize,
    pub size: usize,
    planes: Vec<Vec<f32>>,
}

impl FrameStack {
    pub fn from_planes(
        mid_frame_index: usize,
        skip: usize,
        x0: usize,
        y0: usize,
        size: usize,
        planes: Vec<Vec<f32>>,
    ) -> Self {
        assert!(matches!(planes.len(), 1 | 3 | 5 | 7), "stack depth must be odd in 1..=7");
        assert!(planes.iter().all(|p| p.len() == size * size), "plane size mismatch");
        FrameStack { mid_frame_index, skip, x0, y0, size, planes }
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, i: usize) -> &[f32] {
        &self.planes[i]
    }

    pub fn plane_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.planes[i]
    }

    /// Model input, shape `[1, c, size, size]`.
    pub fn to_tensor(&self) -> Tensor4<f32> {
        let mut data = Vec::with_capacity(self.channels() * self.size * self.size);
        for p in &self.planes {
            data.extend_from_slice(p);
        }
        Tensor4::from_vec([1, self.channels(), self.size, self.size], data)
            .expect("stack planes always fill the tensor")
    }
}

/// Bookkeeping from stack assembly: mid frames dropped for lacking margin
/// frames on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StackSummary {
    pub produced: usize,
    pub skipped_mid_frames: usize,
}

/// One sample per (valid mid frame, tile): the stack plus the mid-frame
/// annotation points inside the tile, in tile coordinates. Stacks with no
/// points are kept; they teach the background.
pub fn make_stacks(
    frames: &[GrayFrame],
    annotations: &crate::dataio::annotations::PointAnnotations,
    c: usize,
    skip_k: usize,
    roobis: &[Roobi],
) -> Result<(Vec<(FrameStack, Vec<(f32, f32)>)>, StackSummary)> {
    if !matches!(c, 1 | 3 | 5 | 7) {
        return Err(Error::data("make_stacks", format!("stack depth must be odd in 1..=7, got {c}")));
    }
    if skip_k == 0 {
        return Err(Error::data("make_stacks", "frame skip must be at least 1"));
    }
    if frames.is_empty() {
        return Err(Error::data("make_stacks", "no frames"));
    }
    let (w, h) = (frames[0].width(), frames[0].height());
    if frames.iter().any(|f| f.width() != w || f.height() != h) {
        return Err(Error::data("make_stacks", "frames differ in size"));
    }
    let half = (c - 1) / 2;
    let margin = half * skip_k;
    let mut samples = Vec::new();
    let mut summary = StackSummary::default();
    for mid in 0..frames.len() {
        if mid < margin || mid + margin >= frames.len() {
            summary.skipped_mid_frames += 1;
            continue;
        }
        let mid_points = annotations.points_in_frame(mid);
        for roobi in roobis {
            let planes: Vec<Vec<f32>> = (0..c)
                .map(|j| {
                    let idx = mid - margin + j * skip_k;
                    extract_tile(&frames[idx], roobi).to_normalized()
                })
                .collect();
            let stack = FrameStack::from_planes(mid, skip_k, roobi.x0, roobi.y0, roobi.size, planes);
            let points: Vec<(f32, f32)> = mid_points
                .iter()
                .filter(|&&(x, y)| {
                    let (fx, fy) = (f64::from(x), f64::from(y));
                    fx >= roobi.x0 as f64
                        && fx < (roobi.x0 + roobi.size) as f64
                        && fy >= roobi.y0 as f64
                        && fy < (roobi.y0 + roobi.size) as f64
                })
                .map(|&(x, y)| (x - roobi.x0 as f32, y - roobi.y0 as f32))
                .collect();
            samples.push((stack, points));
        }
        summary.produced += roobis.len();
    }
    Ok((samples, summary))
}
