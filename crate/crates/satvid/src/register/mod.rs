//! Frame registration: remove platform ego-motion by warping every frame
//! onto the first (reference) frame.
//!
//! Pipeline per frame pair: Harris corners, fixed-scale gradient-histogram
//! descriptors, ratio-test matching, then a robust homography
//! (hypothesize-and-verify with truncated-quadratic scoring) and an inverse
//! bilinear warp. Homographies map frame coordinates to reference
//! coordinates throughout, so `warp(frame, h)` re-stabilizes the frame.

mod descriptor;
mod harris;
mod homography;
mod matching;
mod warp;

pub use descriptor::describe;
pub use harris::detect_corners;
pub use homography::{robust_homography, Homography};
pub use matching::match_features;
pub use warp::warp;

use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::seeds;

/// A feature point: sub-pixel position, Harris response, and (after
/// `describe`) an L2-normalized descriptor.
#[derive(Debug, Clone)]
pub struct InterestPoint {
    pub x: f32,
    pub y: f32,
    pub response: f32,
    pub descriptor: Vec<f32>,
}

/// Knobs for the whole registration stack, with workable defaults.
#[derive(Debug, Clone)]
pub struct RegistrationParams {
    /// Harris response threshold, relative to the frame's maximum response.
    pub response_threshold: f32,
    pub max_points: usize,
    /// Ratio-test bound d1/d2.
    pub match_ratio: f32,
    /// Inlier reprojection error bound in pixels.
    pub inlier_threshold: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for RegistrationParams {
    fn default() -> Self {
        RegistrationParams {
            response_threshold: 0.005,
            max_points: 500,
            match_ratio: 0.75,
            // About 3 sigma of the observed corner repeatability on noisy
            // footage; tighter cuts starve the refit of averaging power.
            inlier_threshold: 2.0,
            max_iterations: 2000,
            seed: 0,
        }
    }
}

/// One registered frame: the warped frame, the frame-to-reference
/// homography, and the validity mask of pixels that came from inside the
/// source frame.
pub struct RegisteredFrame {
    pub frame: GrayFrame,
    pub homography: Homography,
    pub validity: Vec<bool>,
}

/// Estimates the frame-to-reference homography between one frame pair.
pub fn register_pair(
    reference: &[InterestPoint],
    frame: &GrayFrame,
    params: &RegistrationParams,
    pair_seed: u64,
) -> Result<(Homography, Vec<bool>)> {
    let mut points = detect_corners(frame, params.response_threshold, params.max_points);
    points = describe(frame, points);
    let matches = match_features(&points, reference, params.match_ratio);
    let pairs: Vec<((f64, f64), (f64, f64))> = matches
        .iter()
        .map(|&(i, j)| {
            let a = &points[i];
            let b = &reference[j];
            ((f64::from(a.x), f64::from(a.y)), (f64::from(b.x), f64::from(b.y)))
        })
        .collect();
    robust_homography(&pairs, params.inlier_threshold, params.max_iterations, pair_seed)
}

/// Registers every frame to `frames[reference_index]` independently. The
/// reference maps to the identity; failures carry the frame index.
pub fn register_sequence(
    frames: &[GrayFrame],
    reference_index: usize,
    params: &RegistrationParams,
) -> Result<Vec<RegisteredFrame>> {
    if frames.is_empty() {
        return Err(Error::data("register_sequence", "no frames".to_string()));
    }
    if reference_index >= frames.len() {
        return Err(Error::data(
            "register_sequence",
            format!("reference index {reference_index} out of range for {} frames", frames.len()),
        ));
    }
    let reference = &frames[reference_index];
    let mut ref_points = detect_corners(reference, params.response_threshold, params.max_points);
    ref_points = describe(reference, ref_points);
    if ref_points.len() < 4 {
        return Err(Error::data(
            "register_sequence",
            format!("reference frame {reference_index}: only {} usable corners", ref_points.len()),
        ));
    }

    let mut out = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        if i == reference_index {
            let h = Homography::identity();
            out.push(RegisteredFrame {
                frame: frame.clone(),
                validity: vec![true; frame.width() * frame.height()],
                homography: h,
            });
            continue;
        }
        let pair_seed = seeds::derive_indexed(params.seed, "register-frame", i as u64);
        let (h, _) = register_pair(&ref_points, frame, params, pair_seed)
            .map_err(|e| Error::data("register_sequence", format!("frame {i}: {e}")))?;
        let (warped, validity) = warp(frame, &h, reference.width(), reference.height());
        out.push(RegisteredFrame { frame: warped, homography: h, validity });
    }
    Ok(out)
}
