//! Inverse-mapping warps.

use super::homography::Homography;
use crate::frame::GrayFrame;

/// Warps `frame` into the reference grid of size `out_w` x `out_h`, taking
/// `h` as the frame-to-reference transform. Each output pixel samples the
/// source bilinearly at the inverse-mapped position; positions outside the
/// source are 0 and flagged false in the validity mask.
pub fn warp(frame: &GrayFrame, h: &Homography, out_w: usize, out_h: usize) -> (GrayFrame, Vec<bool>) {
    let inv = match h.inverse() {
        Ok(inv) => inv,
        // Singular transforms map everything outside.
        Err(_) => return (GrayFrame::new(out_w, out_h), vec![false; out_w * out_h]),
    };
    let mut out = GrayFrame::new(out_w, out_h);
    let mut validity = vec![false; out_w * out_h];
    for y in 0..out_h {
        for x in 0..out_w {
            let (sx, sy) = inv.apply(x as f64, y as f64);
            if let Some(v) = frame.sample_bilinear(sx, sy) {
                out.set(x, y, v.round().clamp(0.0, 255.0) as u8);
                validity[y * out_w + x] = true;
            }
        }
    }
    (out, validity)
}
