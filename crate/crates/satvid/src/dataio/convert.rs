//! Bit-depth conversion and resolution reduction.

use crate::error::{Error, Result};
use crate::frame::{Gray16Frame, GrayFrame};

/// Percentile-stretch conversion to 8 bits: clips to the [p1, p99] range of
/// the frame's own histogram, then maps linearly to [0, 255] with
/// round-half-up. A constant frame (p1 == p99) converts to all zeros.
pub fn convert_16_to_8(frame: &Gray16Frame) -> GrayFrame {
    let mut hist = vec![0u32; 1 << 16];
    for &v in frame.data() {
        hist[v as usize] += 1;
    }
    let n = frame.data().len();
    let p1 = percentile_value(&hist, n, 0.01);
    let p99 = percentile_value(&hist, n, 0.99);
    let mut out = GrayFrame::new(frame.width(), frame.height());
    if p99 <= p1 {
        return out;
    }
    let lo = f64::from(p1);
    let span = f64::from(p99) - lo;
    for (dst, &v) in out.data_mut().iter_mut().zip(frame.data()) {
        let clipped = f64::from(v.clamp(p1, p99));
        *dst = ((clipped - lo) / span * 255.0 + 0.5).floor() as u8;
    }
    out
}

/// Nearest-rank percentile from a value histogram: the smallest value whose
/// cumulative count reaches ceil(p * n).
fn percentile_value(hist: &[u32], n: usize, p: f64) -> u16 {
    let rank = (p * n as f64).ceil().max(1.0) as u64;
    let mut cum = 0u64;
    for (v, &c) in hist.iter().enumerate() {
        cum += u64::from(c);
        if cum >= rank {
            return v as u16;
        }
    }
    (hist.len() - 1) as u16
}

/// Area-averaging downscale. Output dimensions are `round(dim * factor)`;
/// each output pixel is the exact mean of the input region it covers.
pub fn downscale(frame: &GrayFrame, factor: f64) -> Result<GrayFrame> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::data("downscale", format!("factor must be in (0, 1], got {factor}")));
    }
    let out_w = (frame.width() as f64 * factor).round() as usize;
    let out_h = (frame.height() as f64 * factor).round() as usize;
    if out_w < 1 || out_h < 1 {
        return Err(Error::data(
            "downscale",
            format!("output {out_w}x{out_h} from {}x{} at factor {factor}", frame.width(), frame.height()),
        ));
    }
    let sx = frame.width() as f64 / out_w as f64;
    let sy = frame.height() as f64 / out_h as f64;
    let mut out = GrayFrame::new(out_w, out_h);
    for oy in 0..out_h {
        let y0 = oy as f64 * sy;
        let y1 = (oy + 1) as f64 * sy;
        for ox in 0..out_w {
            let x0 = ox as f64 * sx;
            let x1 = (ox + 1) as f64 * sx;
            let mut acc = 0.0f64;
            let mut area = 0.0f64;
            for iy in y0.floor() as usize..(y1.ceil() as usize).min(frame.height()) {
                let wy = (y1.min((iy + 1) as f64) - y0.max(iy as f64)).max(0.0);
                if wy == 0.0 {
                    continue;
                }
                for ix in x0.floor() as usize..(x1.ceil() as usize).min(frame.width()) {
                    let wx = (x1.min((ix + 1) as f64) - x0.max(ix as f64)).max(0.0);
                    if wx == 0.0 {
                        continue;
                    }
                    acc += wx * wy * f64::from(frame.get(ix, iy));
                    area += wx * wy;
                }
            }
            out.set(ox, oy, (acc / area).round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_16bit_frame_becomes_zeros() {
        let f = Gray16Frame::from_vec(4, 4, vec![9137; 16]);
        let out = convert_16_to_8(&f);
        assert!(out.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn uniform_spread_maps_near_identity() {
        // 256 values 0..=255 spread over a 16x16 frame: the stretch should
        // stay within 3 gray levels of the identity mapping.
        let data: Vec<u16> = (0..256).map(|v| v as u16).collect();
        let f = Gray16Frame::from_vec(16, 16, data);
        let out = convert_16_to_8(&f);
        for (i, &v) in out.data().iter().enumerate() {
            assert!((i as i32 - i32::from(v)).abs() <= 3, "pixel {i} mapped to {v}");
        }
    }

    #[test]
    fn hot_pixels_clip_without_crushing_range() {
        // 1% hot pixels at 65535 over a gradient in 0..=1000.
        let mut data: Vec<u16> = (0..10_000).map(|i| (i % 1000) as u16).collect();
        for i in 0..100 {
            data[i * 100] = 65535;
        }
        let f = Gray16Frame::from_vec(100, 100, data);
        let out = convert_16_to_8(&f);
        let hot_out = out.get(0, 0);
        assert_eq!(hot_out, 255);
        // Non-hot dynamic range survives: values near 990 map close to 255.
        let max_regular = out
            .data()
            .iter()
            .zip(f.data())
            .filter(|(_, &src)| src != 65535)
            .map(|(&v, _)| v)
            .max()
            .unwrap();
        assert!(max_regular >= 250, "regular max {max_regular}");
    }

    #[test]
    fn downscale_identity_at_factor_one() {
        let f = GrayFrame::from_vec(3, 2, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(downscale(&f, 1.0).unwrap(), f);
    }

    #[test]
    fn downscale_constant_stays_constant() {
        let f = GrayFrame::from_vec(10, 10, vec![77; 100]);
        let out = downscale(&f, 0.2).unwrap();
        assert_eq!(out.width(), 2);
        assert_eq!(out.height(), 2);
        assert!(out.data().iter().all(|&v| v == 77));
    }

    #[test]
    fn downscale_blob_value_equals_area_fraction() {
        // 25x25 zeros with a 255-valued 5x5 blob at offset (1,1). At factor
        // 0.2 each output pixel covers a 5x5 box; the blob overlaps the
        // (0,0) box on 4x4 of 25 input pixels.
        let mut f = GrayFrame::new(25, 25);
        for y in 1..6 {
            for x in 1..6 {
                f.set(x, y, 255);
            }
        }
        let out = downscale(&f, 0.2).unwrap();
        let expect = (255.0f64 * 16.0 / 25.0).round() as u8;
        assert_eq!(out.get(0, 0), expect);
        // Mass conservation across the 2x2 block of boxes the blob touches.
        let total: f64 = (0..2)
            .flat_map(|y| (0..2).map(move |x| (x, y)))
            .map(|(x, y)| f64::from(out.get(x, y)) * 25.0)
            .sum();
        assert!((total - 255.0 * 25.0).abs() <= 2.0 * 25.0, "total {total}");
    }

    #[test]
    fn downscale_rejects_vanishing_output() {
        let f = GrayFrame::new(3, 3);
        assert!(downscale(&f, 0.1).is_err());
        assert!(downscale(&f, 1.5).is_err());
    }
}
