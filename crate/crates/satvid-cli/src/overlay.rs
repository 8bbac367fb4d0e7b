//! Match-report overlays: the frame in grayscale with one marker per
//! detection or miss. True positives green, false positives blue, false
//! negatives red; each marker is a filled center dot plus a circle of
//! radius theta.

use image::{Rgb, RgbImage};
use satvid::evaluate::MatchReport;
use satvid::GrayFrame;

pub const TRUE_POSITIVE: Rgb<u8> = Rgb([0, 200, 0]);
pub const FALSE_POSITIVE: Rgb<u8> = Rgb([40, 80, 255]);
pub const FALSE_NEGATIVE: Rgb<u8> = Rgb([230, 30, 30]);

/// Renders the frame with the report's markers. An empty report returns
/// the unmodified frame (as RGB).
pub fn overlay(frame: &GrayFrame, report: &MatchReport, theta: f32) -> RgbImage {
    let (w, h) = (frame.width() as u32, frame.height() as u32);
    let mut img = RgbImage::from_fn(w, h, |x, y| {
        let v = frame.get(x as usize, y as usize);
        Rgb([v, v, v])
    });
    for p in &report.unmatched_ground_truth {
        draw_marker(&mut img, *p, theta, FALSE_NEGATIVE);
    }
    for p in &report.unmatched_detections {
        draw_marker(&mut img, *p, theta, FALSE_POSITIVE);
    }
    for pair in &report.matched {
        draw_marker(&mut img, pair.detection, theta, TRUE_POSITIVE);
    }
    img
}

/// A filled dot of radius 1 at the point (so the marker center carries the
/// class color) and a one-pixel-wide circle of radius `theta` around it.
fn draw_marker(img: &mut RgbImage, (x, y): (f32, f32), theta: f32, color: Rgb<u8>) {
    let reach = theta.ceil() as i64 + 1;
    let (cx, cy) = (f64::from(x), f64::from(y));
    for py in (y as i64 - reach)..=(y as i64 + reach) {
        for px in (x as i64 - reach)..=(x as i64 + reach) {
            if px < 0 || py < 0 || px >= i64::from(img.width()) || py >= i64::from(img.height()) {
                continue;
            }
            let d = ((px as f64 - cx).powi(2) + (py as f64 - cy).powi(2)).sqrt();
            if d <= 1.0 || (d - f64::from(theta)).abs() <= 0.5 {
                img.put_pixel(px as u32, py as u32, color);
            }
        }
    }
}
