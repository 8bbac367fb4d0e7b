//! On-disk dataset layout: PNG frame sequences, numeric file names, and the
//! true-homography sidecar.

use crate::error::{Error, Result};
use crate::frame::{Gray16Frame, GrayFrame};
use crate::register::Homography;
use std::path::{Path, PathBuf};

/// Zero-padded numeric frame file name, e.g. `000042.png`.
pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.png")
}

/// All `.png` files with numeric stems in `dir`, sorted by frame number.
pub fn list_frame_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut numbered = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        let Ok(number) = stem.parse::<usize>() else { continue };
        numbered.push((number, path));
    }
    numbered.sort();
    Ok(numbered.into_iter().map(|(_, p)| p).collect())
}

pub fn save_frame_png(frame: &GrayFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img = image::GrayImage::from_raw(frame.width() as u32, frame.height() as u32, frame.data().to_vec())
        .expect("frame buffer always matches its dimensions");
    img.save(path).map_err(|e| Error::data("save_frame_png", format!("{}: {e}", path.display())))
}

pub fn load_frame_png(path: impl AsRef<Path>) -> Result<GrayFrame> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::data("load_frame_png", format!("{}: {e}", path.display())))?;
    let gray = img.to_luma8();
    Ok(GrayFrame::from_vec(gray.width() as usize, gray.height() as usize, gray.into_raw()))
}

/// Loads a 16-bit grayscale PNG. 8-bit inputs are widened (v * 257), which
/// the percentile stretch later removes.
pub fn load_frame16_png(path: impl AsRef<Path>) -> Result<Gray16Frame> {
    let path = path.as_ref();
    let img =
        image::open(path).map_err(|e| Error::data("load_frame16_png", format!("{}: {e}", path.display())))?;
    let gray = img.to_luma16();
    Ok(Gray16Frame::from_vec(gray.width() as usize, gray.height() as usize, gray.into_raw()))
}

/// Writes homographies one per line, nine row-major values separated by
/// single spaces, line order = frame order.
pub fn save_homographies(path: impl AsRef<Path>, homographies: &[Homography]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for h in homographies {
        let v = h.to_row_major();
        let row: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_homographies(path: impl AsRef<Path>) -> Result<Vec<Homography>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::data("load_homographies", format!("line {}: bad number `{t}`", i + 1)))
            })
            .collect::<Result<_>>()?;
        if values.len() != 9 {
            return Err(Error::data(
                "load_homographies",
                format!("line {}: expected 9 values, got {}", i + 1, values.len()),
            ));
        }
        let mut v = [0.0f64; 9];
        v.copy_from_slice(&values);
        out.push(Homography::from_row_major(v)?);
    }
    Ok(out)
}
