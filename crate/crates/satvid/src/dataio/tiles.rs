//! Tiling of an area of interest into fixed-size square tiles.

use crate::error::{Error, Result};
use crate::frame::GrayFrame;

/// Dataset split a tile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Split {
    #[default]
    Train,
    Val,
    Test,
}

/// One tile of an area of interest: an `size x size` square anchored at
/// `(x0, y0)` in frame coordinates. `padded` marks right/bottom tiles that
/// extend past the frame and are zero-filled there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roobi {
    pub id: usize,
    pub x0: usize,
    pub y0: usize,
    pub size: usize,
    pub padded: bool,
    pub split: Split,
}

pub const MIN_TILE_SIZE: usize = 32;

/// Non-overlapping grid of tiles covering `width x height`, row-major ids.
pub fn tile_roobis(width: usize, height: usize, size: usize) -> Result<Vec<Roobi>> {
    if size < MIN_TILE_SIZE {
        return Err(Error::data("tile_roobis", format!("tile size {size} below minimum {MIN_TILE_SIZE}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::data("tile_roobis", "empty area of interest"));
    }
    let cols = width.div_ceil(size);
    let rows = height.div_ceil(size);
    let mut tiles = Vec::with_capacity(cols * rows);
    for row in 0..rows {
        for col in 0..cols {
            let x0 = col * size;
            let y0 = row * size;
            tiles.push(Roobi {
                id: row * cols + col,
                x0,
                y0,
                size,
                padded: x0 + size > width || y0 + size > height,
                split: Split::Train,
            });
        }
    }
    Ok(tiles)
}

/// Cuts a tile out of a frame, zero-filling where the tile extends past the
/// frame boundary.
pub fn extract_tile(frame: &GrayFrame, roobi: &Roobi) -> GrayFrame {
    let mut out = GrayFrame::new(roobi.size, roobi.size);
    let x_end = (roobi.x0 + roobi.size).min(frame.width());
    let y_end = (roobi.y0 + roobi.size).min(frame.height());
    for y in roobi.y0..y_end {
        for x in roobi.x0..x_end {
            out.set(x - roobi.x0, y - roobi.y0, frame.get(x, y));
        }
    }
    out
}

/// Inverse of [`extract_tile`] over a full tiling: writes every tile back
/// at its origin, discarding padding. Tiles and descriptors are matched by
/// position in the two slices.
pub fn reassemble_tiles(tiles: &[GrayFrame], roobis: &[Roobi], width: usize, height: usize) -> Result<GrayFrame> {
    if tiles.len() != roobis.len() {
        return Err(Error::data(
            "reassemble_tiles",
            format!("{} tiles for {} descriptors", tiles.len(), roobis.len()),
        ));
    }
    let mut out = GrayFrame::new(width, height);
    let mut covered = vec![false; width * height];
    for (tile, roobi) in tiles.iter().zip(roobis) {
        if tile.width() != roobi.size || tile.height() != roobi.size {
            return Err(Error::data("reassemble_tiles", format!("tile {} has the wrong size", roobi.id)));
        }
        let x_end = (roobi.x0 + roobi.size).min(width);
        let y_end = (roobi.y0 + roobi.size).min(height);
        for y in roobi.y0..y_end {
            for x in roobi.x0..x_end {
                out.set(x, y, tile.get(x - roobi.x0, y - roobi.y0));
                covered[y * width + x] = true;
            }
        }
    }
    if !covered.iter().all(|&c| c) {
        return Err(Error::data("reassemble_tiles", "tiling does not cover the full area"));
    }
    Ok(out)
}
