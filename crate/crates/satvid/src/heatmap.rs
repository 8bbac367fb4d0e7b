//! Per-pixel vehicle-likelihood rasters.

/// A heatmap over a (possibly downsampled) frame grid. `scale_exp` is the
/// downsampling exponent d: heatmap pixel (x, y) covers the 2^d x 2^d frame
/// block starting at (x * 2^d, y * 2^d).
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    width: usize,
    height: usize,
    scale_exp: u8,
    data: Vec<f32>,
}

impl Heatmap {
    pub fn new(width: usize, height: usize, scale_exp: u8) -> Self {
        assert!(width > 0 && height > 0, "Heatmap: zero dimension");
        Heatmap { width, height, scale_exp, data: vec![0.0; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, scale_exp: u8, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height, "Heatmap: data length mismatch");
        assert!(width > 0 && height > 0, "Heatmap: zero dimension");
        Heatmap { width, height, scale_exp, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn scale_exp(&self) -> u8 {
        self.scale_exp
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn max_value(&self) -> f32 {
        self.data.iter().fold(f32::NEG_INFINITY, |a, &b| a.max(b))
    }

    /// Maps heatmap coordinates to frame coordinates: the center of the
    /// 2^d x 2^d block, i.e. x * 2^d + (2^d - 1) / 2.
    pub fn to_frame_coords(&self, x: f32, y: f32) -> (f32, f32) {
        let s = f32::from(self.scale_factor());
        let off = (s - 1.0) / 2.0;
        (x * s + off, y * s + off)
    }

    fn scale_factor(&self) -> u8 {
        1u8 << self.scale_exp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_coords_identity_at_full_resolution() {
        let h = Heatmap::new(8, 8, 0);
        assert_eq!(h.to_frame_coords(3.0, 5.0), (3.0, 5.0));
    }

    #[test]
    fn frame_coords_half_resolution_hits_block_center() {
        let h = Heatmap::new(4, 4, 1);
        assert_eq!(h.to_frame_coords(0.0, 0.0), (0.5, 0.5));
        assert_eq!(h.to_frame_coords(3.0, 1.0), (6.5, 2.5));
    }
}
