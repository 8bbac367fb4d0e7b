//! Grayscale frame containers, row-major.

/// 8-bit grayscale frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "GrayFrame: zero dimension");
        GrayFrame { width, height, data: vec![0; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height, "GrayFrame: data length mismatch");
        assert!(width > 0 && height > 0, "GrayFrame: zero dimension");
        GrayFrame { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    /// Pixel values as f32 in `[0, 1]` (divide by 255), row-major.
    pub fn to_normalized(&self) -> Vec<f32> {
        self.data.iter().map(|&v| f32::from(v) / 255.0).collect()
    }

    /// Bilinear sample at fractional coordinates; `None` outside
    /// `[0, w-1] x [0, h-1]`.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        if !(0.0..=(self.width - 1) as f64).contains(&x) || !(0.0..=(self.height - 1) as f64).contains(&y) {
            return None;
        }
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let v00 = f64::from(self.get(x0, y0));
        let v10 = f64::from(self.get(x1, y0));
        let v01 = f64::from(self.get(x0, y1));
        let v11 = f64::from(self.get(x1, y1));
        Some(v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy)
    }
}

/// 16-bit grayscale frame, as delivered by high-bit-depth sources before
/// conversion to 8 bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray16Frame {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl Gray16Frame {
    pub fn from_vec(width: usize, height: usize, data: Vec<u16>) -> Self {
        assert_eq!(data.len(), width * height, "Gray16Frame: data length mismatch");
        assert!(width > 0 && height > 0, "Gray16Frame: zero dimension");
        Gray16Frame { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_at_integer_coords_is_exact() {
        let mut f = GrayFrame::new(4, 3);
        f.set(2, 1, 200);
        assert_eq!(f.sample_bilinear(2.0, 1.0), Some(200.0));
        assert_eq!(f.sample_bilinear(4.0, 0.0), None);
    }

    #[test]
    fn bilinear_midpoint_averages() {
        let f = GrayFrame::from_vec(2, 1, vec![0, 100]);
        assert_eq!(f.sample_bilinear(0.5, 0.0), Some(50.0));
    }
}
