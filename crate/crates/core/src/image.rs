//! Raster containers: an 8-bit stored image and a real-valued working buffer.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// 8-bit RGB raster, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<[u8; 3]>,
}

impl RgbImage {
    /// Creates an image filled with `fill`.
    pub fn filled(width: usize, height: usize, fill: [u8; 3]) -> Self {
        Self { width, height, data: vec![fill; width * height] }
    }

    /// Wraps a pixel buffer. Panics if `data.len() != width * height`.
    pub fn from_pixels(width: usize, height: usize, data: Vec<[u8; 3]>) -> Self {
        assert_eq!(data.len(), width * height, "pixel buffer size mismatch");
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: [u8; 3]) {
        self.data[y * self.width + x] = px;
    }

    /// Converts to a real-valued working buffer.
    pub fn to_real(&self) -> RealImage {
        RealImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|p| [p[0] as f64, p[1] as f64, p[2] as f64]).collect(),
        }
    }
}

/// Real-valued RGB working buffer; channel values are nominally in `[0, 255]`
/// but intermediate computations may leave that range.
#[derive(Clone, PartialEq, Debug)]
pub struct RealImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl RealImage {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![[0.0; 3]; width * height] }
    }

    /// Wraps a pixel buffer. Panics if `data.len() != width * height`.
    pub fn from_pixels(width: usize, height: usize, data: Vec<[f64; 3]>) -> Self {
        assert_eq!(data.len(), width * height, "pixel buffer size mismatch");
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: [f64; 3]) {
        self.data[y * self.width + x] = px;
    }

    /// Clamps every channel to `[0, 255]` in place.
    pub fn clamp_channels(&mut self) {
        for px in &mut self.data {
            for c in px {
                *c = c.clamp(0.0, 255.0);
            }
        }
    }

    /// Rounds to the stored 8-bit form, clamping to `[0, 255]`.
    pub fn to_rgb(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|p| {
                    [
                        math::round(p[0].clamp(0.0, 255.0)) as u8,
                        math::round(p[1].clamp(0.0, 255.0)) as u8,
                        math::round(p[2].clamp(0.0, 255.0)) as u8,
                    ]
                })
                .collect(),
        }
    }
}

/// Rec. 601 luma, used wherever flow estimation needs a single channel.
#[inline]
pub(crate) fn luminance(px: [u8; 3]) -> f64 {
    0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_real() {
        let img = RgbImage::from_pixels(2, 1, vec![[0, 128, 255], [1, 2, 3]]);
        assert_eq!(img.to_real().to_rgb(), img);
    }

    #[test]
    fn to_rgb_clamps_and_rounds() {
        let real = RealImage::from_pixels(2, 1, vec![[-3.0, 255.7, 127.5], [0.49, 0.5, 300.0]]);
        let rgb = real.to_rgb();
        assert_eq!(rgb.pixels(), &[[0, 255, 128], [0, 1, 255]]);
    }
}
