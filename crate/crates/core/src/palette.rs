//! Color palettes, median-cut palette construction and nearest-color
//! quantization.
//!
//! Quantization maps every pixel to the palette color minimizing the squared
//! RGB distance. Equidistant candidates resolve to the lowest palette index,
//! so the mapping (and the Voronoi cell decomposition it induces) is exact
//! and reproducible; [`cell_contains`] is the membership test for those
//! cells.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::image::{RealImage, RgbImage};
use crate::math;

/// Ordered list of at most 256 distinct RGB colors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Palette {
    colors: Vec<[u8; 3]>,
}

/// Palette construction failure.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PaletteError {
    /// Requested or supplied palette has no colors.
    Empty,
    /// More than 256 colors.
    TooLarge(usize),
    /// The same color appears twice.
    Duplicate([u8; 3]),
    /// Source image has no pixels.
    EmptyImage,
}

impl fmt::Display for PaletteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "palette must contain at least one color"),
            Self::TooLarge(n) => write!(f, "palette of {n} colors exceeds the 256-color limit"),
            Self::Duplicate(c) => write!(f, "duplicate palette color {c:?}"),
            Self::EmptyImage => write!(f, "cannot build a palette from an empty image"),
        }
    }
}

impl core::error::Error for PaletteError {}

impl Palette {
    /// Validates and wraps a color list: 1..=256 pairwise distinct colors.
    pub fn new(colors: Vec<[u8; 3]>) -> Result<Self, PaletteError> {
        if colors.is_empty() {
            return Err(PaletteError::Empty);
        }
        if colors.len() > 256 {
            return Err(PaletteError::TooLarge(colors.len()));
        }
        let mut seen = colors.clone();
        seen.sort_unstable();
        for pair in seen.windows(2) {
            if pair[0] == pair[1] {
                return Err(PaletteError::Duplicate(pair[0]));
            }
        }
        Ok(Self { colors })
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn colors(&self) -> &[[u8; 3]] {
        &self.colors
    }

    #[inline]
    pub fn color(&self, index: usize) -> [u8; 3] {
        self.colors[index]
    }

    /// Index of an exactly matching color, if present.
    pub fn index_of(&self, color: [u8; 3]) -> Option<usize> {
        self.colors.iter().position(|&c| c == color)
    }

    /// Nearest palette index by squared RGB distance; ties go to the lowest
    /// index. Exact integer arithmetic.
    pub fn nearest_index_u8(&self, color: [u8; 3]) -> usize {
        let mut best = 0usize;
        let mut best_d = i64::MAX;
        for (i, c) in self.colors.iter().enumerate() {
            let mut d = 0i64;
            for ch in 0..3 {
                let diff = color[ch] as i64 - c[ch] as i64;
                d += diff * diff;
            }
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Nearest palette index for a real-valued color; same tie-break rule.
    pub fn nearest_index(&self, color: [f64; 3]) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.colors.iter().enumerate() {
            let mut d = 0.0f64;
            for ch in 0..3 {
                let diff = color[ch] - c[ch] as f64;
                d += diff * diff;
            }
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// True iff `color` lies in the quantization cell of `palette[index]`, i.e.
/// quantizing the single color yields that index (tie-break included).
pub fn cell_contains(palette: &Palette, index: usize, color: [f64; 3]) -> bool {
    palette.nearest_index(color) == index
}

/// Quantizes every pixel to its nearest palette color.
pub fn quantize(image: &RgbImage, palette: &Palette) -> RgbImage {
    let data = image.pixels().iter().map(|&p| palette.color(palette.nearest_index_u8(p))).collect();
    RgbImage::from_pixels(image.width(), image.height(), data)
}

/// Like [`quantize`] but returns palette indices instead of colors.
pub fn quantize_indices(image: &RgbImage, palette: &Palette) -> Vec<u8> {
    image.pixels().iter().map(|&p| palette.nearest_index_u8(p) as u8).collect()
}

/// Quantizes a real-valued working buffer to palette colors.
pub fn quantize_real(image: &RealImage, palette: &Palette) -> RgbImage {
    let data = image.pixels().iter().map(|&p| palette.color(palette.nearest_index(p))).collect();
    RgbImage::from_pixels(image.width(), image.height(), data)
}

/// Contiguous range of the sorted working pixel array.
#[derive(Clone, Copy)]
struct ColorBox {
    start: usize,
    end: usize,
}

impl ColorBox {
    fn len(&self) -> usize {
        self.end - self.start
    }

    /// Channel with the largest value range, and that range. Ties prefer the
    /// lower channel number.
    fn widest_channel(&self, pixels: &[[u8; 3]]) -> (usize, u8) {
        let mut lo = [255u8; 3];
        let mut hi = [0u8; 3];
        for p in &pixels[self.start..self.end] {
            for ch in 0..3 {
                lo[ch] = lo[ch].min(p[ch]);
                hi[ch] = hi[ch].max(p[ch]);
            }
        }
        let mut best = 0;
        let mut best_range = hi[0] - lo[0];
        for ch in 1..3 {
            let range = hi[ch] - lo[ch];
            if range > best_range {
                best_range = range;
                best = ch;
            }
        }
        (best, best_range)
    }

    fn mean_color(&self, pixels: &[[u8; 3]]) -> [u8; 3] {
        let mut sum = [0u64; 3];
        for p in &pixels[self.start..self.end] {
            for ch in 0..3 {
                sum[ch] += p[ch] as u64;
            }
        }
        let n = self.len() as f64;
        [
            math::round(sum[0] as f64 / n) as u8,
            math::round(sum[1] as f64 / n) as u8,
            math::round(sum[2] as f64 / n) as u8,
        ]
    }
}

/// Builds a palette of up to `n` colors by median cut.
///
/// Boxes are split most-populated first, along the channel with the largest
/// value range, at the pixel-count median (the median element stays in the
/// lower half). Each box contributes the rounded mean of its pixels; the
/// result is sorted lexicographically. Images with at most `n` distinct
/// colors yield exactly their distinct-color set.
pub fn median_cut_palette(image: &RgbImage, n: usize) -> Result<Palette, PaletteError> {
    median_cut(image.pixels(), n)
}

/// Median cut over a raw pixel sample (used by callers that pool pixels
/// across frames before fitting one palette).
pub fn median_cut(sample: &[[u8; 3]], n: usize) -> Result<Palette, PaletteError> {
    if n == 0 {
        return Err(PaletteError::Empty);
    }
    if sample.is_empty() {
        return Err(PaletteError::EmptyImage);
    }
    let n = n.min(256);
    let mut pixels = sample.to_vec();
    let len = pixels.len();
    let mut boxes = vec![ColorBox { start: 0, end: len }];

    // Splitting to `n` boxes can still yield fewer than `n` distinct means
    // (rounded means of different boxes may collide), so keep splitting until
    // the deduplicated palette reaches `n` or no box is divisible.
    let mut want = n;
    loop {
        while boxes.len() < want {
            let mut pick = None;
            let mut pick_len = 0usize;
            for (i, b) in boxes.iter().enumerate() {
                let (_, range) = b.widest_channel(&pixels);
                if range > 0 && b.len() > pick_len {
                    pick_len = b.len();
                    pick = Some(i);
                }
            }
            let Some(i) = pick else { break };
            let b = boxes[i];
            let (ch, _) = b.widest_channel(&pixels);
            let slice = &mut pixels[b.start..b.end];
            slice.sort_unstable_by_key(|p| (p[ch], *p));
            let split = b.start + (b.len() - 1) / 2 + 1;
            boxes[i] = ColorBox { start: b.start, end: split };
            boxes.insert(i + 1, ColorBox { start: split, end: b.end });
        }

        let mut colors: Vec<[u8; 3]> = boxes.iter().map(|b| b.mean_color(&pixels)).collect();
        colors.sort_unstable();
        colors.dedup();

        let splittable = boxes.iter().any(|b| b.widest_channel(&pixels).1 > 0);
        if colors.len() >= n || !splittable {
            colors.truncate(n);
            return Palette::new(colors);
        }
        want = boxes.len() + 1;
    }
}
