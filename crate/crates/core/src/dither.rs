//! Floyd–Steinberg error-diffusion dithering.

use alloc::vec::Vec;

use crate::image::RgbImage;
use crate::palette::Palette;

/// Dithers `image` onto `palette`, returning the palette indices.
///
/// Raster scan, left to right, top to bottom. Each pixel is snapped to the
/// nearest palette color of its error-accumulated value (clamped to
/// `[0, 255]` for the lookup only) and the signed error is diffused to the
/// unvisited neighbors with the classic 7/16, 3/16, 5/16, 1/16 weights.
/// Accumulation stays unclamped so diffusion does not double-clip.
pub fn dither_floyd_steinberg_indices(image: &RgbImage, palette: &Palette) -> Vec<u8> {
    let (w, h) = (image.width(), image.height());
    let mut work: Vec<[f64; 3]> =
        image.pixels().iter().map(|p| [p[0] as f64, p[1] as f64, p[2] as f64]).collect();
    let mut indices = Vec::with_capacity(w * h);

    for y in 0..h {
        for x in 0..w {
            let at = y * w + x;
            let v = work[at];
            let clamped = [v[0].clamp(0.0, 255.0), v[1].clamp(0.0, 255.0), v[2].clamp(0.0, 255.0)];
            let idx = palette.nearest_index(clamped);
            indices.push(idx as u8);
            let chosen = palette.color(idx);
            let err = [v[0] - chosen[0] as f64, v[1] - chosen[1] as f64, v[2] - chosen[2] as f64];

            let mut spread = |dx: isize, dy: isize, weight: f64| {
                let nx = x as isize + dx;
                let ny = y as isize + dy;
                if nx >= 0 && (nx as usize) < w && ny >= 0 && (ny as usize) < h {
                    let n = &mut work[ny as usize * w + nx as usize];
                    for ch in 0..3 {
                        n[ch] += err[ch] * weight;
                    }
                }
            };
            spread(1, 0, 7.0 / 16.0);
            spread(-1, 1, 3.0 / 16.0);
            spread(0, 1, 5.0 / 16.0);
            spread(1, 1, 1.0 / 16.0);
        }
    }
    indices
}

/// Dithers `image` onto `palette`, returning the dithered image.
pub fn dither_floyd_steinberg(image: &RgbImage, palette: &Palette) -> RgbImage {
    let indices = dither_floyd_steinberg_indices(image, palette);
    let data = indices.iter().map(|&i| palette.color(i as usize)).collect();
    RgbImage::from_pixels(image.width(), image.height(), data)
}
