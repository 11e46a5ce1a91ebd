//! Image quality metrics and quantization-artifact diagnostics.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::image::RgbImage;
use crate::math;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MetricError {
    DimensionMismatch,
    /// SSIM needs at least an 11×11 image.
    ImageTooSmall {
        width: usize,
        height: usize,
    },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch => write!(f, "image dimensions do not match"),
            Self::ImageTooSmall { width, height } => {
                write!(f, "{width}x{height} image is too small (11x11 minimum)")
            }
        }
    }
}

impl core::error::Error for MetricError {}

fn check_dims(a: &RgbImage, b: &RgbImage) -> Result<(), MetricError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricError::DimensionMismatch);
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB over all pixels and channels, with
/// `MAX = 255`. Identical images score `f64::INFINITY`.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let mut sq = 0.0f64;
    for (pa, pb) in a.pixels().iter().zip(b.pixels()) {
        for ch in 0..3 {
            let d = pa[ch] as f64 - pb[ch] as f64;
            sq += d * d;
        }
    }
    if sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    let rmse = math::sqrt(sq / (a.pixels().len() * 3) as f64);
    Ok(20.0 * math::log10(255.0 / rmse))
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn ssim_window() -> [f64; SSIM_WINDOW * SSIM_WINDOW] {
    let mut w = [0.0f64; SSIM_WINDOW * SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for y in 0..SSIM_WINDOW {
        for x in 0..SSIM_WINDOW {
            let dx = x as f64 - c;
            let dy = y as f64 - c;
            let v = math::exp(-(dx * dx + dy * dy) / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
            w[y * SSIM_WINDOW + x] = v;
            sum += v;
        }
    }
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// Structural similarity with the standard 11×11 Gaussian window (σ = 1.5),
/// `K1 = 0.01`, `K2 = 0.03`, `L = 255`; computed per channel over every valid
/// window position and averaged.
pub fn ssim(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(MetricError::ImageTooSmall { width: w, height: h });
    }
    let win = ssim_window();
    let mut total = 0.0f64;
    let mut count = 0usize;
    for ch in 0..3 {
        for wy in 0..=h - SSIM_WINDOW {
            for wx in 0..=w - SSIM_WINDOW {
                let mut mu_a = 0.0;
                let mut mu_b = 0.0;
                let mut aa = 0.0;
                let mut bb = 0.0;
                let mut ab = 0.0;
                for y in 0..SSIM_WINDOW {
                    for x in 0..SSIM_WINDOW {
                        let g = win[y * SSIM_WINDOW + x];
                        let va = a.get(wx + x, wy + y)[ch] as f64;
                        let vb = b.get(wx + x, wy + y)[ch] as f64;
                        mu_a += g * va;
                        mu_b += g * vb;
                        aa += g * va * va;
                        bb += g * vb * vb;
                        ab += g * va * vb;
                    }
                }
                let var_a = aa - mu_a * mu_a;
                let var_b = bb - mu_b * mu_b;
                let cov = ab - mu_a * mu_b;
                let value = ((2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2))
                    / ((mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2));
                total += value;
                count += 1;
            }
        }
    }
    Ok(total / count as f64)
}

/// Mean L1 distance between the forward-difference gradients of the two
/// images (replicate padding; both directions, all pixels and channels).
pub fn grad_l1(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let (w, h) = (a.width(), a.height());
    let mut sum = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            for ch in 0..3 {
                let dax = if x + 1 < w {
                    a.get(x + 1, y)[ch] as f64 - a.get(x, y)[ch] as f64
                } else {
                    0.0
                };
                let dbx = if x + 1 < w {
                    b.get(x + 1, y)[ch] as f64 - b.get(x, y)[ch] as f64
                } else {
                    0.0
                };
                let day = if y + 1 < h {
                    a.get(x, y + 1)[ch] as f64 - a.get(x, y)[ch] as f64
                } else {
                    0.0
                };
                let dby = if y + 1 < h {
                    b.get(x, y + 1)[ch] as f64 - b.get(x, y)[ch] as f64
                } else {
                    0.0
                };
                sum += math::abs(dax - dbx) + math::abs(day - dby);
            }
        }
    }
    Ok(sum / (2 * w * h * 3) as f64)
}

/// Mean absolute per-channel difference in levels.
pub fn color_l1(a: &RgbImage, b: &RgbImage) -> Result<f64, MetricError> {
    check_dims(a, b)?;
    let mut sum = 0.0f64;
    for (pa, pb) in a.pixels().iter().zip(b.pixels()) {
        for ch in 0..3 {
            sum += math::abs(pa[ch] as f64 - pb[ch] as f64);
        }
    }
    Ok(sum / (a.pixels().len() * 3) as f64)
}

/// Minimum component area (pixels) for a flat region to count.
pub const FLAT_REGION_MIN_AREA: usize = 16;

/// Counts 4-connected components of exactly equal color with area at least
/// [`FLAT_REGION_MIN_AREA`], and the fraction of the image they cover.
pub fn flat_region_stats(g_img: &RgbImage) -> (usize, f64) {
    let (w, h) = (g_img.width(), g_img.height());
    if w == 0 || h == 0 {
        return (0, 0.0);
    }
    let px = g_img.pixels();
    let mut visited = vec![false; w * h];
    let mut stack = Vec::new();
    let mut count = 0usize;
    let mut covered = 0usize;

    for start in 0..w * h {
        if visited[start] {
            continue;
        }
        let color = px[start];
        let mut area = 0usize;
        visited[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            area += 1;
            let (x, y) = (i % w, i / w);
            let mut try_push = |j: usize| {
                if !visited[j] && px[j] == color {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                try_push(i - 1);
            }
            if x + 1 < w {
                try_push(i + 1);
            }
            if y > 0 {
                try_push(i - w);
            }
            if y + 1 < h {
                try_push(i + w);
            }
        }
        if area >= FLAT_REGION_MIN_AREA {
            count += 1;
            covered += area;
        }
    }
    (count, covered as f64 / (w * h) as f64)
}

/// Frame-level quality summary of a test image against its reference.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct QualityReport {
    /// dB; `f64::INFINITY` for identical images.
    pub psnr: f64,
    pub ssim: f64,
    /// Mean |ΔI| in levels.
    pub color_l1: f64,
    /// Mean |Δ∇I| in levels.
    pub grad_l1: f64,
    /// Flat-region diagnostics of the test image.
    pub flat_region_count: usize,
    pub flat_coverage: f64,
}

/// Scores `test` against `reference`; flat-region diagnostics describe
/// `test`.
pub fn quality_report(test: &RgbImage, reference: &RgbImage) -> Result<QualityReport, MetricError> {
    let (flat_region_count, flat_coverage) = flat_region_stats(test);
    Ok(QualityReport {
        psnr: psnr(test, reference)?,
        ssim: ssim(test, reference)?,
        color_l1: color_l1(test, reference)?,
        grad_l1: grad_l1(test, reference)?,
        flat_region_count,
        flat_coverage,
    })
}
