//! Deterministic fixtures shared by the cli-crate integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ungif_core::RgbImage;

/// Smooth synthetic scene: per-channel affine ramp plus a couple of
/// long-wavelength sinusoids, clamped to [0, 255].
pub fn lowfreq_scene(seed: u64, width: usize, height: usize) -> RgbImage {
    scene_with_wavelengths(seed, width, height, 48.0, 128.0, 2, 5.0..16.0)
}

/// Smooth random texture with medium wavelengths; enough structure for flow.
pub fn smooth_texture(seed: u64, width: usize, height: usize) -> RgbImage {
    scene_with_wavelengths(seed, width, height, 10.0, 32.0, 3, 8.0..20.0)
}

fn scene_with_wavelengths(
    seed: u64,
    width: usize,
    height: usize,
    min_wl: f64,
    max_wl: f64,
    n_waves: usize,
    amp: std::ops::Range<f64>,
) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: [f64; 3] =
        [rng.gen_range(70.0..190.0), rng.gen_range(70.0..190.0), rng.gen_range(70.0..190.0)];
    let slope_x: [f64; 3] =
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let slope_y: [f64; 3] =
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    #[allow(clippy::type_complexity)]
    let waves: Vec<(f64, f64, f64, f64, [f64; 3])> = (0..n_waves)
        .map(|_| {
            let wl = rng.gen_range(min_wl..max_wl);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp = rng.gen_range(amp.clone());
            let gains = [rng.gen_range(0.4..1.0), rng.gen_range(0.4..1.0), rng.gen_range(0.4..1.0)];
            (wl, angle, phase, amp, gains)
        })
        .collect();

    let mut img = RgbImage::filled(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            let mut px = [0u8; 3];
            for ch in 0..3 {
                let mut v = base[ch] + slope_x[ch] * x as f64 + slope_y[ch] * y as f64;
                for (wl, angle, phase, amp, gains) in &waves {
                    let u = (x as f64 * angle.cos() + y as f64 * angle.sin())
                        * std::f64::consts::TAU
                        / wl;
                    v += amp * gains[ch] * (u + phase).sin();
                }
                px[ch] = v.clamp(0.0, 255.0).round() as u8;
            }
            img.set(x, y, px);
        }
    }
    img
}

/// Smooth single-direction gradient: one scalar ramp drives all channels
/// with per-channel endpoints, so every color lies on a line segment in RGB
/// that a small palette can cover, and nothing saturates.
pub fn gradient_scene(seed: u64, width: usize, height: usize) -> RgbImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let lo: [f64; 3] =
        [rng.gen_range(10.0..120.0), rng.gen_range(10.0..120.0), rng.gen_range(10.0..120.0)];
    let hi: [f64; 3] =
        [rng.gen_range(135.0..245.0), rng.gen_range(135.0..245.0), rng.gen_range(135.0..245.0)];
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for (cx, cy) in [
        (0.0, 0.0),
        (width as f64 - 1.0, 0.0),
        (0.0, height as f64 - 1.0),
        (width as f64 - 1.0, height as f64 - 1.0),
    ] {
        let t = cx * dx + cy * dy;
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }
    let span = (t_max - t_min).max(1.0);

    let mut img = RgbImage::filled(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            let t = ((x as f64 * dx + y as f64 * dy) - t_min) / span;
            let mut px = [0u8; 3];
            for ch in 0..3 {
                px[ch] = (lo[ch] + (hi[ch] - lo[ch]) * t).round() as u8;
            }
            img.set(x, y, px);
        }
    }
    img
}

pub fn crop(master: &RgbImage, ox: usize, oy: usize, width: usize, height: usize) -> RgbImage {
    let mut out = RgbImage::filled(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            out.set(x, y, master.get(ox + x, oy + y));
        }
    }
    out
}

/// Rigid-translation clip: `frames` crops of a shared master texture, the
/// origin advancing by `step` pixels per frame.
pub fn translation_clip(seed: u64, frames: usize, step: usize, size: usize) -> Vec<RgbImage> {
    let master = smooth_texture(seed, size + frames * step + 16, size + 16);
    (0..frames).map(|k| crop(&master, 8 + k * step, 8, size, size)).collect()
}

pub fn random_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> RgbImage {
    let data =
        (0..width * height).map(|_| [rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>()]).collect();
    RgbImage::from_pixels(width, height, data)
}

pub fn random_palette(rng: &mut ChaCha8Rng, n: usize) -> ungif_core::Palette {
    let mut colors = Vec::with_capacity(n);
    while colors.len() < n {
        let c = [rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>()];
        if !colors.contains(&c) {
            colors.push(c);
        }
    }
    ungif_core::Palette::new(colors).unwrap()
}
