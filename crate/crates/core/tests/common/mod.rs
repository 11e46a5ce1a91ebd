//! Deterministic fixtures shared by the integration tests.

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

/// Crops a window from a master image; shifting the origin between crops
/// simulates rigid translation.
pub fn crop(master: &RgbImage, ox: usize, oy: usize, width: usize, height: usize) -> RgbImage {
    let mut out = RgbImage::filled(width, height, [0, 0, 0]);
    for y in 0..height {
        for x in 0..width {
            out.set(x, y, master.get(ox + x, oy + y));
        }
    }
    out
}

/// Random image with independent uniform pixels.
pub fn random_image(rng: &mut ChaCha8Rng, width: usize, height: usize) -> RgbImage {
    let data =
        (0..width * height).map(|_| [rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>()]).collect();
    RgbImage::from_pixels(width, height, data)
}

/// Random palette of exactly `n` distinct colors.
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
