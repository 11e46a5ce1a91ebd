//! Compositional iterative color dequantization.
//!
//! A quantized image `G` pins each pixel inside the quantization cell of its
//! palette color; dequantization estimates a continuous-tone image from that
//! constraint alone. The engine runs an unfolded loop: at step `t` it
//! requantizes the current estimate (`Gᵗ`, non-dithered mode only), asks an
//! [`UpdateOperator`] for an update `ΔI`, applies it, and optionally retracts
//! every pixel back into its cell so the result still quantizes to `G`
//! exactly. The operator is pluggable: [`ConstrainedSmoothing`] descends a
//! gradient-smoothness energy, [`ResidualStep`] follows the requantization
//! residual `G − Gᵗ`. Both consume the `(Iᵗ, G, Gᵗ, G − Gᵗ)` tuple, so a
//! richer (e.g. learned) operator can be dropped in without touching the
//! loop.
//!
//! Dithered inputs have no recoverable per-pixel quantization function, so in
//! dithered mode the loop skips requantization and the operator only sees
//! `(Iᵗ, G)`; the hard constraint is unavailable there.

use alloc::vec::Vec;
use core::fmt;

use crate::image::{RealImage, RgbImage};
use crate::math;
use crate::palette::{cell_contains, quantize_real, Palette};

/// Whether the source GIF frame was error-diffusion dithered.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DitherMode {
    NonDithered,
    Dithered,
}

/// Feasibility handling for the quantization constraint.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Constraint {
    /// Retract every pixel into its quantization cell after each step; the
    /// output requantizes to the input exactly. Non-dithered mode only.
    Hard,
    /// No retraction.
    Off,
}

/// Dequantization loop parameters.
#[derive(Clone, Copy, Debug)]
pub struct DequantConfig {
    /// Unfold count `k`: number of update-then-requantize steps.
    pub unfold_steps: usize,
    pub mode: DitherMode,
    /// Scales the smoothing descent step; the effective inner step is
    /// `step_size * smoothness_weight`.
    pub smoothness_weight: f64,
    /// Step size `η` shared by the update operators.
    pub step_size: f64,
    /// Gradient-descent iterations inside one smoothing update.
    pub inner_iterations: usize,
    pub constraint: Constraint,
    /// Early-out threshold on mean `|ΔI|` per channel level.
    pub convergence_tol: f64,
}

impl Default for DequantConfig {
    fn default() -> Self {
        Self {
            unfold_steps: 2,
            mode: DitherMode::NonDithered,
            smoothness_weight: 0.1,
            step_size: 0.5,
            inner_iterations: 30,
            constraint: Constraint::Hard,
            convergence_tol: 0.01,
        }
    }
}

/// Dequantization failure.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DequantError {
    /// Hard constraint requested for a dithered input, where the
    /// quantization function is unknown.
    HardConstraintDithered,
    /// `unfold_steps` must be at least 1.
    ZeroSteps,
    /// Non-dithered input contains a pixel that is not a palette member.
    PaletteMismatch { x: usize, y: usize },
    /// The operator needs the requantized image, absent in dithered mode.
    OperatorNeedsRequantized,
}

impl fmt::Display for DequantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HardConstraintDithered => {
                write!(f, "hard constraint is undefined for dithered inputs")
            }
            Self::ZeroSteps => write!(f, "unfold_steps must be at least 1"),
            Self::PaletteMismatch { x, y } => {
                write!(f, "pixel ({x}, {y}) is not a palette member")
            }
            Self::OperatorNeedsRequantized => {
                write!(f, "update operator requires requantization, unavailable in dithered mode")
            }
        }
    }
}

impl core::error::Error for DequantError {}

/// Inputs handed to an update operator at one unfold step.
///
/// `requantized` (`Gᵗ`) and `residual` (`G − Gᵗ`) are present in non-dithered
/// mode only.
pub struct UpdateContext<'a> {
    /// Current estimate `Iᵗ`.
    pub current: &'a RealImage,
    /// Observed quantized frame `G`.
    pub observed: &'a RgbImage,
    /// `Gᵗ`, the current estimate requantized with the same palette.
    pub requantized: Option<&'a RgbImage>,
    /// `G − Gᵗ`, signed, per channel.
    pub residual: Option<&'a RealImage>,
    pub palette: &'a Palette,
    pub config: &'a DequantConfig,
}

/// One step of the unfolded loop: maps the context to an update `ΔI` with the
/// dimensions of the current estimate.
pub trait UpdateOperator: Send + Sync {
    fn update(&self, ctx: &UpdateContext<'_>) -> Result<RealImage, DequantError>;
}

/// Smoothness energy `E(I) = Σ ‖∇I‖²` with forward differences and
/// replicate-edge padding (boundary differences vanish).
pub fn smoothness_energy(img: &RealImage) -> f64 {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let mut e = 0.0;
    for y in 0..h {
        for x in 0..w {
            let here = px[y * w + x];
            if x + 1 < w {
                let right = px[y * w + x + 1];
                for ch in 0..3 {
                    let d = right[ch] - here[ch];
                    e += d * d;
                }
            }
            if y + 1 < h {
                let down = px[(y + 1) * w + x];
                for ch in 0..3 {
                    let d = down[ch] - here[ch];
                    e += d * d;
                }
            }
        }
    }
    e
}

/// Analytic gradient of [`smoothness_energy`]; interior pixels get
/// `-2·Laplacian`, boundaries follow the replicate padding.
pub fn smoothness_gradient(img: &RealImage) -> RealImage {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let mut grad = RealImage::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let here = px[y * w + x];
            let mut g = [0.0f64; 3];
            if x + 1 < w {
                let right = px[y * w + x + 1];
                for ch in 0..3 {
                    g[ch] -= 2.0 * (right[ch] - here[ch]);
                }
            }
            if x > 0 {
                let left = px[y * w + x - 1];
                for ch in 0..3 {
                    g[ch] += 2.0 * (here[ch] - left[ch]);
                }
            }
            if y + 1 < h {
                let down = px[(y + 1) * w + x];
                for ch in 0..3 {
                    g[ch] -= 2.0 * (down[ch] - here[ch]);
                }
            }
            if y > 0 {
                let up = px[(y - 1) * w + x];
                for ch in 0..3 {
                    g[ch] += 2.0 * (here[ch] - up[ch]);
                }
            }
            grad.set(x, y, g);
        }
    }
    grad
}

/// Update operator descending the smoothness energy.
///
/// Runs `inner_iterations` gradient steps of size
/// `step_size * smoothness_weight` and returns the accumulated displacement.
/// Under [`Constraint::Hard`] the descent is projected: every inner step
/// retracts into the observed quantization cells, which keeps the unfolded
/// iterates on a descent path for the constrained energy.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstrainedSmoothing;

impl UpdateOperator for ConstrainedSmoothing {
    fn update(&self, ctx: &UpdateContext<'_>) -> Result<RealImage, DequantError> {
        let step = ctx.config.step_size * ctx.config.smoothness_weight;

        let targets: Option<Vec<usize>> = if ctx.config.constraint == Constraint::Hard {
            let w = ctx.observed.width();
            let mut t = Vec::with_capacity(ctx.observed.pixels().len());
            for (i, &p) in ctx.observed.pixels().iter().enumerate() {
                t.push(
                    ctx.palette
                        .index_of(p)
                        .ok_or(DequantError::PaletteMismatch { x: i % w, y: i / w })?,
                );
            }
            Some(t)
        } else {
            None
        };

        let mut estimate = ctx.current.clone();
        for _ in 0..ctx.config.inner_iterations {
            let grad = smoothness_gradient(&estimate);
            for (p, g) in estimate.pixels_mut().iter_mut().zip(grad.pixels()) {
                for ch in 0..3 {
                    p[ch] -= step * g[ch];
                }
            }
            if let Some(targets) = &targets {
                for (p, &t) in estimate.pixels_mut().iter_mut().zip(targets) {
                    *p = cell_retract(*p, ctx.palette, t);
                }
            }
        }
        let delta: Vec<[f64; 3]> = estimate
            .pixels()
            .iter()
            .zip(ctx.current.pixels())
            .map(|(new, old)| [new[0] - old[0], new[1] - old[1], new[2] - old[2]])
            .collect();
        Ok(RealImage::from_pixels(ctx.current.width(), ctx.current.height(), delta))
    }
}

/// Update operator following the requantization residual:
/// `ΔI = η · (G − Gᵗ)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ResidualStep;

impl UpdateOperator for ResidualStep {
    fn update(&self, ctx: &UpdateContext<'_>) -> Result<RealImage, DequantError> {
        let residual = ctx.residual.ok_or(DequantError::OperatorNeedsRequantized)?;
        let eta = ctx.config.step_size;
        let delta =
            residual.pixels().iter().map(|r| [eta * r[0], eta * r[1], eta * r[2]]).collect();
        Ok(RealImage::from_pixels(residual.width(), residual.height(), delta))
    }
}

/// Moves `pixel` into the quantization cell of `palette[target_index]`.
///
/// Feasible pixels are returned unchanged. Otherwise the point is found by
/// bisection along the segment toward the palette color, stopping at the
/// first feasible point within 0.25 levels of the cell boundary. The result
/// always satisfies [`cell_contains`].
pub fn cell_retract(pixel: [f64; 3], palette: &Palette, target_index: usize) -> [f64; 3] {
    if cell_contains(palette, target_index, pixel) {
        return pixel;
    }
    let center = palette.color(target_index);
    let center = [center[0] as f64, center[1] as f64, center[2] as f64];
    let seg = [center[0] - pixel[0], center[1] - pixel[1], center[2] - pixel[2]];
    let seg_len = math::sqrt(seg[0] * seg[0] + seg[1] * seg[1] + seg[2] * seg[2]);
    let at = |s: f64| [pixel[0] + s * seg[0], pixel[1] + s * seg[1], pixel[2] + s * seg[2]];
    let mut lo = 0.0f64; // infeasible
    let mut hi = 1.0f64; // feasible: the center is in its own cell
    while (hi - lo) * seg_len > 0.25 {
        let mid = 0.5 * (lo + hi);
        if cell_contains(palette, target_index, at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}

/// Runs the unfolded dequantization loop on one quantized frame.
///
/// Starting from `I⁰ = g_img`, each of the `k` steps requantizes the current
/// estimate (non-dithered mode), applies the operator's update, clamps to
/// `[0, 255]` and, under [`Constraint::Hard`], retracts every pixel into the
/// cell of its observed palette color. With the hard constraint the returned
/// image requantizes to `g_img` bit-exactly.
pub fn dequantize(
    g_img: &RgbImage,
    palette: &Palette,
    cfg: &DequantConfig,
    op: &dyn UpdateOperator,
) -> Result<RgbImage, DequantError> {
    if cfg.unfold_steps == 0 {
        return Err(DequantError::ZeroSteps);
    }
    if cfg.mode == DitherMode::Dithered && cfg.constraint == Constraint::Hard {
        return Err(DequantError::HardConstraintDithered);
    }

    let (w, h) = (g_img.width(), g_img.height());
    let targets: Option<Vec<usize>> = match cfg.mode {
        DitherMode::NonDithered => {
            let mut targets = Vec::with_capacity(w * h);
            for (i, &p) in g_img.pixels().iter().enumerate() {
                match palette.index_of(p) {
                    Some(idx) => targets.push(idx),
                    None => {
                        return Err(DequantError::PaletteMismatch { x: i % w, y: i / w });
                    }
                }
            }
            Some(targets)
        }
        DitherMode::Dithered => None,
    };

    let mut current = g_img.to_real();
    for _ in 0..cfg.unfold_steps {
        let requantized = match cfg.mode {
            DitherMode::NonDithered => Some(quantize_real(&current, palette)),
            DitherMode::Dithered => None,
        };
        let residual = requantized.as_ref().map(|gq| {
            let diff = g_img
                .pixels()
                .iter()
                .zip(gq.pixels())
                .map(|(a, b)| {
                    [
                        a[0] as f64 - b[0] as f64,
                        a[1] as f64 - b[1] as f64,
                        a[2] as f64 - b[2] as f64,
                    ]
                })
                .collect();
            RealImage::from_pixels(w, h, diff)
        });

        let ctx = UpdateContext {
            current: &current,
            observed: g_img,
            requantized: requantized.as_ref(),
            residual: residual.as_ref(),
            palette,
            config: cfg,
        };
        let delta = op.update(&ctx)?;
        debug_assert_eq!(delta.width(), w);
        debug_assert_eq!(delta.height(), h);

        let mut mean_abs = 0.0;
        for (p, d) in current.pixels_mut().iter_mut().zip(delta.pixels()) {
            for ch in 0..3 {
                mean_abs += math::abs(d[ch]);
                p[ch] = (p[ch] + d[ch]).clamp(0.0, 255.0);
            }
        }
        mean_abs /= (w * h * 3) as f64;

        if cfg.constraint == Constraint::Hard {
            let targets = targets.as_ref().expect("hard constraint implies targets");
            for (p, &t) in current.pixels_mut().iter_mut().zip(targets) {
                *p = cell_retract(*p, palette, t);
            }
        }

        if mean_abs < cfg.convergence_tol {
            break;
        }
    }

    let mut out = current.to_rgb();
    if cfg.constraint == Constraint::Hard {
        // Rounding to 8 bits can push a retracted pixel just across its cell
        // boundary; pull offenders toward the palette color until the integer
        // point quantizes back.
        let targets = targets.as_ref().expect("hard constraint implies targets");
        for (i, &t) in targets.iter().enumerate() {
            let (x, y) = (i % w, i / w);
            if palette.nearest_index_u8(out.get(x, y)) == t {
                continue;
            }
            let real = current.get(x, y);
            let center = palette.color(t);
            let centerf = [center[0] as f64, center[1] as f64, center[2] as f64];
            let mut fixed = center;
            for step in 1..10 {
                let s = 1.0 - step as f64 / 10.0;
                let cand = [
                    math::round(centerf[0] + s * (real[0] - centerf[0])) as u8,
                    math::round(centerf[1] + s * (real[1] - centerf[1])) as u8,
                    math::round(centerf[2] + s * (real[2] - centerf[2])) as u8,
                ];
                if palette.nearest_index_u8(cand) == t {
                    fixed = cand;
                    break;
                }
            }
            out.set(x, y, fixed);
        }
    }
    Ok(out)
}
