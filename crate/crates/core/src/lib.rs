//! Algorithms for taking video frames down to GIF color depth and back up again.
//!
//! The crate covers both directions of the pipeline:
//!
//! - **Down**: median-cut palette construction, nearest-color quantization and
//!   Floyd–Steinberg error diffusion ([`palette`], [`dither`]).
//! - **Up**: compositional iterative color dequantization under the palette
//!   constraint ([`dequant`]), dither-mode detection for routing ([`detect`]),
//!   and dense optical flow with multi-frame temporal interpolation ([`flow`]).
//! - **Scoring**: PSNR, SSIM, gradient L1 and flat-region diagnostics
//!   ([`metrics`]).
//!
//! Everything operates on in-memory rasters ([`RgbImage`], [`RealImage`]);
//! file formats and the command line live in the companion `ungif` crate.
//! The crate is `no_std`-compatible (`alloc` required): disable the default
//! `std` feature and enable `libm`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ungif-core needs either the `std` or the `libm` feature");

pub(crate) mod math;

pub mod dequant;
pub mod detect;
pub mod dither;
pub mod flow;
pub mod image;
pub mod metrics;
pub mod palette;

pub use dequant::{
    cell_retract, dequantize, smoothness_energy, smoothness_gradient, ConstrainedSmoothing,
    Constraint, DequantConfig, DequantError, DitherMode, ResidualStep, UpdateContext,
    UpdateOperator,
};
pub use detect::{
    classify, extract_features, fit, DetectError, DitherFeatures, FitError, LinearClassifier,
};
pub use dither::{dither_floyd_steinberg, dither_floyd_steinberg_indices};
pub use flow::{
    backward_warp, estimate_flow, intermediate_flows, interpolate_sequence,
    interpolate_sequence_guided, synthesize_frame, synthesize_frame_real, FlowError, FlowField,
    FlowParams,
};
pub use image::{RealImage, RgbImage};
pub use metrics::{
    color_l1, flat_region_stats, grad_l1, psnr, quality_report, ssim, MetricError, QualityReport,
};
pub use palette::{
    cell_contains, median_cut, median_cut_palette, quantize, quantize_indices, quantize_real,
    Palette, PaletteError,
};
