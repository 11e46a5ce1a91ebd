//! The restoration pipeline: decode, route, dequantize, estimate flow on the
//! GIF frames, and interpolate.

use anyhow::{bail, Result};
use rayon::prelude::*;
use ungif_core::{
    classify, dequantize, interpolate_sequence_guided, ConstrainedSmoothing, DitherMode,
    LinearClassifier, Palette, ResidualStep, RgbImage, UpdateOperator,
};

use crate::config::{DitherChoice, OperatorChoice, PipelineConfig};
use crate::gif::GifDocument;

pub struct RestoredClip {
    /// Routing decision actually used.
    pub mode: DitherMode,
    /// Dequantized frames, one per input frame.
    pub restored: Vec<RgbImage>,
    /// Final frame sequence after temporal interpolation.
    pub frames: Vec<RgbImage>,
}

fn route(
    gif_frames: &[RgbImage],
    cfg: &PipelineConfig,
    model: Option<&LinearClassifier>,
) -> Result<DitherMode> {
    Ok(match cfg.dither {
        DitherChoice::Off => DitherMode::NonDithered,
        DitherChoice::On => DitherMode::Dithered,
        DitherChoice::Auto => {
            let Some(model) = model else {
                bail!("dither=auto needs a fitted classifier model");
            };
            let mut votes = 0usize;
            for frame in gif_frames {
                if classify(frame, model)? == DitherMode::Dithered {
                    votes += 1;
                }
            }
            if 2 * votes > gif_frames.len() {
                DitherMode::Dithered
            } else {
                DitherMode::NonDithered
            }
        }
    })
}

/// Restores a decoded GIF: per-frame color dequantization, then temporal
/// interpolation by `cfg.interp_factor`. Flow is estimated on the GIF frames
/// themselves, not on the restored frames, so the two stages are
/// independent.
pub fn restore_video(
    doc: &GifDocument,
    cfg: &PipelineConfig,
    model: Option<&LinearClassifier>,
) -> Result<RestoredClip> {
    cfg.validate()?;
    let gif_frames = doc.to_images();
    let mode = route(&gif_frames, cfg, model)?;
    let dq = cfg.dequant.to_core(mode);
    let operator: &dyn UpdateOperator = match cfg.dequant.operator {
        OperatorChoice::Smooth => &ConstrainedSmoothing,
        OperatorChoice::Residual => &ResidualStep,
    };

    let palettes: Vec<Palette> =
        doc.frames.iter().map(|f| f.table(&doc.global_table).to_palette()).collect();

    let restored: Vec<RgbImage> = gif_frames
        .par_iter()
        .zip(&palettes)
        .map(|(frame, palette)| Ok(dequantize(frame, palette, &dq, operator)?))
        .collect::<Result<_>>()?;

    let frames = if cfg.interp_factor == 1 || restored.len() < 2 {
        restored.clone()
    } else {
        interpolate_sequence_guided(&restored, &gif_frames, cfg.interp_factor, &cfg.flow.to_core())?
    };

    Ok(RestoredClip { mode, restored, frames })
}
