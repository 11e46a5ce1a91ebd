//! Temporal-sampling evaluation sweep: subsample the ground truth, rebuild
//! GIFs, restore them, and score both the raw GIF (zero-order hold) and the
//! restored sequence against the full-rate ground truth.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use ungif_core::{
    dither_floyd_steinberg_indices, quality_report, quantize_indices, QualityReport, RgbImage,
};

use crate::config::{DitherChoice, PipelineConfig};
use crate::gif::{decode_gif, encode_gif, ColorTable, GifDocument, IndexedFrame};
use crate::imageio;
use crate::manifest::load_manifest;
use crate::pipeline::restore_video;
use crate::synth::{clip_palette, TRUTH_DIR};

#[derive(Serialize, Clone, Copy, Debug, Default)]
pub struct ReportRow {
    pub psnr: f64,
    pub ssim: f64,
    pub color_l1: f64,
    pub grad_l1: f64,
    pub flat_region_count: usize,
    pub flat_coverage: f64,
}

impl From<QualityReport> for ReportRow {
    fn from(r: QualityReport) -> Self {
        Self {
            psnr: r.psnr,
            ssim: r.ssim,
            color_l1: r.color_l1,
            grad_l1: r.grad_l1,
            flat_region_count: r.flat_region_count,
            flat_coverage: r.flat_coverage,
        }
    }
}

#[derive(Serialize, Clone, Copy, Debug, Default)]
pub struct MeanScores {
    pub psnr: f64,
    pub ssim: f64,
    pub color_l1: f64,
    pub grad_l1: f64,
}

fn mean_of(rows: &[ReportRow]) -> MeanScores {
    let n = rows.len().max(1) as f64;
    MeanScores {
        psnr: rows.iter().map(|r| r.psnr).sum::<f64>() / n,
        ssim: rows.iter().map(|r| r.ssim).sum::<f64>() / n,
        color_l1: rows.iter().map(|r| r.color_l1).sum::<f64>() / n,
        grad_l1: rows.iter().map(|r| r.grad_l1).sum::<f64>() / n,
    }
}

/// One clip scored at one temporal sampling factor.
#[derive(Serialize, Clone, Debug)]
pub struct EvalRecord {
    pub clip_id: String,
    pub factor: usize,
    /// Raw GIF held at the sampled frames, per aligned ground-truth frame.
    pub gif_frames: Vec<ReportRow>,
    /// Restored and interpolated output, per aligned ground-truth frame.
    pub restored_frames: Vec<ReportRow>,
    pub gif_mean: MeanScores,
    pub restored_mean: MeanScores,
}

/// Scores one clip at one factor against its full-rate ground truth.
pub fn eval_clip(
    clip_id: &str,
    truth: &[RgbImage],
    cfg: &PipelineConfig,
    factor: usize,
) -> Result<EvalRecord> {
    if factor == 0 {
        bail!("sampling factor must be at least 1");
    }
    let sampled: Vec<RgbImage> = truth.iter().step_by(factor).cloned().collect();
    if sampled.len() < 2 {
        bail!(
            "clip {clip_id}: only {} frame(s) remain after subsampling by {factor}",
            sampled.len()
        );
    }

    let palette = clip_palette(&sampled, cfg.palette_size)?;
    let dithered = cfg.dither == DitherChoice::On;
    let indices: Vec<Vec<u8>> = sampled
        .iter()
        .map(|f| {
            if dithered {
                dither_floyd_steinberg_indices(f, &palette)
            } else {
                quantize_indices(f, &palette)
            }
        })
        .collect();
    let (w, h) = (sampled[0].width(), sampled[0].height());
    let doc = GifDocument::new(
        w as u16,
        h as u16,
        ColorTable::from_palette(&palette),
        indices.into_iter().map(|i| IndexedFrame::new(i, 4)).collect(),
        0,
    )?;
    // Round-trip through the codec so the sweep exercises the real format.
    let doc = decode_gif(&encode_gif(&doc)?)?;
    let gif_frames = doc.to_images();

    let run_cfg = PipelineConfig { interp_factor: factor, ..cfg.clone() };
    let restored = restore_video(&doc, &run_cfg, None)?;

    let aligned = (doc.frames.len() - 1) * factor + 1;
    let mut gif_rows = Vec::with_capacity(aligned);
    let mut restored_rows = Vec::with_capacity(aligned);
    for j in 0..aligned {
        let reference = &truth[j];
        let hold = &gif_frames[j / factor];
        gif_rows.push(ReportRow::from(quality_report(hold, reference)?));
        restored_rows.push(ReportRow::from(quality_report(&restored.frames[j], reference)?));
    }

    Ok(EvalRecord {
        clip_id: clip_id.to_string(),
        factor,
        gif_mean: mean_of(&gif_rows),
        restored_mean: mean_of(&restored_rows),
        gif_frames: gif_rows,
        restored_frames: restored_rows,
    })
}

/// Runs the sweep over every clip in a synthesized dataset.
pub fn eval_sweep(
    dataset_root: &Path,
    cfg: &PipelineConfig,
    factors: &[usize],
) -> Result<Vec<EvalRecord>> {
    cfg.validate()?;
    let manifest = load_manifest(dataset_root)?;
    let mut records = Vec::new();
    for clip in &manifest.clips {
        let truth = imageio::load_frames(&dataset_root.join(&clip.id).join(TRUTH_DIR))
            .with_context(|| format!("clip {}: loading ground truth", clip.id))?;
        for &factor in factors {
            records.push(eval_clip(&clip.id, &truth, cfg, factor)?);
        }
    }
    Ok(records)
}

fn csv_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v:.6}")
    }
}

/// One CSV row per (clip, factor): the Table-3-style GIF vs restored columns.
pub fn write_csv(path: &Path, records: &[EvalRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = String::from(
        "clip,factor,gif_psnr,gif_ssim,gif_color_l1,gif_grad_l1,\
         restored_psnr,restored_ssim,restored_color_l1,restored_grad_l1\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.clip_id,
            r.factor,
            csv_value(r.gif_mean.psnr),
            csv_value(r.gif_mean.ssim),
            csv_value(r.gif_mean.color_l1),
            csv_value(r.gif_mean.grad_l1),
            csv_value(r.restored_mean.psnr),
            csv_value(r.restored_mean.ssim),
            csv_value(r.restored_mean.color_l1),
            csv_value(r.restored_mean.grad_l1),
        ));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, records: &[EvalRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(records)?)
        .with_context(|| format!("writing {}", path.display()))
}
