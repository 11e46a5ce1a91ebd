//! Dataset synthesis: ground-truth clips paired with their dithered and
//! non-dithered GIF versions.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use ungif_core::{dither_floyd_steinberg_indices, median_cut, quantize_indices, Palette, RgbImage};

use crate::config::{OutputFormat, PipelineConfig};
use crate::gif::{encode_gif, ColorTable, GifDocument, IndexedFrame};
use crate::imageio;
use crate::manifest::{hash_file, save_manifest, ClipEntry, Manifest};

/// Frame display delay written into synthesized GIFs (centiseconds).
const SYNTH_DELAY_CS: u16 = 4;

/// Every 4th frame contributes pixels to the per-clip palette.
const PALETTE_FRAME_STRIDE: usize = 4;

pub const TRUTH_DIR: &str = "truth";
pub const NODITHER_DIR: &str = "nodither";
pub const DITHER_DIR: &str = "dither";

/// Pools pixels from every [`PALETTE_FRAME_STRIDE`]-th frame and fits one
/// palette for the clip.
pub fn clip_palette(frames: &[RgbImage], palette_size: usize) -> Result<Palette> {
    let mut sample = Vec::new();
    for frame in frames.iter().step_by(PALETTE_FRAME_STRIDE) {
        sample.extend_from_slice(frame.pixels());
    }
    Ok(median_cut(&sample, palette_size)?)
}

fn clip_dirs(frames_root: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut clips: Vec<(String, PathBuf)> = fs::read_dir(frames_root)
        .with_context(|| format!("reading dataset root {}", frames_root.display()))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), e.path()))
        .collect();
    clips.sort();
    if clips.is_empty() {
        bail!("no clip directories under {}", frames_root.display());
    }
    Ok(clips)
}

fn build_gif(frames: &[Vec<u8>], width: u16, height: u16, palette: &Palette) -> Result<Vec<u8>> {
    let table = ColorTable::from_palette(palette);
    let doc = GifDocument::new(
        width,
        height,
        table,
        frames.iter().map(|idx| IndexedFrame::new(idx.clone(), SYNTH_DELAY_CS)).collect(),
        0,
    )?;
    Ok(encode_gif(&doc)?)
}

fn synth_clip(
    id: &str,
    clip_dir: &Path,
    out_root: &Path,
    cfg: &PipelineConfig,
) -> Result<ClipEntry> {
    let frames = imageio::load_frames(clip_dir)
        .with_context(|| format!("clip {id}: loading ground-truth frames"))?;
    let (w, h) = (frames[0].width(), frames[0].height());
    for f in &frames {
        if f.width() != w || f.height() != h {
            bail!("clip {id}: frame dimensions differ within the clip");
        }
    }
    let palette = clip_palette(&frames, cfg.palette_size)?;

    let mut relative_files = Vec::new();
    let clip_out = out_root.join(id);

    let truth_names = imageio::save_frames(&clip_out.join(TRUTH_DIR), &frames, OutputFormat::Png)?;
    relative_files.extend(truth_names.iter().map(|n| format!("{id}/{TRUTH_DIR}/{n}")));

    let mut plain_indices = Vec::with_capacity(frames.len());
    let mut dither_indices = Vec::with_capacity(frames.len());
    let mut plain_frames = Vec::with_capacity(frames.len());
    let mut dither_frames = Vec::with_capacity(frames.len());
    for frame in &frames {
        let plain = quantize_indices(frame, &palette);
        let dith = dither_floyd_steinberg_indices(frame, &palette);
        let expand = |idx: &[u8]| {
            RgbImage::from_pixels(w, h, idx.iter().map(|&i| palette.color(i as usize)).collect())
        };
        plain_frames.push(expand(&plain));
        dither_frames.push(expand(&dith));
        plain_indices.push(plain);
        dither_indices.push(dith);
    }

    let plain_names =
        imageio::save_frames(&clip_out.join(NODITHER_DIR), &plain_frames, OutputFormat::Png)?;
    relative_files.extend(plain_names.iter().map(|n| format!("{id}/{NODITHER_DIR}/{n}")));
    let dither_names =
        imageio::save_frames(&clip_out.join(DITHER_DIR), &dither_frames, OutputFormat::Png)?;
    relative_files.extend(dither_names.iter().map(|n| format!("{id}/{DITHER_DIR}/{n}")));

    fs::write(
        clip_out.join("nodither.gif"),
        build_gif(&plain_indices, w as u16, h as u16, &palette)?,
    )?;
    relative_files.push(format!("{id}/nodither.gif"));
    fs::write(
        clip_out.join("dither.gif"),
        build_gif(&dither_indices, w as u16, h as u16, &palette)?,
    )?;
    relative_files.push(format!("{id}/dither.gif"));

    let files =
        relative_files.iter().map(|rel| hash_file(out_root, rel)).collect::<Result<Vec<_>>>()?;

    Ok(ClipEntry {
        id: id.to_string(),
        frame_count: frames.len(),
        palette: palette.colors().to_vec(),
        files,
    })
}

/// Builds the paired dataset on disk and returns its manifest.
///
/// For every clip directory under `frames_root`: one median-cut palette from
/// a frame subsample, non-dithered and dithered GIF frame sets (as PNG and
/// as actual GIF files), lossless ground-truth copies, and a manifest entry
/// hashing every emitted file.
pub fn synth_pairs(frames_root: &Path, out_root: &Path, cfg: &PipelineConfig) -> Result<Manifest> {
    cfg.validate_synthesis()?;
    let clips = clip_dirs(frames_root)?;
    fs::create_dir_all(out_root)?;

    let mut entries = clips
        .par_iter()
        .map(|(id, dir)| synth_clip(id, dir, out_root, cfg))
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.id.cmp(&b.id));

    let manifest = Manifest { palette_size: cfg.palette_size, seed: cfg.seed, clips: entries };
    save_manifest(out_root, &manifest)?;
    Ok(manifest)
}
