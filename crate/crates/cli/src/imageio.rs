//! Frame I/O: lossless PNG and binary PPM, plus frame-directory helpers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ungif_core::RgbImage;

use crate::config::OutputFormat;

pub fn to_image_buffer(img: &RgbImage) -> image::RgbImage {
    image::RgbImage::from_fn(img.width() as u32, img.height() as u32, |x, y| {
        image::Rgb(img.get(x as usize, y as usize))
    })
}

pub fn from_image_buffer(buf: &image::RgbImage) -> RgbImage {
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let data = buf.pixels().map(|p| p.0).collect();
    RgbImage::from_pixels(w, h, data)
}

pub fn load_image(path: &Path) -> Result<RgbImage> {
    let img =
        image::open(path).with_context(|| format!("reading image {}", path.display()))?.into_rgb8();
    Ok(from_image_buffer(&img))
}

pub fn save_image(path: &Path, img: &RgbImage) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let buf = to_image_buffer(img);
    if path.extension().and_then(|e| e.to_str()) == Some("ppm") {
        // Binary PPM (P6); the default pnm writer would pick PAM.
        use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
        let file =
            fs::File::create(path).with_context(|| format!("writing image {}", path.display()))?;
        let encoder = PnmEncoder::new(std::io::BufWriter::new(file))
            .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary));
        buf.write_with_encoder(encoder).with_context(|| format!("writing image {}", path.display()))
    } else {
        buf.save(path).with_context(|| format!("writing image {}", path.display()))
    }
}

/// Zero-padded frame file name for index `i`.
pub fn frame_name(i: usize, format: OutputFormat) -> String {
    match format {
        OutputFormat::Png => format!("frame_{i:06}.png"),
        OutputFormat::Ppm => format!("frame_{i:06}.ppm"),
    }
}

/// Frame files (png/ppm/pnm) in a directory, sorted by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading frame directory {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("png") | Some("ppm") | Some("pnm")
            )
        })
        .collect();
    frames.sort();
    if frames.is_empty() {
        bail!("no frame images (*.png, *.ppm) in {}", dir.display());
    }
    Ok(frames)
}

pub fn load_frames(dir: &Path) -> Result<Vec<RgbImage>> {
    list_frames(dir)?.iter().map(|p| load_image(p)).collect()
}

/// Writes a frame sequence into a directory, returning the relative names.
pub fn save_frames(dir: &Path, frames: &[RgbImage], format: OutputFormat) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let name = frame_name(i, format);
        save_image(&dir.join(&name), frame)?;
        names.push(name);
    }
    Ok(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_and_ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = RgbImage::filled(5, 4, [0, 0, 0]);
        for y in 0..4 {
            for x in 0..5 {
                img.set(x, y, [(x * 50) as u8, (y * 60) as u8, 200]);
            }
        }
        for format in [OutputFormat::Png, OutputFormat::Ppm] {
            let path = dir.path().join(frame_name(0, format));
            save_image(&path, &img).unwrap();
            assert_eq!(load_image(&path).unwrap(), img);
        }
        // PPM output must be the binary (P6) variant.
        let ppm = fs::read(dir.path().join(frame_name(0, OutputFormat::Ppm))).unwrap();
        assert_eq!(&ppm[..2], b"P6");
    }
}
