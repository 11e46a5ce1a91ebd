//! GIF89a container: document model, decoder, encoder, LZW.
//!
//! The document model is canonical rather than byte-preserving: color tables
//! are padded to the power-of-two sizes the format can express, frames are
//! full-canvas snapshots (the decoder composites sub-rectangle frames and
//! disposal methods 0–2), and `encode` followed by `decode` reproduces a
//! document bit-exactly.

pub mod lzw;

mod decode;
mod encode;

pub use decode::decode_gif;
pub use encode::encode_gif;

use thiserror::Error;
use ungif_core::{Palette, RgbImage};

#[derive(Error, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GifError {
    #[error("not a GIF: bad signature")]
    MalformedHeader,
    #[error("unsupported GIF version")]
    UnsupportedVersion,
    #[error("unexpected end of stream")]
    TruncatedStream,
    #[error("invalid LZW code")]
    BadLzwCode,
    #[error("image data decodes to more pixels than the frame holds")]
    TooManyPixels,
    #[error("image data decodes to {got} pixels, frame holds {want}")]
    PixelCountMismatch { want: usize, got: usize },
    #[error("color table must hold 1..=256 colors, got {0}")]
    TableSize(usize),
    #[error("frame {frame} references palette index {index} beyond the table")]
    BadIndex { frame: usize, index: u8 },
    #[error("frame dimensions exceed the canvas")]
    FrameTooLarge,
    #[error("frame index buffer does not match the canvas size")]
    FrameSizeMismatch,
    #[error("unknown block introducer 0x{0:02x}")]
    UnknownBlock(u8),
    #[error("disposal method {0} is not supported")]
    UnsupportedDisposal(u8),
    #[error("sub-canvas frames with local color tables are not supported")]
    LocalSubFrame,
    #[error("GIF contains no image frames")]
    NoFrames,
}

/// GIF color table: 2..=256 entries, always a power of two. Construction
/// pads short tables with black, which is what the wire format forces.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ColorTable {
    colors: Vec<[u8; 3]>,
}

impl ColorTable {
    pub fn new(mut colors: Vec<[u8; 3]>) -> Result<Self, GifError> {
        if colors.is_empty() || colors.len() > 256 {
            return Err(GifError::TableSize(colors.len()));
        }
        let size = colors.len().next_power_of_two().max(2);
        colors.resize(size, [0, 0, 0]);
        Ok(Self { colors })
    }

    pub fn from_palette(palette: &Palette) -> Self {
        Self::new(palette.colors().to_vec()).expect("palette sizes are valid table sizes")
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn colors(&self) -> &[[u8; 3]] {
        &self.colors
    }

    /// Distinct colors in first-occurrence order; the palette the table was
    /// (most plausibly) built from, with padding and duplicates dropped.
    pub fn to_palette(&self) -> Palette {
        let mut distinct = Vec::new();
        for &c in &self.colors {
            if !distinct.contains(&c) {
                distinct.push(c);
            }
        }
        Palette::new(distinct).expect("a non-empty table yields a valid palette")
    }

    /// `2^(field + 1)` entries; the descriptor encoding of the table size.
    pub(crate) fn size_field(&self) -> u8 {
        (self.colors.len().trailing_zeros() - 1) as u8
    }

    /// Minimum LZW code size for indices into this table.
    pub fn min_code_size(&self) -> u8 {
        let bits = self.colors.len().trailing_zeros() as u8;
        bits.max(2)
    }
}

/// One full-canvas frame of palette indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IndexedFrame {
    pub indices: Vec<u8>,
    /// Display delay in centiseconds.
    pub delay_cs: u16,
    /// Local color table, if the frame carries its own; global otherwise.
    pub local_table: Option<ColorTable>,
}

impl IndexedFrame {
    pub fn new(indices: Vec<u8>, delay_cs: u16) -> Self {
        Self { indices, delay_cs, local_table: None }
    }

    pub fn table<'a>(&'a self, global: &'a ColorTable) -> &'a ColorTable {
        self.local_table.as_ref().unwrap_or(global)
    }

    /// Expands indices to colors.
    pub fn to_image(&self, width: usize, height: usize, global: &ColorTable) -> RgbImage {
        let table = self.table(global);
        let data = self.indices.iter().map(|&i| table.colors()[i as usize]).collect();
        RgbImage::from_pixels(width, height, data)
    }
}

/// An animated GIF as this crate models it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GifDocument {
    pub width: u16,
    pub height: u16,
    pub global_table: ColorTable,
    pub frames: Vec<IndexedFrame>,
    /// Animation repeat count; 0 means loop forever.
    pub loop_count: u16,
}

impl GifDocument {
    /// Builds and validates a document.
    pub fn new(
        width: u16,
        height: u16,
        global_table: ColorTable,
        frames: Vec<IndexedFrame>,
        loop_count: u16,
    ) -> Result<Self, GifError> {
        let doc = Self { width, height, global_table, frames, loop_count };
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), GifError> {
        if self.frames.is_empty() {
            return Err(GifError::NoFrames);
        }
        let canvas = self.width as usize * self.height as usize;
        for (fi, frame) in self.frames.iter().enumerate() {
            if frame.indices.len() != canvas {
                return Err(GifError::FrameSizeMismatch);
            }
            let table_len = frame.table(&self.global_table).len();
            for &i in &frame.indices {
                if i as usize >= table_len {
                    return Err(GifError::BadIndex { frame: fi, index: i });
                }
            }
        }
        Ok(())
    }

    /// Expands every frame to colors.
    pub fn to_images(&self) -> Vec<RgbImage> {
        self.frames
            .iter()
            .map(|f| f.to_image(self.width as usize, self.height as usize, &self.global_table))
            .collect()
    }
}
