//! GIF89a stream decoding.

use super::{lzw, ColorTable, GifDocument, GifError, IndexedFrame};

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn u8(&mut self) -> Result<u8, GifError> {
        let b = *self.data.get(self.pos).ok_or(GifError::TruncatedStream)?;
        self.pos += 1;
        Ok(b)
    }

    fn u16_le(&mut self) -> Result<u16, GifError> {
        let lo = self.u8()? as u16;
        let hi = self.u8()? as u16;
        Ok(hi << 8 | lo)
    }

    fn slice(&mut self, n: usize) -> Result<&'a [u8], GifError> {
        let end = self.pos.checked_add(n).ok_or(GifError::TruncatedStream)?;
        if end > self.data.len() {
            return Err(GifError::TruncatedStream);
        }
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn color_table(&mut self, entries: usize) -> Result<ColorTable, GifError> {
        let raw = self.slice(entries * 3)?;
        let colors = raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        ColorTable::new(colors)
    }

    /// Concatenates data sub-blocks up to the zero terminator.
    fn sub_blocks(&mut self) -> Result<Vec<u8>, GifError> {
        let mut out = Vec::new();
        loop {
            let len = self.u8()? as usize;
            if len == 0 {
                return Ok(out);
            }
            out.extend_from_slice(self.slice(len)?);
        }
    }

    fn skip_sub_blocks(&mut self) -> Result<(), GifError> {
        loop {
            let len = self.u8()? as usize;
            if len == 0 {
                return Ok(());
            }
            self.slice(len)?;
        }
    }
}

#[derive(Clone, Copy, Default)]
struct GraphicControl {
    delay_cs: u16,
    transparent: Option<u8>,
    disposal: u8,
}

fn deinterlace(rows: &[u8], width: usize, height: usize) -> Vec<u8> {
    let mut out = vec![0u8; rows.len()];
    let passes: [(usize, usize); 4] = [(0, 8), (4, 8), (2, 4), (1, 2)];
    let mut src_row = 0;
    for (start, step) in passes {
        let mut y = start;
        while y < height {
            out[y * width..(y + 1) * width]
                .copy_from_slice(&rows[src_row * width..(src_row + 1) * width]);
            src_row += 1;
            y += step;
        }
    }
    out
}

/// Decodes a GIF87a/89a byte stream into a document of full-canvas frames.
///
/// Sub-rectangle frames and disposal methods 0–2 are composited onto the
/// canvas; transparent pixels keep the underlying canvas content. Frames
/// that carry their own color table are supported only when they cover the
/// whole canvas without transparency, since palette indices cannot be
/// composited across different tables.
pub fn decode_gif(bytes: &[u8]) -> Result<GifDocument, GifError> {
    let mut cur = Cursor::new(bytes);
    let sig = cur.slice(6).map_err(|_| GifError::MalformedHeader)?;
    if &sig[..3] != b"GIF" {
        return Err(GifError::MalformedHeader);
    }
    if &sig[3..] != b"87a" && &sig[3..] != b"89a" {
        return Err(GifError::UnsupportedVersion);
    }

    let width = cur.u16_le()?;
    let height = cur.u16_le()?;
    let packed = cur.u8()?;
    let bg_index = cur.u8()?;
    let _aspect = cur.u8()?;

    let global_table = if packed & 0x80 != 0 {
        Some(cur.color_table(2 << (packed & 0x07) as usize)?)
    } else {
        None
    };

    let canvas_len = width as usize * height as usize;
    let background = global_table
        .as_ref()
        .filter(|t| (bg_index as usize) < t.len())
        .map(|_| bg_index)
        .unwrap_or(0);
    let mut canvas = vec![background; canvas_len];
    // False once a full-canvas local-table frame replaced the global state.
    let mut canvas_is_global = true;

    let mut frames: Vec<IndexedFrame> = Vec::new();
    let mut loop_count: u16 = 1;
    let mut pending = GraphicControl::default();

    loop {
        match cur.u8()? {
            0x3B => break,
            0x21 => {
                let label = cur.u8()?;
                match label {
                    0xF9 => {
                        let data = cur.sub_blocks()?;
                        if data.len() < 4 {
                            return Err(GifError::TruncatedStream);
                        }
                        let flags = data[0];
                        pending = GraphicControl {
                            delay_cs: (data[2] as u16) << 8 | data[1] as u16,
                            transparent: (flags & 0x01 != 0).then_some(data[3]),
                            disposal: (flags >> 2) & 0x07,
                        };
                    }
                    0xFF => {
                        let data = cur.sub_blocks()?;
                        if data.len() >= 14 && &data[..11] == b"NETSCAPE2.0" && data[11] == 1 {
                            loop_count = (data[13] as u16) << 8 | data[12] as u16;
                        }
                    }
                    _ => cur.skip_sub_blocks()?,
                }
            }
            0x2C => {
                let left = cur.u16_le()? as usize;
                let top = cur.u16_le()? as usize;
                let fw = cur.u16_le()? as usize;
                let fh = cur.u16_le()? as usize;
                let ipacked = cur.u8()?;
                if left + fw > width as usize || top + fh > height as usize || fw == 0 || fh == 0 {
                    return Err(GifError::FrameTooLarge);
                }
                let local_table = if ipacked & 0x80 != 0 {
                    Some(cur.color_table(2 << (ipacked & 0x07) as usize)?)
                } else {
                    None
                };
                let interlaced = ipacked & 0x40 != 0;

                let min_code_size = cur.u8()?;
                if min_code_size > 8 {
                    return Err(GifError::BadLzwCode);
                }
                let data = cur.sub_blocks()?;
                let mut indices = lzw::decompress(&data, min_code_size, fw * fh)?;
                if indices.len() != fw * fh {
                    return Err(GifError::PixelCountMismatch { want: fw * fh, got: indices.len() });
                }
                if interlaced {
                    indices = deinterlace(&indices, fw, fh);
                }

                let table =
                    local_table.as_ref().or(global_table.as_ref()).ok_or(GifError::TableSize(0))?;
                for &i in &indices {
                    if i as usize >= table.len() {
                        return Err(GifError::BadIndex { frame: frames.len(), index: i });
                    }
                }
                if pending.disposal > 2 {
                    return Err(GifError::UnsupportedDisposal(pending.disposal));
                }

                let full_canvas =
                    left == 0 && top == 0 && fw == width as usize && fh == height as usize;
                let opaque = pending.transparent.is_none();

                if full_canvas && opaque {
                    if local_table.is_some() {
                        canvas_is_global = false;
                    } else {
                        canvas.copy_from_slice(&indices);
                        canvas_is_global = true;
                    }
                    frames.push(IndexedFrame { indices, delay_cs: pending.delay_cs, local_table });
                } else {
                    // Compositing works on indices, so partial or transparent
                    // frames must share the global table with the canvas.
                    if local_table.is_some() || !canvas_is_global {
                        return Err(GifError::LocalSubFrame);
                    }
                    for row in 0..fh {
                        for col in 0..fw {
                            let src = indices[row * fw + col];
                            if pending.transparent == Some(src) {
                                continue;
                            }
                            canvas[(top + row) * width as usize + left + col] = src;
                        }
                    }
                    frames.push(IndexedFrame {
                        indices: canvas.clone(),
                        delay_cs: pending.delay_cs,
                        local_table: None,
                    });
                }

                if pending.disposal == 2 {
                    for row in 0..fh {
                        let start = (top + row) * width as usize + left;
                        canvas[start..start + fw].fill(background);
                    }
                }
                pending = GraphicControl::default();
            }
            other => return Err(GifError::UnknownBlock(other)),
        }
    }

    if frames.is_empty() {
        return Err(GifError::NoFrames);
    }
    let global_table = global_table
        .unwrap_or_else(|| ColorTable::new(vec![[0, 0, 0]]).expect("valid fallback table"));
    let doc = GifDocument { width, height, global_table, frames, loop_count };
    doc.validate()?;
    Ok(doc)
}
