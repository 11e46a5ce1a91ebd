//! GIF89a stream encoding.

use super::{lzw, GifDocument, GifError};

fn push_u16_le(out: &mut Vec<u8>, v: u16) {
    out.push((v & 0xFF) as u8);
    out.push((v >> 8) as u8);
}

fn push_sub_blocks(out: &mut Vec<u8>, data: &[u8]) {
    for chunk in data.chunks(255) {
        out.push(chunk.len() as u8);
        out.extend_from_slice(chunk);
    }
    out.push(0);
}

/// Encodes a document as a GIF89a stream. Frames are written full-canvas
/// with disposal "do not dispose" and no transparency; decoding the result
/// reproduces the document exactly.
pub fn encode_gif(doc: &GifDocument) -> Result<Vec<u8>, GifError> {
    doc.validate()?;
    let mut out = Vec::new();
    out.extend_from_slice(b"GIF89a");

    push_u16_le(&mut out, doc.width);
    push_u16_le(&mut out, doc.height);
    // Global table present, 8 bits per primary color.
    out.push(0x80 | 0x70 | doc.global_table.size_field());
    out.push(0); // background color index
    out.push(0); // pixel aspect ratio

    for c in doc.global_table.colors() {
        out.extend_from_slice(c);
    }

    // Animation loop count (0 = forever).
    out.extend_from_slice(&[0x21, 0xFF, 0x0B]);
    out.extend_from_slice(b"NETSCAPE2.0");
    out.push(3);
    out.push(1);
    push_u16_le(&mut out, doc.loop_count);
    out.push(0);

    for frame in &doc.frames {
        // Graphic control: disposal 1 (leave in place), opaque.
        out.extend_from_slice(&[0x21, 0xF9, 0x04, 0x04]);
        push_u16_le(&mut out, frame.delay_cs);
        out.push(0);
        out.push(0);

        out.push(0x2C);
        push_u16_le(&mut out, 0);
        push_u16_le(&mut out, 0);
        push_u16_le(&mut out, doc.width);
        push_u16_le(&mut out, doc.height);
        match &frame.local_table {
            Some(t) => {
                out.push(0x80 | t.size_field());
                for c in t.colors() {
                    out.extend_from_slice(c);
                }
            }
            None => out.push(0),
        }

        let table = frame.table(&doc.global_table);
        let min_code_size = table.min_code_size();
        out.push(min_code_size);
        push_sub_blocks(&mut out, &lzw::compress(&frame.indices, min_code_size));
    }

    out.push(0x3B);
    Ok(out)
}
