//! GIF-variant LZW: variable code width (LSB-first), clear and
//! end-of-information codes, 4096-entry dictionary.

use super::GifError;

const MAX_CODES: usize = 4096;
const MAX_CODE_SIZE: u32 = 12;

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    bits: u32,
}

impl BitWriter {
    fn new() -> Self {
        Self { out: Vec::new(), acc: 0, bits: 0 }
    }

    fn push(&mut self, code: u16, width: u32) {
        self.acc |= (code as u32) << self.bits;
        self.bits += width;
        while self.bits >= 8 {
            self.out.push((self.acc & 0xFF) as u8);
            self.acc >>= 8;
            self.bits -= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.bits > 0 {
            self.out.push((self.acc & 0xFF) as u8);
        }
        self.out
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    bits: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, acc: 0, bits: 0 }
    }

    fn read(&mut self, width: u32) -> Option<u16> {
        while self.bits < width {
            if self.pos == self.data.len() {
                return None;
            }
            self.acc |= (self.data[self.pos] as u32) << self.bits;
            self.pos += 1;
            self.bits += 8;
        }
        let code = (self.acc & ((1 << width) - 1)) as u16;
        self.acc >>= width;
        self.bits -= width;
        Some(code)
    }
}

/// Compresses an index stream. The dictionary resets with a clear code when
/// it fills.
///
/// The code width grows one code *after* the assignment counter reaches the
/// current width limit, matching the reference GIF encoders; the decoder
/// below mirrors that with its codes-read counter.
pub fn compress(indices: &[u8], min_code_size: u8) -> Vec<u8> {
    let min = min_code_size as u32;
    let clear: u16 = 1 << min;
    let eoi: u16 = clear + 1;
    let mut writer = BitWriter::new();
    let mut code_size = min + 1;
    let mut next: usize = eoi as usize + 1;

    // Width check uses the pre-insert assignment counter, after writing.
    fn emit(writer: &mut BitWriter, code: u16, code_size: &mut u32, next: usize) {
        writer.push(code, *code_size);
        if next >= (1 << *code_size) && *code_size < MAX_CODE_SIZE {
            *code_size += 1;
        }
    }

    emit(&mut writer, clear, &mut code_size, next);
    let Some((&first, rest)) = indices.split_first() else {
        emit(&mut writer, eoi, &mut code_size, next);
        return writer.finish();
    };

    let mut dict: std::collections::HashMap<(u16, u8), u16> = std::collections::HashMap::new();
    let mut current: u16 = first as u16;

    for &k in rest {
        if let Some(&code) = dict.get(&(current, k)) {
            current = code;
            continue;
        }
        emit(&mut writer, current, &mut code_size, next);
        if next < MAX_CODES {
            dict.insert((current, k), next as u16);
            next += 1;
        } else {
            emit(&mut writer, clear, &mut code_size, next);
            dict.clear();
            code_size = min + 1;
            next = eoi as usize + 1;
        }
        current = k as u16;
    }
    emit(&mut writer, current, &mut code_size, next);
    emit(&mut writer, eoi, &mut code_size, next);
    writer.finish()
}

/// Decompresses an LZW stream, stopping at the end-of-information code.
/// `max_len` bounds the output (the expected pixel count).
pub fn decompress(data: &[u8], min_code_size: u8, max_len: usize) -> Result<Vec<u8>, GifError> {
    let min = min_code_size as u32;
    if min > 8 {
        return Err(GifError::BadLzwCode);
    }
    let clear: u16 = 1 << min;
    let eoi: u16 = clear + 1;

    // Dictionary as prefix links; entry i < clear is the root byte i.
    let mut prefix = vec![0u16; MAX_CODES];
    let mut suffix = vec![0u8; MAX_CODES];
    let mut reader = BitReader::new(data);
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(MAX_CODES);

    let mut code_size = min + 1;
    let mut next: usize = eoi as usize + 1;
    // Codes read since the last clear, offset like `next`; the width grows
    // when this counter passes the width limit, staying in step with the
    // encoder's pre-insert counter.
    let mut running: usize = eoi as usize + 1;
    let mut prev: Option<u16> = None;

    // First byte of a dictionary entry's string.
    let first_byte = |prefix: &[u16], mut code: u16| -> u8 {
        while code >= clear {
            code = prefix[code as usize];
        }
        code as u8
    };

    loop {
        let Some(code) = reader.read(code_size) else {
            return Err(GifError::TruncatedStream);
        };
        running += 1;
        let grow = running > (1 << code_size) && code_size < MAX_CODE_SIZE;
        if code == clear {
            code_size = min + 1;
            next = eoi as usize + 1;
            running = eoi as usize + 1;
            prev = None;
            continue;
        }
        if code == eoi {
            return Ok(out);
        }
        if grow {
            code_size += 1;
        }

        let emit_start = out.len();
        match prev {
            None => {
                if code >= clear {
                    return Err(GifError::BadLzwCode);
                }
                out.push(code as u8);
            }
            Some(p) => {
                if (code as usize) < next && code != clear && code != eoi {
                    let mut c = code;
                    while c >= clear {
                        stack.push(suffix[c as usize]);
                        c = prefix[c as usize];
                    }
                    stack.push(c as u8);
                    while let Some(b) = stack.pop() {
                        out.push(b);
                    }
                } else if code as usize == next && next < MAX_CODES {
                    // The "cScSc" case: previous string plus its first byte.
                    let fb = first_byte(&prefix, p);
                    let mut c = p;
                    while c >= clear {
                        stack.push(suffix[c as usize]);
                        c = prefix[c as usize];
                    }
                    stack.push(c as u8);
                    while let Some(b) = stack.pop() {
                        out.push(b);
                    }
                    out.push(fb);
                } else {
                    return Err(GifError::BadLzwCode);
                }
                if next < MAX_CODES {
                    prefix[next] = p;
                    suffix[next] = out[emit_start];
                    next += 1;
                }
            }
        }
        prev = Some(code);
        if out.len() > max_len {
            return Err(GifError::TooManyPixels);
        }
    }
}
