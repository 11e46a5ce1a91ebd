//! Middlebury `.flo` flow dump: magic float 202021.25, width, height, then
//! interleaved little-endian f32 `(dx, dy)` pairs, row-major.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ungif_core::FlowField;

const FLO_MAGIC: f32 = 202021.25;

pub fn write_flo(path: &Path, flow: &FlowField) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = Vec::with_capacity(12 + flow.vectors().len() * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for v in flow.vectors() {
        out.extend_from_slice(&(v[0] as f32).to_le_bytes());
        out.extend_from_slice(&(v[1] as f32).to_le_bytes());
    }
    fs::write(path, out).with_context(|| format!("writing flow {}", path.display()))
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    let data = fs::read(path).with_context(|| format!("reading flow {}", path.display()))?;
    if data.len() < 12 {
        bail!("{}: not a .flo file", path.display());
    }
    let magic = f32::from_le_bytes(data[0..4].try_into().unwrap());
    if magic != FLO_MAGIC {
        bail!("{}: bad .flo magic {magic}", path.display());
    }
    let width = i32::from_le_bytes(data[4..8].try_into().unwrap()) as usize;
    let height = i32::from_le_bytes(data[8..12].try_into().unwrap()) as usize;
    if data.len() != 12 + width * height * 8 {
        bail!("{}: truncated .flo payload", path.display());
    }
    let mut vectors = Vec::with_capacity(width * height);
    for chunk in data[12..].chunks_exact(8) {
        let dx = f32::from_le_bytes(chunk[0..4].try_into().unwrap()) as f64;
        let dy = f32::from_le_bytes(chunk[4..8].try_into().unwrap()) as f64;
        vectors.push([dx, dy]);
    }
    Ok(FlowField::from_vectors(width, height, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flo_round_trips() {
        let mut flow = FlowField::zeros(3, 2);
        flow.set(1, 0, [2.5, -1.25]);
        flow.set(2, 1, [-0.5, 8.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pair.flo");
        write_flo(&path, &flow).unwrap();
        assert_eq!(read_flo(&path).unwrap(), flow);
    }
}
