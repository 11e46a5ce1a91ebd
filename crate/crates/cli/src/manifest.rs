//! Dataset manifest: every emitted file listed with a content hash.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct FileEntry {
    /// Path relative to the dataset root.
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ClipEntry {
    pub id: String,
    pub frame_count: usize,
    pub palette: Vec<[u8; 3]>,
    pub files: Vec<FileEntry>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Manifest {
    pub palette_size: usize,
    pub seed: u64,
    pub clips: Vec<ClipEntry>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

pub fn hash_file(root: &Path, relative: &str) -> Result<FileEntry> {
    let data = fs::read(root.join(relative))
        .with_context(|| format!("hashing {relative} under {}", root.display()))?;
    Ok(FileEntry { path: relative.to_string(), sha256: sha256_hex(&data) })
}

pub fn save_manifest(root: &Path, manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(root)?;
    let path = root.join(MANIFEST_NAME);
    fs::write(&path, serde_json::to_string_pretty(manifest)?)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn load_manifest(root: &Path) -> Result<Manifest> {
    let path = root.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
