//! Router model persistence.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use ungif_core::LinearClassifier;

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct ClassifierRecord {
    pub weights: [f64; 3],
    pub bias: f64,
    pub feature_means: [f64; 3],
    pub feature_scales: [f64; 3],
}

impl From<&LinearClassifier> for ClassifierRecord {
    fn from(model: &LinearClassifier) -> Self {
        Self {
            weights: model.weights,
            bias: model.bias,
            feature_means: model.feature_means,
            feature_scales: model.feature_scales,
        }
    }
}

impl From<ClassifierRecord> for LinearClassifier {
    fn from(r: ClassifierRecord) -> Self {
        Self {
            weights: r.weights,
            bias: r.bias,
            feature_means: r.feature_means,
            feature_scales: r.feature_scales,
        }
    }
}

pub fn save_model(path: &Path, model: &LinearClassifier) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let record = ClassifierRecord::from(model);
    fs::write(path, serde_json::to_string_pretty(&record)?)
        .with_context(|| format!("writing model {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<LinearClassifier> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    let record: ClassifierRecord =
        serde_json::from_str(&text).with_context(|| format!("parsing model {}", path.display()))?;
    Ok(record.into())
}
