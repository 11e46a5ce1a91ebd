//! Pipeline configuration, loadable from JSON and mirrored by CLI flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use ungif_core::{DequantConfig, DitherMode, FlowParams};

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DitherChoice {
    On,
    Off,
    Auto,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorChoice {
    /// Projected smoothness descent.
    Smooth,
    /// Requantization-residual step.
    Residual,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    Hard,
    Off,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Png,
    Ppm,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct DequantSettings {
    /// Unfold count `k`.
    pub steps: usize,
    pub operator: OperatorChoice,
    pub step_size: f64,
    pub smoothness_weight: f64,
    pub inner_iterations: usize,
    pub constraint: Constraint,
    pub convergence_tol: f64,
}

impl Default for DequantSettings {
    fn default() -> Self {
        let d = DequantConfig::default();
        Self {
            steps: d.unfold_steps,
            operator: OperatorChoice::Smooth,
            step_size: d.step_size,
            smoothness_weight: d.smoothness_weight,
            inner_iterations: d.inner_iterations,
            constraint: Constraint::Hard,
            convergence_tol: d.convergence_tol,
        }
    }
}

impl DequantSettings {
    /// Core config for the given routing decision. The hard constraint is
    /// undefined for dithered frames and silently degrades to `off` there
    /// only when routing was automatic; an explicit conflict is rejected by
    /// [`PipelineConfig::validate`].
    pub fn to_core(&self, mode: DitherMode) -> DequantConfig {
        let constraint = match (self.constraint, mode) {
            (Constraint::Hard, DitherMode::NonDithered) => ungif_core::Constraint::Hard,
            _ => ungif_core::Constraint::Off,
        };
        DequantConfig {
            unfold_steps: self.steps,
            mode,
            smoothness_weight: self.smoothness_weight,
            step_size: self.step_size,
            inner_iterations: self.inner_iterations,
            constraint,
            convergence_tol: self.convergence_tol,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSettings {
    pub levels: usize,
    pub alpha: f64,
    pub iterations: usize,
}

impl Default for FlowSettings {
    fn default() -> Self {
        let f = FlowParams::default();
        Self { levels: f.levels, alpha: f.alpha, iterations: f.iterations }
    }
}

impl FlowSettings {
    pub fn to_core(&self) -> FlowParams {
        FlowParams { levels: self.levels, alpha: self.alpha, iterations: self.iterations }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Palette size for synthesis (GIF creation).
    pub palette_size: usize,
    pub dither: DitherChoice,
    pub dequant: DequantSettings,
    /// Temporal up-sampling factor.
    pub interp_factor: usize,
    pub flow: FlowSettings,
    pub output_format: OutputFormat,
    /// Fitted router model; required when `dither` is `auto`.
    pub model_path: Option<PathBuf>,
    /// Seed for every stochastic choice (dataset shuffling).
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            palette_size: 32,
            dither: DitherChoice::Off,
            dequant: DequantSettings::default(),
            interp_factor: 1,
            flow: FlowSettings::default(),
            output_format: OutputFormat::Png,
            model_path: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Checks the fields the GIF-creation path uses (encode, synth).
    pub fn validate_synthesis(&self) -> Result<()> {
        if self.palette_size == 0 || self.palette_size > 256 {
            bail!("palette_size must be in 1..=256, got {}", self.palette_size);
        }
        Ok(())
    }

    /// Full check for the restoration path.
    pub fn validate(&self) -> Result<()> {
        self.validate_synthesis()?;
        if self.interp_factor == 0 {
            bail!("interp_factor must be at least 1");
        }
        if self.dequant.steps == 0 {
            bail!("dequant.steps must be at least 1");
        }
        if self.dither == DitherChoice::Auto && self.model_path.is_none() {
            bail!("dither=auto needs a fitted classifier: set model_path");
        }
        if self.dither == DitherChoice::On && self.dequant.constraint == Constraint::Hard {
            bail!("the hard constraint is undefined for dithered inputs; use constraint=off");
        }
        if self.dither == DitherChoice::On && self.dequant.operator == OperatorChoice::Residual {
            bail!("the residual operator needs requantization, unavailable for dithered inputs");
        }
        Ok(())
    }
}
