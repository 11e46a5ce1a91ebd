//! Dither-mode detection.
//!
//! Dithered and non-dithered quantized frames differ sharply in gradient
//! space: error diffusion leaves high-frequency checkerboard-like texture and
//! locally diverse colors, quantization alone leaves flat plateaus. Three
//! hand-computed features capture this and a tiny logistic-regression model
//! routes each frame to the matching dequantization mode.

use alloc::vec::Vec;
use core::fmt;

use crate::dequant::DitherMode;
use crate::image::RgbImage;
use crate::math;

/// Gradient-space features of a quantized frame.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DitherFeatures {
    /// Mean absolute response of the 2×2 checkerboard stencil
    /// `I(x,y) − I(x+1,y) − I(x,y+1) + I(x+1,y+1)`, across channels,
    /// normalized so a full-contrast checkerboard scores 255.
    pub checkerboard_energy: f64,
    /// Fraction of interior pixels whose 3×3 neighborhood holds at least 4
    /// distinct colors.
    pub local_distinct_rate: f64,
    /// Entropy (bits) of the 32-bin histogram of forward-difference gradient
    /// magnitudes.
    pub gradient_entropy: f64,
}

impl DitherFeatures {
    fn as_array(&self) -> [f64; 3] {
        [self.checkerboard_energy, self.local_distinct_rate, self.gradient_entropy]
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DetectError {
    /// Features need at least a 3×3 image.
    ImageTooSmall { width: usize, height: usize },
    /// Training data must contain both classes.
    SingleClass,
}

impl fmt::Display for DetectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ImageTooSmall { width, height } => {
                write!(f, "{width}x{height} image is too small for dither features (3x3 minimum)")
            }
            Self::SingleClass => write!(f, "training data contains a single class"),
        }
    }
}

impl core::error::Error for DetectError {}

/// Alias kept for the trainer's error surface.
pub type FitError = DetectError;

/// Computes [`DitherFeatures`] for a frame of at least 3×3 pixels.
pub fn extract_features(g_img: &RgbImage) -> Result<DitherFeatures, DetectError> {
    let (w, h) = (g_img.width(), g_img.height());
    if w < 3 || h < 3 {
        return Err(DetectError::ImageTooSmall { width: w, height: h });
    }
    let px = g_img.pixels();

    let mut stencil_sum = 0.0f64;
    let mut stencil_n = 0usize;
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let a = px[y * w + x];
            let b = px[y * w + x + 1];
            let c = px[(y + 1) * w + x];
            let d = px[(y + 1) * w + x + 1];
            for ch in 0..3 {
                let v = a[ch] as f64 - b[ch] as f64 - c[ch] as f64 + d[ch] as f64;
                stencil_sum += math::abs(v);
                stencil_n += 1;
            }
        }
    }
    let checkerboard_energy = 0.5 * stencil_sum / stencil_n as f64;

    let mut busy = 0usize;
    let mut interior = 0usize;
    let mut neighborhood = [[0u8; 3]; 9];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            interior += 1;
            let mut k = 0;
            for dy in 0..3 {
                for dx in 0..3 {
                    neighborhood[k] = px[(y + dy - 1) * w + (x + dx - 1)];
                    k += 1;
                }
            }
            neighborhood.sort_unstable();
            let mut distinct = 1;
            for i in 1..9 {
                if neighborhood[i] != neighborhood[i - 1] {
                    distinct += 1;
                }
            }
            if distinct >= 4 {
                busy += 1;
            }
        }
    }
    let local_distinct_rate = busy as f64 / interior as f64;

    // 32-bin histogram of per-channel gradient magnitudes over the region
    // where both forward differences exist.
    let max_mag = 255.0 * core::f64::consts::SQRT_2;
    let mut hist = [0u64; 32];
    let mut total = 0u64;
    for y in 0..h - 1 {
        for x in 0..w - 1 {
            let here = px[y * w + x];
            let right = px[y * w + x + 1];
            let down = px[(y + 1) * w + x];
            for ch in 0..3 {
                let dx = right[ch] as f64 - here[ch] as f64;
                let dy = down[ch] as f64 - here[ch] as f64;
                let mag = math::sqrt(dx * dx + dy * dy);
                let bin = ((mag / max_mag) * 32.0) as usize;
                hist[bin.min(31)] += 1;
                total += 1;
            }
        }
    }
    let mut gradient_entropy = 0.0;
    for &count in &hist {
        if count > 0 {
            let p = count as f64 / total as f64;
            gradient_entropy -= p * math::log2(p);
        }
    }

    Ok(DitherFeatures { checkerboard_energy, local_distinct_rate, gradient_entropy })
}

/// Logistic model over the three features; positive score means dithered.
///
/// Weights and bias live in raw feature space (standardization from training
/// is folded in); the means and scales are retained for inspection and
/// persistence.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct LinearClassifier {
    pub weights: [f64; 3],
    pub bias: f64,
    pub feature_means: [f64; 3],
    pub feature_scales: [f64; 3],
}

impl LinearClassifier {
    pub fn score(&self, features: &DitherFeatures) -> f64 {
        let x = features.as_array();
        self.weights[0] * x[0] + self.weights[1] * x[1] + self.weights[2] * x[2] + self.bias
    }

    /// Decision at the probability-0.5 boundary.
    pub fn decide(&self, features: &DitherFeatures) -> DitherMode {
        if self.score(features) > 0.0 {
            DitherMode::Dithered
        } else {
            DitherMode::NonDithered
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + math::exp(-z))
}

/// Fits the router by full-batch logistic regression.
///
/// Features are standardized with training-set statistics, descended from a
/// zero initialization for a fixed number of steps, and the standardization
/// is folded back into the returned weights. The whole procedure is
/// deterministic.
pub fn fit(pairs: &[(DitherFeatures, DitherMode)]) -> Result<LinearClassifier, FitError> {
    let n_dithered = pairs.iter().filter(|(_, m)| *m == DitherMode::Dithered).count();
    if n_dithered == 0 || n_dithered == pairs.len() {
        return Err(DetectError::SingleClass);
    }
    let n = pairs.len() as f64;

    let mut means = [0.0f64; 3];
    for (f, _) in pairs {
        let x = f.as_array();
        for i in 0..3 {
            means[i] += x[i] / n;
        }
    }
    let mut scales = [0.0f64; 3];
    for (f, _) in pairs {
        let x = f.as_array();
        for i in 0..3 {
            let d = x[i] - means[i];
            scales[i] += d * d / n;
        }
    }
    for s in &mut scales {
        *s = math::sqrt(*s);
        if *s == 0.0 {
            *s = 1.0;
        }
    }

    let standardized: Vec<([f64; 3], f64)> = pairs
        .iter()
        .map(|(f, m)| {
            let x = f.as_array();
            let z = [
                (x[0] - means[0]) / scales[0],
                (x[1] - means[1]) / scales[1],
                (x[2] - means[2]) / scales[2],
            ];
            let y = if *m == DitherMode::Dithered { 1.0 } else { 0.0 };
            (z, y)
        })
        .collect();

    let mut w = [0.0f64; 3];
    let mut b = 0.0f64;
    let lr = 1.0;
    for _ in 0..1000 {
        let mut gw = [0.0f64; 3];
        let mut gb = 0.0f64;
        for (z, y) in &standardized {
            let p = sigmoid(w[0] * z[0] + w[1] * z[1] + w[2] * z[2] + b);
            let e = p - y;
            for i in 0..3 {
                gw[i] += e * z[i] / n;
            }
            gb += e / n;
        }
        for i in 0..3 {
            w[i] -= lr * gw[i];
        }
        b -= lr * gb;
    }

    let mut weights = [0.0f64; 3];
    let mut bias = b;
    for i in 0..3 {
        weights[i] = w[i] / scales[i];
        bias -= w[i] * means[i] / scales[i];
    }
    Ok(LinearClassifier { weights, bias, feature_means: means, feature_scales: scales })
}

/// Extracts features and routes the frame.
pub fn classify(g_img: &RgbImage, model: &LinearClassifier) -> Result<DitherMode, DetectError> {
    Ok(model.decide(&extract_features(g_img)?))
}
