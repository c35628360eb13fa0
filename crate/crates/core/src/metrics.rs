//! Parametric assay-quality metrics computed from group summaries.
//!
//! Conventions: the first argument is always the positive control (or test
//! group), the second the negative control. `std_dev` is the square root of
//! the unbiased sample variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A labeled, non-empty vector of finite measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    label: String,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                label,
                index,
                value,
            });
        }
        Ok(Self { label, values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        mean_of(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Applies `f` elementwise, keeping the label. Fails if `f` produces a
    /// non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        SampleSet::new(self.label.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn summarize(&self) -> SummaryStats {
        let count = self.values.len();
        let mean = mean_of(&self.values);
        let variance = if count < 2 {
            0.0
        } else {
            let ss: f64 = self.values.iter().map(|v| (v - mean) * (v - mean)).sum();
            ss / (count - 1) as f64
        };
        SummaryStats {
            mean,
            variance,
            std_dev: variance.sqrt(),
            count,
        }
    }
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean, unbiased variance and count of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub count: usize,
}

impl SummaryStats {
    /// Builds a summary from known moments. `std_dev` is derived from
    /// `variance`.
    pub fn from_moments(mean: f64, variance: f64, count: usize) -> Result<Self> {
        if !(mean.is_finite() && variance.is_finite()) || variance < 0.0 || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "invalid moments: mean={mean}, variance={variance}, count={count}"
            )));
        }
        Ok(Self {
            mean,
            variance,
            std_dev: variance.sqrt(),
            count,
        })
    }

    /// A single observation carries no spread information.
    pub fn is_degenerate(&self) -> bool {
        self.count < 2
    }
}

/// Summarizes a raw slice; errors on empty input.
pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    Ok(SampleSet::new("", values.to_vec())?.summarize())
}

/// Assay signal-to-noise ratio `(μ₁ − μ₂) / σ₂`.
pub fn snr_assay(pos: &SummaryStats, neg: &SummaryStats) -> Result<f64> {
    if neg.std_dev == 0.0 {
        return Err(Error::DegenerateVariance("negative control has zero spread"));
    }
    Ok((pos.mean - neg.mean) / neg.std_dev)
}

/// Signal-to-background ratio `μ₁ / μ₂`.
pub fn sbr(pos: &SummaryStats, neg: &SummaryStats) -> Result<f64> {
    if neg.mean == 0.0 {
        return Err(Error::DivisionByZeroMean);
    }
    Ok(pos.mean / neg.mean)
}

/// Z'-factor `1 − 3(σ₁ + σ₂) / |μ₁ − μ₂|`, in `(−∞, 1]`.
pub fn z_factor(pos: &SummaryStats, neg: &SummaryStats) -> Result<f64> {
    let spread = (pos.mean - neg.mean).abs();
    if spread == 0.0 {
        return Err(Error::DegenerateMeanDifference);
    }
    Ok(1.0 - 3.0 * (pos.std_dev + neg.std_dev) / spread)
}

/// Strictly standardized mean difference `(μ₁ − μ₂) / √(σ₁² + σ₂²)`.
pub fn ssmd(pos: &SummaryStats, neg: &SummaryStats) -> Result<f64> {
    let pooled = pos.variance + neg.variance;
    if pooled == 0.0 {
        return Err(Error::DegenerateVariance("both groups have zero variance"));
    }
    Ok((pos.mean - neg.mean) / pooled.sqrt())
}

/// Contrast-to-noise ratio, the magnitude of SSMD.
pub fn cnr(pos: &SummaryStats, neg: &SummaryStats) -> Result<f64> {
    ssmd(pos, neg).map(f64::abs)
}
