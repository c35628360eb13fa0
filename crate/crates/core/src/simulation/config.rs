use serde::{Deserialize, Serialize};

use super::DistributionSpec;
use crate::error::{Error, Result};

/// Parameters for one scenario runner.
///
/// Readable from TOML:
///
/// ```toml
/// n = 1000
/// seed = 7
/// trials = 20
/// mu_diffs = [0, 1, 3, 5, 10]
///
/// [neg]
/// kind = "normal"      # or "lognormal"
/// location = 0.0
/// scale = 1.0
/// ```
///
/// Outlier sweeps additionally need `outlier_fractions` and `outlier_means`
/// (`outlier_scale` defaults to 1); noise sweeps need `snr_db`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub neg: DistributionSpec,
    #[serde(default)]
    pub mu_diffs: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub outlier_fractions: Vec<f64>,
    #[serde(default)]
    pub outlier_means: Vec<f64>,
    #[serde(default = "default_outlier_scale")]
    pub outlier_scale: f64,
    #[serde(default)]
    pub snr_db: Vec<f64>,
    /// Fixed bin count; `None` applies the `1 + log2(N)` rule.
    #[serde(default)]
    pub bins: Option<usize>,
}

fn default_trials() -> usize {
    1
}

fn default_outlier_scale() -> f64 {
    1.0
}

impl ScenarioConfig {
    pub fn new(neg: DistributionSpec, n: usize, seed: u64) -> Self {
        Self {
            neg,
            mu_diffs: Vec::new(),
            n,
            seed,
            trials: 1,
            outlier_fractions: Vec::new(),
            outlier_means: Vec::new(),
            outlier_scale: 1.0,
            snr_db: Vec::new(),
            bins: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("scenario config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.bins == Some(0) {
            return bad("bins must be positive".into());
        }
        if let Some(f) = self.outlier_fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return bad(format!("outlier fraction {f} outside [0, 1]"));
        }
        if !(self.outlier_scale.is_finite() && self.outlier_scale > 0.0) {
            return bad(format!("outlier_scale must be positive, got {}", self.outlier_scale));
        }
        let grids = [&self.mu_diffs, &self.outlier_means, &self.snr_db];
        if grids.iter().flat_map(|g| g.iter()).any(|v| !v.is_finite()) {
            return bad("grid values must be finite".into());
        }
        Ok(())
    }
}
