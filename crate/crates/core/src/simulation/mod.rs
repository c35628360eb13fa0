//! Seeded generators and the scenario runners for the simulation studies.

mod calibration;
mod config;
pub mod figures;
mod noise;
mod outliers;
mod scenario;
mod subsample;

pub use calibration::{calibrate_null, percentile, NullCalibrationRow, NullCalibrationTable};
pub use config::ScenarioConfig;
pub use noise::{add_awgn, awgn_noise_variance, signal_power};
pub use outliers::inject_outliers;
pub use scenario::{
    run_mean_difference_sweep, run_noise_sweep, run_outlier_sweep, Aggregate, AggregateKind,
    GridPoint, PointSummary, ScenarioResult, ScenarioRow, TrialMetrics,
};
pub use subsample::{run_subsampled_estimate, SubsampleEstimate};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Normal,
    #[serde(alias = "log-normal", alias = "log_normal")]
    LogNormal,
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistributionKind::Normal => "normal",
            DistributionKind::LogNormal => "lognormal",
        })
    }
}

/// A normal or log-normal law. For `LogNormal`, `location` and `scale` are
/// the mean and standard deviation of the underlying normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    pub location: f64,
    pub scale: f64,
}

#[derive(Deserialize)]
struct RawDistribution {
    kind: DistributionKind,
    location: f64,
    scale: f64,
}

impl TryFrom<RawDistribution> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        DistributionSpec::new(raw.kind, raw.location, raw.scale)
    }
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind, location: f64, scale: f64) -> Result<Self> {
        if !(location.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "distribution needs finite location and positive scale, got ({location}, {scale})"
            )));
        }
        Ok(Self {
            kind,
            location,
            scale,
        })
    }

    pub fn normal(location: f64, scale: f64) -> Result<Self> {
        Self::new(DistributionKind::Normal, location, scale)
    }

    pub fn log_normal(location: f64, scale: f64) -> Result<Self> {
        Self::new(DistributionKind::LogNormal, location, scale)
    }

    /// Same family and scale, location moved by `delta` (on the log scale for
    /// `LogNormal`).
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        Self::new(self.kind, self.location + delta, self.scale)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        let x = self.location + self.scale * z;
        match self.kind {
            DistributionKind::Normal => x,
            DistributionKind::LogNormal => x.exp(),
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// `n` draws from `dist`, deterministic in `(dist, n, seed)`.
pub fn draw(dist: &DistributionSpec, n: usize, seed: u64) -> Result<SampleSet> {
    let mut rng = crate::rng::stream(seed, &[]);
    SampleSet::new(dist.kind.to_string(), dist.sample_n(&mut rng, n))
}
