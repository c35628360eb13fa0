//! Assay quality metrics for screening experiments.
//!
//! Parametric metrics (Z'-factor, SSMD, CNR, SNR, SBR) come from group
//! means and variances. The overlap metrics (OVL, GCNR and the signed
//! GSSMD) come from a pair of histograms on shared equal-width bins, which
//! keeps them bounded and free of any distributional assumption.
//!
//! The [`simulation`] module reproduces the simulation studies (mean
//! differences, outliers, measurement noise, small samples, null
//! calibration) from explicit seeds, and [`hits`] turns the same metrics
//! into hit thresholds on plate data.

pub mod error;
pub mod hits;
pub mod metrics;
pub mod overlap;
pub mod report;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
pub use metrics::{cnr, sbr, snr_assay, ssmd, summarize, z_factor, SampleSet, SummaryStats};
pub use overlap::{bin_count, build_histogram_pair, gssmd, ovl, HistogramPair, OverlapResult};
pub use report::{MetricReport, QualityThresholds};
