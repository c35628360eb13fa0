//! The combined metric report for one negative/positive pair.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::Result;
use crate::metrics::{self, SampleSet};
use crate::overlap;

/// Minimum quality levels: Z' ≥ 0.5, |SSMD| ≥ 3, |GSSMD| ≥ 0.95.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityThresholds {
    #[serde(serialize_with = "sig12")]
    pub z_factor: f64,
    #[serde(serialize_with = "sig12")]
    pub ssmd: f64,
    #[serde(serialize_with = "sig12")]
    pub gssmd: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        Self {
            z_factor: 0.5,
            ssmd: 3.0,
            gssmd: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceFlags {
    pub z_factor: bool,
    pub ssmd: bool,
    pub gssmd: bool,
}

/// All eight metrics plus estimation metadata. Metrics that are undefined
/// for the input (zero spread, zero background mean, equal means) are
/// `None` and serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    #[serde(serialize_with = "sig12_opt")]
    pub snr: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub sbr: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub z_factor: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub ssmd: Option<f64>,
    #[serde(serialize_with = "sig12_opt")]
    pub cnr: Option<f64>,
    #[serde(serialize_with = "sig12")]
    pub ovl: f64,
    #[serde(serialize_with = "sig12")]
    pub gcnr: f64,
    #[serde(serialize_with = "sig12")]
    pub gssmd: f64,
    pub sign: i8,
    pub n_neg: usize,
    pub n_pos: usize,
    pub bins: usize,
    pub thresholds: QualityThresholds,
    pub accepted: AcceptanceFlags,
}

impl MetricReport {
    pub fn compute(neg: &SampleSet, pos: &SampleSet, bins: Option<usize>) -> Result<Self> {
        Self::compute_with(neg, pos, bins, QualityThresholds::default())
    }

    pub fn compute_with(
        neg: &SampleSet,
        pos: &SampleSet,
        bins: Option<usize>,
        thresholds: QualityThresholds,
    ) -> Result<Self> {
        let (sn, sp) = (neg.summarize(), pos.summarize());
        let overlap = overlap::gssmd(neg, pos, bins)?;
        let z_factor = metrics::z_factor(&sp, &sn).ok();
        let ssmd = metrics::ssmd(&sp, &sn).ok();
        let accepted = AcceptanceFlags {
            z_factor: z_factor.is_some_and(|z| z >= thresholds.z_factor),
            ssmd: ssmd.is_some_and(|s| s.abs() >= thresholds.ssmd),
            gssmd: overlap.gssmd.abs() >= thresholds.gssmd,
        };
        Ok(Self {
            label: format!("{} vs {}", pos.label(), neg.label()),
            snr: metrics::snr_assay(&sp, &sn).ok(),
            sbr: metrics::sbr(&sp, &sn).ok(),
            z_factor,
            ssmd,
            cnr: ssmd.map(f64::abs),
            ovl: overlap.ovl,
            gcnr: overlap.gcnr,
            gssmd: overlap.gssmd,
            sign: overlap.sign,
            n_neg: neg.len(),
            n_pos: pos.len(),
            bins: overlap.bins_used,
            thresholds,
            accepted,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Rounds every float to the precision used on output, so that a
    /// report compares equal to its own parsed JSON.
    pub fn rounded(mut self) -> Self {
        for v in [
            &mut self.snr,
            &mut self.sbr,
            &mut self.z_factor,
            &mut self.ssmd,
            &mut self.cnr,
        ] {
            *v = v.map(round_sig12);
        }
        self.ovl = round_sig12(self.ovl);
        self.gcnr = round_sig12(self.gcnr);
        self.gssmd = round_sig12(self.gssmd);
        self
    }
}

/// Rounds to 12 significant decimal digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x + 0.0;
    }
    format!("{x:.11e}").parse::<f64>().expect("formatted float parses") + 0.0
}

/// Shortest decimal text of `x` after rounding to 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    format!("{}", round_sig12(x))
}

pub fn sig12<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig12(*x))
}

pub fn sig12_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_sig12(*v)),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(label: &str, v: Vec<f64>) -> SampleSet {
        SampleSet::new(label, v).unwrap()
    }

    #[test]
    fn report_invariants_hold() {
        let neg = set("neg", vec![0.1, -0.4, 0.3, 0.0, 0.5, -0.2]);
        let pos = set("pos", vec![2.1, 1.4, 2.9, 3.3, 1.8, 2.4]);
        let r = MetricReport::compute(&neg, &pos, None).unwrap();
        assert_eq!(r.gcnr, 1.0 - r.ovl);
        assert_eq!(r.cnr, r.ssmd.map(f64::abs));
        assert_eq!(r.accepted.gssmd, r.gssmd.abs() >= 0.95);
        assert_eq!(r.n_neg, 6);
        assert_eq!(r.label, "pos vs neg");
    }

    #[test]
    fn undefined_metrics_are_null() {
        let a = set("a", vec![1.0, 1.0]);
        let r = MetricReport::compute(&a, &a, None).unwrap();
        assert_eq!(r.z_factor, None);
        assert_eq!(r.ssmd, None);
        assert_eq!(r.snr, None);
        assert_eq!(r.sbr, Some(1.0));
        assert!(!r.accepted.z_factor && !r.accepted.ssmd && !r.accepted.gssmd);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["z_factor"].is_null());
    }

    #[test]
    fn sig12_rounding() {
        assert_eq!(round_sig12(0.1 + 0.2), 0.3);
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(-0.0), "0");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(123456.7890123456), "123456.789012");
    }
}
