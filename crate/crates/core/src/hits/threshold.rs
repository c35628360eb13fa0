//! Hit thresholds derived from control groups, and their evaluation on
//! held-out controls.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SampleSet;
use crate::overlap::{self, sign_of, HistogramPair, OverlapResult};

/// Side of the negative control on which positive controls (and hits) lie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    PositiveIsLower,
    PositiveIsHigher,
}

impl Direction {
    /// Direction of `mean(pos) − mean(neg)`; `ZeroSign` when equal.
    pub fn from_controls(neg: &SampleSet, pos: &SampleSet) -> Result<Self> {
        match sign_of(pos.mean() - neg.mean()) {
            1 => Ok(Direction::PositiveIsHigher),
            -1 => Ok(Direction::PositiveIsLower),
            _ => Err(Error::ZeroSign),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::PositiveIsLower => Direction::PositiveIsHigher,
            Direction::PositiveIsHigher => Direction::PositiveIsLower,
        }
    }

    /// True when `value` lies strictly on the positive-control side of
    /// `threshold`.
    pub fn is_hit(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::PositiveIsHigher => value > threshold,
            Direction::PositiveIsLower => value < threshold,
        }
    }

    fn unit(self) -> f64 {
        match self {
            Direction::PositiveIsHigher => 1.0,
            Direction::PositiveIsLower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    GssmdOverlap,
    SigmaRule,
    SsmdRule,
    Logistic,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::GssmdOverlap => "gssmd",
            RuleKind::SigmaRule => "sigma",
            RuleKind::SsmdRule => "ssmd",
            RuleKind::Logistic => "logistic",
        })
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gssmd" | "gssmd_overlap" => Ok(RuleKind::GssmdOverlap),
            "sigma" | "sigma_rule" => Ok(RuleKind::SigmaRule),
            "ssmd" | "ssmd_rule" => Ok(RuleKind::SsmdRule),
            "logistic" => Ok(RuleKind::Logistic),
            other => Err(Error::InvalidParameter(format!(
                "unknown rule '{other}' (expected gssmd, sigma, ssmd or logistic)"
            ))),
        }
    }
}

/// A hit-threshold rule. The parameter is the overlap level α for
/// `GssmdOverlap` (default 0.05), k for `SigmaRule` and β for `SsmdRule`
/// (both default 3). `Logistic` ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub kind: RuleKind,
    pub parameter: f64,
}

impl ThresholdRule {
    pub fn new(kind: RuleKind, parameter: f64) -> Result<Self> {
        let ok = parameter.is_finite()
            && match kind {
                RuleKind::GssmdOverlap => parameter > 0.0 && parameter < 1.0,
                RuleKind::SigmaRule | RuleKind::SsmdRule => parameter >= 0.0,
                RuleKind::Logistic => true,
            };
        if !ok {
            return Err(Error::InvalidParameter(format!("invalid parameter {parameter} for {kind} rule")));
        }
        Ok(Self { kind, parameter })
    }

    pub fn default_for(kind: RuleKind) -> Self {
        let parameter = match kind {
            RuleKind::GssmdOverlap => 0.05,
            RuleKind::SigmaRule | RuleKind::SsmdRule => 3.0,
            RuleKind::Logistic => 0.0,
        };
        Self { kind, parameter }
    }

    pub fn gssmd(alpha: f64) -> Result<Self> {
        Self::new(RuleKind::GssmdOverlap, alpha)
    }

    pub fn sigma(k: f64) -> Result<Self> {
        Self::new(RuleKind::SigmaRule, k)
    }

    pub fn ssmd(beta: f64) -> Result<Self> {
        Self::new(RuleKind::SsmdRule, beta)
    }

    pub fn logistic() -> Self {
        Self::default_for(RuleKind::Logistic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GssmdThreshold {
    pub threshold: f64,
    pub direction: Direction,
    pub bin_width: f64,
    /// Whether |GSSMD| ≥ 1 − α.
    pub meets_quality: bool,
    pub overlap: OverlapResult,
}

/// First maximal bin, visiting bins in `order`.
fn mode_bin(mass: &[f64], order: &[usize]) -> usize {
    order
        .iter()
        .fold((order[0], f64::NEG_INFINITY), |best, &i| if mass[i] > best.1 { (i, mass[i]) } else { best })
        .0
}

/// Density-crossing threshold between the control histograms.
///
/// Scans bins from the negative-control mode toward the positive-control
/// mode and returns the centre of the first bin where the positive mass is
/// non-zero and at least the negative mass. When the groups are disjoint
/// (zero overlap and separated extremes) the midpoint of the gap is
/// returned instead.
pub fn gssmd_threshold(
    neg: &SampleSet,
    pos: &SampleSet,
    alpha: f64,
    bins: Option<usize>,
) -> Result<GssmdThreshold> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let direction = Direction::from_controls(neg, pos)?;
    let h = overlap::build_histogram_pair(neg, pos, bins)?;
    let overlap = overlap::gssmd_from_histogram(&h, pos.mean() - neg.mean());

    let gap = match direction {
        Direction::PositiveIsHigher => (neg.max(), pos.min()),
        Direction::PositiveIsLower => (pos.max(), neg.min()),
    };
    let threshold = if overlap.ovl == 0.0 && gap.0 < gap.1 {
        0.5 * (gap.0 + gap.1)
    } else {
        crossing_center(&h, direction)
    };
    Ok(GssmdThreshold {
        threshold,
        direction,
        bin_width: h.bin_width(),
        meets_quality: overlap.gssmd.abs() >= 1.0 - alpha,
        overlap,
    })
}

fn crossing_center(h: &HistogramPair, direction: Direction) -> f64 {
    // Bins ordered from the negative side toward the positive side, so that
    // mirrored data resolves ties the same way.
    let order: Vec<usize> = match direction {
        Direction::PositiveIsHigher => (0..h.bins()).collect(),
        Direction::PositiveIsLower => (0..h.bins()).rev().collect(),
    };
    let start = mode_bin(&h.mass_neg, &order);
    let start_pos = order.iter().position(|&b| b == start).unwrap_or(0);
    let crosses = |b: usize| h.mass_pos[b] > 0.0 && h.mass_pos[b] >= h.mass_neg[b];
    let found = order[start_pos..].iter().copied().find(|&b| crosses(b));
    h.bin_center(found.unwrap_or_else(|| mode_bin(&h.mass_pos, &order)))
}

fn require_spread(neg: &SampleSet) -> Result<(f64, f64)> {
    let s = neg.summarize();
    if s.std_dev == 0.0 {
        return Err(Error::DegenerateVariance("negative control has zero spread"));
    }
    Ok((s.mean, s.std_dev))
}

/// `mean(neg) ± k·sd(neg)`, on the positive-control side.
pub fn sigma_rule_threshold(neg: &SampleSet, k: f64, direction: Direction) -> Result<f64> {
    let (mean, sd) = require_spread(neg)?;
    Ok(mean + direction.unit() * k * sd)
}

/// Readout at which a single well, taken as a point mass, reaches
/// `|SSMD| = β` against the negative control: `mean(neg) ± β·√2·sd(neg)`.
pub fn ssmd_rule_threshold(neg: &SampleSet, beta: f64, direction: Direction) -> Result<f64> {
    let (mean, sd) = require_spread(neg)?;
    Ok(mean + direction.unit() * beta * std::f64::consts::SQRT_2 * sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEvaluation {
    pub accuracy: f64,
    pub type1_error: f64,
    pub misclassification: f64,
    pub n_neg: usize,
    pub n_pos: usize,
}

/// Classifies held-out controls with `threshold`: positives should land on
/// the hit side, negatives off it.
pub fn evaluate_threshold(
    test_neg: &SampleSet,
    test_pos: &SampleSet,
    threshold: f64,
    direction: Direction,
) -> ThresholdEvaluation {
    let false_pos = test_neg
        .values()
        .iter()
        .filter(|&&v| direction.is_hit(v, threshold))
        .count();
    let true_pos = test_pos
        .values()
        .iter()
        .filter(|&&v| direction.is_hit(v, threshold))
        .count();
    let (n_neg, n_pos) = (test_neg.len(), test_pos.len());
    let wrong = false_pos + (n_pos - true_pos);
    let total = (n_neg + n_pos) as f64;
    ThresholdEvaluation {
        accuracy: (total - wrong as f64) / total,
        type1_error: false_pos as f64 / n_neg as f64,
        misclassification: wrong as f64 / total,
        n_neg,
        n_pos,
    }
}
