//! Plate-format screening data, assay quality per plate, and hit calling.

mod logistic;
mod plate;
mod threshold;

pub use logistic::{
    fit_logistic_1d, fit_logistic_default, fit_logistic_labeled, LogisticModel, DEFAULT_MAX_ITERS, DEFAULT_TOL,
    RIDGE,
};
pub use plate::{
    load_plate_csv, load_plate_csv_path, write_plate_csv, Plate, Well, WellAddress, WellRole, PLATE_CSV_HEADER,
};
pub use threshold::{
    evaluate_threshold, gssmd_threshold, sigma_rule_threshold, ssmd_rule_threshold, Direction, GssmdThreshold,
    RuleKind, ThresholdEvaluation, ThresholdRule,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SampleSet;
use crate::report::MetricReport;

/// Minimum wells per control group for quality and threshold operations.
pub const MIN_CONTROLS: usize = 2;

/// All metrics on the plate's control groups, with acceptance flags.
pub fn assay_quality(plate: &Plate, bins: Option<usize>) -> Result<MetricReport> {
    let (neg, pos) = plate.controls(MIN_CONTROLS)?;
    Ok(MetricReport::compute(&neg, &pos, bins)?.with_label(plate.plate_id.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitOptions {
    pub bins: Option<usize>,
    /// Forces the hit side; `None` takes it from the control means.
    pub direction: Option<Direction>,
    /// Fit the logistic reference on `ln(readout)`; the threshold is
    /// reported back in readout units.
    pub log_transform: bool,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for HitOptions {
    fn default() -> Self {
        Self {
            bins: None,
            direction: None,
            log_transform: false,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }
}

/// Threshold and side produced by a rule from one plate's controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleThreshold {
    pub threshold: f64,
    pub direction: Direction,
    pub rule: ThresholdRule,
    /// Bin width of the control histogram, for GSSMD rules.
    pub bin_width: Option<f64>,
    /// Whether |GSSMD| ≥ 1 − α, for GSSMD rules.
    pub meets_quality: Option<bool>,
    pub model: Option<LogisticModel>,
}

/// Computes the rule's threshold from control groups.
pub fn rule_threshold(
    neg: &SampleSet,
    pos: &SampleSet,
    rule: &ThresholdRule,
    opts: &HitOptions,
) -> Result<RuleThreshold> {
    let natural = Direction::from_controls(neg, pos);
    let check = |derived: Direction| match opts.direction {
        Some(forced) if forced != derived => Err(Error::InvalidParameter(format!(
            "requested direction {forced:?} contradicts the controls ({derived:?})"
        ))),
        _ => Ok(derived),
    };
    let base = RuleThreshold {
        threshold: f64::NAN,
        direction: Direction::PositiveIsHigher,
        rule: *rule,
        bin_width: None,
        meets_quality: None,
        model: None,
    };
    match rule.kind {
        RuleKind::GssmdOverlap => {
            let t = gssmd_threshold(neg, pos, rule.parameter, opts.bins)?;
            Ok(RuleThreshold {
                threshold: t.threshold,
                direction: check(t.direction)?,
                bin_width: Some(t.bin_width),
                meets_quality: Some(t.meets_quality),
                ..base
            })
        }
        RuleKind::SigmaRule | RuleKind::SsmdRule => {
            let direction = match opts.direction {
                Some(d) => d,
                None => natural?,
            };
            let threshold = if rule.kind == RuleKind::SigmaRule {
                sigma_rule_threshold(neg, rule.parameter, direction)?
            } else {
                ssmd_rule_threshold(neg, rule.parameter, direction)?
            };
            Ok(RuleThreshold {
                threshold,
                direction,
                ..base
            })
        }
        RuleKind::Logistic => {
            let direction = check(natural?)?;
            let (fit_neg, fit_pos) = if opts.log_transform {
                let log = |s: &SampleSet| {
                    if s.min() <= 0.0 {
                        return Err(Error::InvalidParameter(
                            "log transform needs strictly positive readouts".into(),
                        ));
                    }
                    s.map(f64::ln)
                };
                (log(neg)?, log(pos)?)
            } else {
                (neg.clone(), pos.clone())
            };
            let model = fit_logistic_1d(&fit_neg, &fit_pos, opts.max_iters, opts.tol)?;
            let threshold = if opts.log_transform {
                model.boundary.exp()
            } else {
                model.boundary
            };
            Ok(RuleThreshold {
                threshold,
                direction,
                model: Some(model),
                ..base
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitReport {
    pub plate_id: String,
    pub threshold: f64,
    pub direction: Direction,
    pub hits: Vec<WellAddress>,
    pub n_hits: usize,
    pub n_samples: usize,
    pub rule: ThresholdRule,
    pub bin_width: Option<f64>,
    pub meets_quality: Option<bool>,
    pub model: Option<LogisticModel>,
    pub assay_quality: MetricReport,
}

/// Calls every sample well strictly on the positive side of the rule's
/// threshold a hit.
pub fn select_hits(plate: &Plate, rule: &ThresholdRule, opts: &HitOptions) -> Result<HitReport> {
    let quality = assay_quality(plate, opts.bins)?;
    let (neg, pos) = plate.controls(MIN_CONTROLS)?;
    let t = rule_threshold(&neg, &pos, rule, opts)?;
    Ok(apply_threshold(plate, t, quality))
}

/// Applies a threshold fitted elsewhere (e.g. on a replicate plate).
pub fn apply_threshold(plate: &Plate, t: RuleThreshold, quality: MetricReport) -> HitReport {
    let mut hits: Vec<WellAddress> = plate
        .samples()
        .filter(|&(_, v)| t.direction.is_hit(v, t.threshold))
        .map(|(a, _)| a)
        .collect();
    hits.sort_unstable();
    HitReport {
        plate_id: plate.plate_id.clone(),
        threshold: t.threshold,
        direction: t.direction,
        n_hits: hits.len(),
        n_samples: plate.samples().count(),
        hits,
        rule: t.rule,
        bin_width: t.bin_width,
        meets_quality: t.meets_quality,
        model: t.model,
        assay_quality: quality,
    }
}

/// Fits the rule on `train`'s controls and scores it on `test`'s controls.
pub fn train_test_evaluate(
    train: &Plate,
    test: &Plate,
    rule: &ThresholdRule,
    opts: &HitOptions,
) -> Result<(RuleThreshold, ThresholdEvaluation)> {
    let (neg, pos) = train.controls(MIN_CONTROLS)?;
    let t = rule_threshold(&neg, &pos, rule, opts)?;
    let (test_neg, test_pos) = test.controls(1)?;
    let eval = evaluate_threshold(&test_neg, &test_pos, t.threshold, t.direction);
    Ok((t, eval))
}
