//! One-feature logistic regression fitted by iteratively reweighted least
//! squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SampleSet;

/// Ridge term added to the diagonal of the normal equations.
pub const RIDGE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 50;
pub const DEFAULT_TOL: f64 = 1e-8;

/// `P(positive | x) = σ(intercept + slope·x)`, in readout units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub slope: f64,
    /// Readout at which both classes are equally likely.
    pub boundary: f64,
    pub converged: bool,
    pub iterations: usize,
    pub separable: bool,
}

impl LogisticModel {
    pub fn probability(&self, x: f64) -> f64 {
        sigmoid(self.intercept + self.slope * x)
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(points: &[(f64, f64)], b0: f64, b1: f64) -> f64 {
    points
        .iter()
        .map(|&(z, y)| {
            let eta = b0 + b1 * z;
            // log σ(η) = −log(1 + e^{−η}); log(1 − σ(η)) = −log(1 + e^{η})
            let log1pexp = |t: f64| if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
            if y > 0.5 {
                -log1pexp(-eta)
            } else {
                -log1pexp(eta)
            }
        })
        .sum()
}

/// Fits label 0 = negative control, 1 = positive control against the
/// readout.
///
/// The readout is standardized internally and the coefficients mapped back,
/// so the boundary moves with any positive-affine change of units. Stops
/// when the largest coefficient step or the log-likelihood change falls
/// below `tol`. Perfectly separable controls have no finite maximizer: the
/// loop then runs `max_iters` Newton steps and reports `converged = false`
/// with the boundary left between the groups.
pub fn fit_logistic_1d(neg: &SampleSet, pos: &SampleSet, max_iters: usize, tol: f64) -> Result<LogisticModel> {
    if max_iters == 0 || !(tol > 0.0) {
        return Err(Error::InvalidParameter("max_iters must be ≥ 1 and tol > 0".into()));
    }
    let all: Vec<f64> = neg.values().iter().chain(pos.values()).copied().collect();
    let n = all.len() as f64;
    let center = all.iter().sum::<f64>() / n;
    let spread = (all.iter().map(|v| (v - center).powi(2)).sum::<f64>() / n).sqrt();
    if spread == 0.0 {
        return Err(Error::DegenerateVariance("all control readouts are identical"));
    }
    let points: Vec<(f64, f64)> = neg
        .values()
        .iter()
        .map(|&x| ((x - center) / spread, 0.0))
        .chain(pos.values().iter().map(|&x| ((x - center) / spread, 1.0)))
        .collect();
    let separable = neg.max() < pos.min() || pos.max() < neg.min();

    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    let mut ll = log_likelihood(&points, b0, b1);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        // Gradient and (ridge-damped) Fisher information.
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, RIDGE, 0.0, RIDGE);
        for &(z, y) in &points {
            let p = sigmoid(b0 + b1 * z);
            let w = p * (1.0 - p);
            g0 += y - p;
            g1 += (y - p) * z;
            h00 += w;
            h01 += w * z;
            h11 += w * z * z;
        }
        let det = h00 * h11 - h01 * h01;
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        if !(d0.is_finite() && d1.is_finite()) {
            break;
        }
        b0 += d0;
        b1 += d1;
        let next_ll = log_likelihood(&points, b0, b1);
        let step = d0.abs().max(d1.abs());
        let ll_change = (next_ll - ll).abs();
        ll = next_ll;
        if !separable && (step < tol || ll_change < tol) {
            converged = true;
            break;
        }
    }

    // Back to readout units: η = b0 + b1 (x − c)/s.
    let slope = b1 / spread;
    let intercept = b0 - b1 * center / spread;
    let boundary = center - b0 * spread / b1;
    Ok(LogisticModel {
        intercept,
        slope,
        boundary,
        converged,
        iterations,
        separable,
    })
}

/// Fits with the default iteration cap and tolerance.
pub fn fit_logistic_default(neg: &SampleSet, pos: &SampleSet) -> Result<LogisticModel> {
    fit_logistic_1d(neg, pos, DEFAULT_MAX_ITERS, DEFAULT_TOL)
}

/// Fits from raw labeled readouts; both labels must be present.
pub fn fit_logistic_labeled(readouts: &[f64], labels: &[bool], max_iters: usize, tol: f64) -> Result<LogisticModel> {
    if readouts.len() != labels.len() {
        return Err(Error::InvalidParameter("readouts and labels differ in length".into()));
    }
    let split = |want: bool| -> Vec<f64> {
        readouts
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == want)
            .map(|(&x, _)| x)
            .collect()
    };
    let (neg, pos) = (split(false), split(true));
    if pos.is_empty() {
        return Err(Error::SingleClassInput("negative controls"));
    }
    if neg.is_empty() {
        return Err(Error::SingleClassInput("positive controls"));
    }
    fit_logistic_1d(&SampleSet::new("neg", neg)?, &SampleSet::new("pos", pos)?, max_iters, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{draw, DistributionSpec};

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::new("t", v.to_vec()).unwrap()
    }

    #[test]
    fn separable_symmetric_data() {
        let m = fit_logistic_default(&set(&[-1.0, -2.0]), &set(&[1.0, 2.0])).unwrap();
        assert!(m.boundary.abs() <= 0.1, "{m:?}");
        assert!(!m.converged);
        assert!(m.separable);
        assert_eq!(m.iterations, DEFAULT_MAX_ITERS);
        assert!(m.boundary.is_finite() && m.slope > 0.0);
    }

    #[test]
    fn overlapping_normals_recover_midpoint() {
        let neg = draw(&DistributionSpec::normal(0.0, 1.0).unwrap(), 10_000, 1).unwrap();
        let pos = draw(&DistributionSpec::normal(2.0, 1.0).unwrap(), 10_000, 2).unwrap();
        let m = fit_logistic_default(&neg, &pos).unwrap();
        assert!(m.converged);
        assert!((m.boundary - 1.0).abs() <= 0.05, "{m:?}");
        // Equal-variance normals: slope d/σ² = 2.
        assert!((m.slope - 2.0).abs() < 0.1);
        assert!((m.probability(m.boundary) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_class_rejected() {
        assert_eq!(
            fit_logistic_labeled(&[1.0, 2.0], &[false, false], 50, 1e-8),
            Err(Error::SingleClassInput("negative controls"))
        );
        assert!(matches!(
            fit_logistic_labeled(&[1.0, 2.0], &[true, true], 50, 1e-8),
            Err(Error::SingleClassInput(_))
        ));
        let m = fit_logistic_labeled(&[-1.0, -2.0, 1.0, 2.0], &[false, false, true, true], 50, 1e-8).unwrap();
        assert!(m.boundary.abs() <= 0.1);
    }

    #[test]
    fn downward_effect_has_negative_slope() {
        let m = fit_logistic_default(&set(&[5.0, 6.0, 4.0, 2.5]), &set(&[1.0, 3.0, 2.0, 0.5])).unwrap();
        assert!(m.slope < 0.0);
        assert!(m.boundary > 0.5 && m.boundary < 6.0);
    }

    #[test]
    fn boundary_follows_affine_units() {
        let neg = draw(&DistributionSpec::normal(0.0, 1.0).unwrap(), 300, 3).unwrap();
        let pos = draw(&DistributionSpec::normal(1.5, 1.0).unwrap(), 300, 4).unwrap();
        let base = fit_logistic_default(&neg, &pos).unwrap();
        let (a, b) = (250.0, 1e4);
        let m = fit_logistic_default(&neg.map(|v| a * v + b).unwrap(), &pos.map(|v| a * v + b).unwrap()).unwrap();
        assert!((m.boundary - (a * base.boundary + b)).abs() <= 1e-6 * a, "{} vs {}", m.boundary, base.boundary);
    }
}
