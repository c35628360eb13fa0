use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DistributionSpec;
use crate::error::{Error, Result};
use crate::metrics::SampleSet;
use crate::overlap;
use crate::rng::stream;

/// Linear-interpolation quantile (`q` in `[0, 1]`) of unsorted data.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, q)
}

fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Null distribution of GSSMD at one per-group sample size.
///
/// `mean`..`p999` describe |GSSMD|; `signed_mean` and `signed_std_error`
/// describe the signed statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullCalibrationRow {
    pub n: usize,
    pub trials: usize,
    pub bins: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub p95: f64,
    pub p99: f64,
    pub p999: f64,
    pub signed_mean: f64,
    pub signed_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullCalibrationTable {
    pub dist: DistributionSpec,
    pub seed: u64,
    pub rows: Vec<NullCalibrationRow>,
}

impl NullCalibrationTable {
    pub fn row(&self, n: usize) -> Option<&NullCalibrationRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Draws both groups i.i.d. from `dist` for every size and trial and
/// tabulates the resulting GSSMD values. Trial `t` at size `n` uses the
/// stream `(seed, n, t)`, so a row does not depend on the rest of the grid.
pub fn calibrate_null(
    sizes: &[usize],
    trials: usize,
    dist: &DistributionSpec,
    seed: u64,
    bins: Option<usize>,
) -> Result<NullCalibrationTable> {
    if trials < 100 {
        return Err(Error::InvalidParameter(format!(
            "null calibration needs at least 100 trials, got {trials}"
        )));
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidParameter("sizes must be a non-empty list of positive integers".into()));
    }
    let rows = sizes
        .iter()
        .map(|&n| {
            let results: Vec<overlap::OverlapResult> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream(seed, &[n as u64, t]);
                    let neg = SampleSet::new("neg", dist.sample_n(&mut rng, n))?;
                    let pos = SampleSet::new("pos", dist.sample_n(&mut rng, n))?;
                    overlap::gssmd(&neg, &pos, bins)
                })
                .collect::<Result<_>>()?;
            Ok(tabulate(n, &results))
        })
        .collect::<Result<_>>()?;
    Ok(NullCalibrationTable {
        dist: *dist,
        seed,
        rows,
    })
}

fn tabulate(n: usize, results: &[overlap::OverlapResult]) -> NullCalibrationRow {
    let count = results.len() as f64;
    let signed: Vec<f64> = results.iter().map(|r| r.gssmd).collect();
    let mut abs: Vec<f64> = signed.iter().map(|g| g.abs()).collect();
    abs.sort_by(f64::total_cmp);

    let mean = abs.iter().sum::<f64>() / count;
    let variance = abs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let signed_mean = signed.iter().sum::<f64>() / count;
    let signed_var = signed.iter().map(|v| (v - signed_mean).powi(2)).sum::<f64>() / (count - 1.0);
    NullCalibrationRow {
        n,
        trials: results.len(),
        bins: results[0].bins_used,
        mean,
        variance,
        min: abs[0],
        max: abs[abs.len() - 1],
        p95: percentile_sorted(&abs, 0.95),
        p99: percentile_sorted(&abs, 0.99),
        p999: percentile_sorted(&abs, 0.999),
        signed_mean,
        signed_std_error: (signed_var / count).sqrt(),
    }
}
