use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{add_awgn, inject_outliers, percentile, DistributionKind, DistributionSpec, ScenarioConfig};
use crate::error::{Error, Result};
use crate::metrics::{self, SampleSet};
use crate::overlap;
use crate::rng::{derive_seed, stream};

/// One point of a scenario grid. Fields a scenario does not vary are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub dist: DistributionKind,
    pub neg_scale: f64,
    pub n: usize,
    pub mu_diff: f64,
    pub outlier_fraction: Option<f64>,
    pub outlier_mean: Option<f64>,
    pub snr_db: Option<f64>,
}

/// Metrics from a single trial at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub z_factor: f64,
    pub ssmd: f64,
    pub gssmd: f64,
    pub ovl: f64,
    pub bins: usize,
}

impl TrialMetrics {
    pub fn evaluate(neg: &SampleSet, pos: &SampleSet, bins: Option<usize>) -> Result<Self> {
        let (sn, sp) = (neg.summarize(), pos.summarize());
        let overlap = overlap::gssmd(neg, pos, bins)?;
        Ok(Self {
            z_factor: metrics::z_factor(&sp, &sn)?,
            ssmd: metrics::ssmd(&sp, &sn)?,
            gssmd: overlap.gssmd,
            ovl: overlap.ovl,
            bins: overlap.bins_used,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateKind {
    Mean,
    Std,
    Min,
    Max,
    Median,
}

impl AggregateKind {
    pub const ALL: [AggregateKind; 5] = [
        AggregateKind::Mean,
        AggregateKind::Std,
        AggregateKind::Min,
        AggregateKind::Max,
        AggregateKind::Median,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggregateKind::Mean => "mean",
            AggregateKind::Std => "std",
            AggregateKind::Min => "min",
            AggregateKind::Max => "max",
            AggregateKind::Median => "median",
        }
    }
}

/// Across-trial summary of one metric. `std` uses the n − 1 divisor and is
/// 0 for a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            median: percentile(values, 0.5),
        }
    }

    pub fn get(&self, kind: AggregateKind) -> f64 {
        match kind {
            AggregateKind::Mean => self.mean,
            AggregateKind::Std => self.std,
            AggregateKind::Min => self.min,
            AggregateKind::Max => self.max,
            AggregateKind::Median => self.median,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: GridPoint,
    pub bins: usize,
    pub z_factor: Aggregate,
    pub ssmd: Aggregate,
    pub gssmd: Aggregate,
    pub ovl: Aggregate,
}

impl PointSummary {
    fn from_trials(point: GridPoint, trials: &[TrialMetrics]) -> Self {
        let agg = |f: fn(&TrialMetrics) -> f64| Aggregate::of(&trials.iter().map(f).collect::<Vec<_>>());
        Self {
            point,
            bins: trials[0].bins,
            z_factor: agg(|t| t.z_factor),
            ssmd: agg(|t| t.ssmd),
            gssmd: agg(|t| t.gssmd),
            ovl: agg(|t| t.ovl),
        }
    }
}

/// One (grid point, aggregate) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub point: GridPoint,
    pub aggregate: AggregateKind,
    pub z_factor: f64,
    pub ssmd: f64,
    pub gssmd: f64,
    pub ovl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: String,
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub points: Vec<PointSummary>,
}

impl ScenarioResult {
    pub fn rows(&self) -> Vec<ScenarioRow> {
        self.points
            .iter()
            .flat_map(|p| {
                AggregateKind::ALL.into_iter().map(move |kind| ScenarioRow {
                    point: p.point.clone(),
                    aggregate: kind,
                    z_factor: p.z_factor.get(kind),
                    ssmd: p.ssmd.get(kind),
                    gssmd: p.gssmd.get(kind),
                    ovl: p.ovl.get(kind),
                })
            })
            .collect()
    }

    /// First summary whose point satisfies `pred`.
    pub fn find(&self, pred: impl Fn(&GridPoint) -> bool) -> Option<&PointSummary> {
        self.points.iter().find(|p| pred(&p.point))
    }
}

fn base_point(cfg: &ScenarioConfig) -> GridPoint {
    GridPoint {
        dist: cfg.neg.kind,
        neg_scale: cfg.neg.scale,
        n: cfg.n,
        mu_diff: 0.0,
        outlier_fraction: None,
        outlier_mean: None,
        snr_db: None,
    }
}

fn require(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("scenario needs a non-empty `{name}` grid")));
    }
    Ok(())
}

/// Runs `trial(t)` for every trial index in parallel; each trial yields one
/// metric set per grid point. Results are gathered by trial index, so the
/// output does not depend on the thread count.
fn run_trials<F>(points: Vec<GridPoint>, trials: usize, trial: F) -> Result<Vec<PointSummary>>
where
    F: Fn(u64) -> Result<Vec<TrialMetrics>> + Sync,
{
    let per_trial: Vec<Vec<TrialMetrics>> = (0..trials as u64)
        .into_par_iter()
        .map(&trial)
        .collect::<Result<_>>()?;
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(g, point)| {
            let column: Vec<TrialMetrics> = per_trial.iter().map(|t| t[g]).collect();
            PointSummary::from_trials(point, &column)
        })
        .collect())
}

fn result(name: &str, cfg: &ScenarioConfig, points: Vec<PointSummary>) -> ScenarioResult {
    ScenarioResult {
        scenario: name.to_string(),
        seed: cfg.seed,
        n: cfg.n,
        trials: cfg.trials,
        points,
    }
}

/// Negative group from `cfg.neg`, positive group from the same law with the
/// location shifted by each `mu_diff`.
pub fn run_mean_difference_sweep(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    require(&cfg.mu_diffs, "mu_diffs")?;
    let targets: Vec<DistributionSpec> = cfg
        .mu_diffs
        .iter()
        .map(|&d| cfg.neg.shifted(d))
        .collect::<Result<_>>()?;
    let points = cfg
        .mu_diffs
        .iter()
        .map(|&mu_diff| GridPoint {
            mu_diff,
            ..base_point(cfg)
        })
        .collect();
    let summaries = run_trials(points, cfg.trials, |t| {
        targets
            .iter()
            .enumerate()
            .map(|(g, target)| {
                let mut rng = stream(cfg.seed, &[g as u64, t]);
                let neg = SampleSet::new("neg", cfg.neg.sample_n(&mut rng, cfg.n))?;
                let pos = SampleSet::new("pos", target.sample_n(&mut rng, cfg.n))?;
                TrialMetrics::evaluate(&neg, &pos, cfg.bins)
            })
            .collect()
    })?;
    Ok(result("mean_difference", cfg, summaries))
}

/// Both base groups drawn from `cfg.neg`; a fraction of the positive group
/// is replaced by `Normal(outlier_mean, outlier_scale)` draws. Within a
/// trial every grid point reuses the same base groups.
pub fn run_outlier_sweep(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    require(&cfg.outlier_fractions, "outlier_fractions")?;
    require(&cfg.outlier_means, "outlier_means")?;
    let grid: Vec<(f64, DistributionSpec)> = cfg
        .outlier_means
        .iter()
        .flat_map(|&m| {
            cfg.outlier_fractions
                .iter()
                .map(move |&f| DistributionSpec::normal(m, cfg.outlier_scale).map(|d| (f, d)))
        })
        .collect::<Result<_>>()?;
    let points = grid
        .iter()
        .map(|(f, d)| GridPoint {
            outlier_fraction: Some(*f),
            outlier_mean: Some(d.location),
            ..base_point(cfg)
        })
        .collect();
    let summaries = run_trials(points, cfg.trials, |t| {
        let neg = SampleSet::new("neg", cfg.neg.sample_n(&mut stream(cfg.seed, &[t, 0]), cfg.n))?;
        let pos = SampleSet::new("pos", cfg.neg.sample_n(&mut stream(cfg.seed, &[t, 1]), cfg.n))?;
        grid.iter()
            .enumerate()
            .map(|(g, (fraction, outlier))| {
                let injected =
                    inject_outliers(&pos, *fraction, outlier, derive_seed(cfg.seed, &[t, 2, g as u64]))?;
                TrialMetrics::evaluate(&neg, &injected, cfg.bins)
            })
            .collect()
    })?;
    Ok(result("outlier", cfg, summaries))
}

/// One base draw from `cfg.neg`; the negative group is the base, the
/// positive group is base + `mu_diff`, and each gets independent white
/// Gaussian noise at every `snr_db`.
pub fn run_noise_sweep(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    require(&cfg.mu_diffs, "mu_diffs")?;
    require(&cfg.snr_db, "snr_db")?;
    let grid: Vec<(f64, f64)> = cfg
        .mu_diffs
        .iter()
        .flat_map(|&d| cfg.snr_db.iter().map(move |&s| (d, s)))
        .collect();
    let points = grid
        .iter()
        .map(|&(mu_diff, snr)| GridPoint {
            mu_diff,
            snr_db: Some(snr),
            ..base_point(cfg)
        })
        .collect();
    let summaries = run_trials(points, cfg.trials, |t| {
        let base = SampleSet::new("neg", cfg.neg.sample_n(&mut stream(cfg.seed, &[t, 0]), cfg.n))?;
        let mut shifted: Option<(f64, SampleSet)> = None;
        grid.iter()
            .enumerate()
            .map(|(g, &(mu_diff, snr))| {
                if shifted.as_ref().is_none_or(|(d, _)| *d != mu_diff) {
                    shifted = Some((mu_diff, base.map(|v| v + mu_diff)?));
                }
                let target = &shifted.as_ref().expect("set above").1;
                let g = g as u64;
                let neg = add_awgn(&base, snr, derive_seed(cfg.seed, &[t, 1, g]))?;
                let pos = add_awgn(target, snr, derive_seed(cfg.seed, &[t, 2, g]))?;
                TrialMetrics::evaluate(&neg, &pos, cfg.bins)
            })
            .collect()
    })?;
    Ok(result("noise", cfg, summaries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_cfg(n: usize, seed: u64, trials: usize) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::new(DistributionSpec::normal(0.0, 1.0).unwrap(), n, seed);
        cfg.trials = trials;
        cfg
    }

    #[test]
    fn aggregate_of_small_set() {
        let a = Aggregate::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.mean, 2.5);
        assert_eq!(a.min, 1.0);
        assert_eq!(a.max, 4.0);
        assert_eq!(a.median, 2.5);
        assert!((a.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(Aggregate::of(&[7.0]).std, 0.0);
    }

    #[test]
    fn disjoint_mean_difference() {
        let mut cfg = normal_cfg(1000, 5, 5);
        cfg.mu_diffs = vec![0.0, 10.0];
        let r = run_mean_difference_sweep(&cfg).unwrap();
        assert_eq!(r.rows().len(), 2 * AggregateKind::ALL.len());
        let far = r.find(|p| p.mu_diff == 10.0).unwrap();
        assert_eq!(far.gssmd.min, 1.0);
        assert!((far.z_factor.mean - 0.4).abs() < 0.05);
        assert!((far.ssmd.mean - 10.0 / 2f64.sqrt()).abs() < 0.3);
        let null = r.find(|p| p.mu_diff == 0.0).unwrap();
        assert!(null.gssmd.median.abs() <= 0.05, "median {}", null.gssmd.median);
    }

    #[test]
    fn log_normal_shift_detected_by_gssmd_only() {
        let mut cfg = ScenarioConfig::new(DistributionSpec::log_normal(0.0, 0.5).unwrap(), 1000, 21);
        cfg.trials = 21;
        cfg.mu_diffs = vec![3.0];
        let p = &run_mean_difference_sweep(&cfg).unwrap().points[0];
        assert!(p.gssmd.median >= 0.95, "median gssmd {}", p.gssmd.median);
        assert!(p.ssmd.max < 3.0);
        assert!(p.z_factor.max < 0.5);
    }

    #[test]
    fn outlier_sweep_tracks_fraction() {
        let mut cfg = normal_cfg(1000, 9, 10);
        cfg.outlier_fractions = vec![0.0, 0.01, 0.05, 0.1, 0.2, 0.3];
        cfg.outlier_means = vec![30.0];
        let r = run_outlier_sweep(&cfg).unwrap();
        for p in &r.points {
            let f = p.point.outlier_fraction.unwrap();
            if f >= 0.05 {
                assert!((p.gssmd.mean - f).abs() <= 0.02, "fraction {f}: {}", p.gssmd.mean);
            } else if f == 0.0 {
                assert!(p.gssmd.mean.abs() <= 0.05);
            }
        }
        let z = |f: f64| r.find(|p| p.outlier_fraction == Some(f)).unwrap().z_factor.mean.abs();
        assert!(z(0.3) < z(0.01));
    }

    #[test]
    fn outlier_sweep_requires_grids() {
        let cfg = normal_cfg(100, 1, 1);
        assert!(run_outlier_sweep(&cfg).is_err());
        assert!(run_noise_sweep(&cfg).is_err());
        assert!(run_mean_difference_sweep(&cfg).is_err());
    }

    #[test]
    fn noise_sweep_examples() {
        let mut cfg = normal_cfg(10_000, 4, 4);
        cfg.mu_diffs = vec![0.0, 10.0];
        cfg.snr_db = vec![-10.0, 0.0, 40.0];
        let r = run_noise_sweep(&cfg).unwrap();
        let far = r.find(|p| p.mu_diff == 10.0 && p.snr_db == Some(40.0)).unwrap();
        assert!(far.gssmd.min >= 0.999);
        for p in r.points.iter().filter(|p| p.point.mu_diff == 0.0) {
            assert!(p.gssmd.mean.abs() <= 0.02, "{:?}: {}", p.point.snr_db, p.gssmd.mean);
        }
        // Lower SNR blurs the separation.
        let noisy = r.find(|p| p.mu_diff == 10.0 && p.snr_db == Some(-10.0)).unwrap();
        assert!(noisy.gssmd.mean < far.gssmd.mean);
    }

    #[test]
    fn runners_are_deterministic_across_thread_counts() {
        let mut cfg = normal_cfg(200, 77, 16);
        cfg.mu_diffs = vec![0.0, 1.0];
        cfg.snr_db = vec![0.0, 10.0];
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| (run_mean_difference_sweep(&cfg).unwrap(), run_noise_sweep(&cfg).unwrap()))
        };
        assert_eq!(run(1), run(4));
    }
}
