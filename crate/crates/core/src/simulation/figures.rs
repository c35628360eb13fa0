//! Named presets for the six simulation figures and their tidy
//! (long-format) output tables.
//!
//! Every figure resolves to a [`FigureSettings`] (preset defaults merged with
//! user overrides) and runs deterministically from one master seed. Output is
//! one [`Panel`] per figure panel; each row holds a single
//! (grid point, metric, aggregate, value) tuple.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    add_awgn, calibrate_null, run_mean_difference_sweep, run_noise_sweep, run_outlier_sweep,
    run_subsampled_estimate, Aggregate, AggregateKind, DistributionKind, DistributionSpec,
    NullCalibrationTable, ScenarioConfig, ScenarioResult,
};
use crate::error::{Error, Result};
use crate::metrics::{self, SampleSet};
use crate::overlap;
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig1,
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    /// Preset parameters for this figure.
    pub fn defaults(self) -> FigureSettings {
        let mu_grid = vec![0.0, 1.0, 3.0, 5.0, 10.0, 20.0, 30.0];
        let snr: Vec<f64> = (-4..=8).map(|i| f64::from(i) * 5.0).collect();
        let base = FigureSettings {
            n: 1000,
            sizes: Vec::new(),
            trials: 20,
            mu_diffs: mu_grid.clone(),
            scales: vec![1.0],
            shape: 0.5,
            outlier_fractions: Vec::new(),
            outlier_means: Vec::new(),
            snr_db: Vec::new(),
            subsample_size: 10,
            repeats: 10,
            bins: None,
        };
        match self {
            Figure::Fig1 => FigureSettings {
                scales: vec![1.0, 3.0, 5.0],
                ..base
            },
            Figure::Fig2 => FigureSettings {
                mu_diffs: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
                ..base
            },
            Figure::Fig3 => FigureSettings {
                outlier_fractions: (0..=30).map(|i| f64::from(i) / 100.0).collect(),
                outlier_means: vec![1.0, 3.0, 5.0, 10.0, 20.0, 30.0],
                ..base
            },
            Figure::Fig4 => FigureSettings {
                n: 1_000_000,
                sizes: vec![1000, 10_000, 100_000],
                trials: 1,
                snr_db: snr,
                ..base
            },
            Figure::Fig5 => FigureSettings {
                n: 100,
                sizes: vec![10, 20, 50, 100],
                snr_db: snr,
                ..base
            },
            Figure::Fig6 => FigureSettings {
                sizes: vec![3, 10, 30, 100, 300, 1000, 10_000, 100_000, 1_000_000],
                trials: 10_000,
                ..base
            },
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Fully resolved parameters of a figure run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSettings {
    /// Per-group sample size of the main panels.
    pub n: usize,
    /// Sample-size grid (fig4/fig5 panel C, fig6).
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub mu_diffs: Vec<f64>,
    /// Normal scales swept in fig1, one panel each.
    pub scales: Vec<f64>,
    /// Log-scale shape for fig2.
    pub shape: f64,
    pub outlier_fractions: Vec<f64>,
    pub outlier_means: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub subsample_size: usize,
    pub repeats: usize,
    pub bins: Option<usize>,
}

/// Optional per-field overrides, read from a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureOverrides {
    pub n: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub mu_diffs: Option<Vec<f64>>,
    pub scales: Option<Vec<f64>>,
    pub shape: Option<f64>,
    pub outlier_fractions: Option<Vec<f64>>,
    pub outlier_means: Option<Vec<f64>>,
    pub snr_db: Option<Vec<f64>>,
    pub subsample_size: Option<usize>,
    pub repeats: Option<usize>,
    pub bins: Option<usize>,
}

impl FigureOverrides {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("figure config: {e}")))
    }

    pub fn apply(&self, mut s: FigureSettings) -> FigureSettings {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { s.$field = v.clone(); })*
            };
        }
        take!(
            n,
            sizes,
            trials,
            mu_diffs,
            scales,
            shape,
            outlier_fractions,
            outlier_means,
            snr_db,
            subsample_size,
            repeats
        );
        if self.bins.is_some() {
            s.bins = self.bins;
        }
        s
    }
}

/// Column names of the tidy CSV output.
pub const TIDY_COLUMNS: [&str; 12] = [
    "scenario",
    "panel",
    "dist",
    "neg_scale",
    "n",
    "mu_diff",
    "outlier_fraction",
    "outlier_mean",
    "snr_db",
    "metric",
    "aggregate",
    "value",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TidyRow {
    pub scenario: String,
    pub panel: String,
    pub dist: DistributionKind,
    pub neg_scale: f64,
    pub n: usize,
    pub mu_diff: Option<f64>,
    pub outlier_fraction: Option<f64>,
    pub outlier_mean: Option<f64>,
    pub snr_db: Option<f64>,
    pub metric: String,
    pub aggregate: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub name: String,
    pub rows: Vec<TidyRow>,
}

impl Panel {
    /// Value at the first row matching all given criteria.
    pub fn value(&self, metric: &str, aggregate: &str, pred: impl Fn(&TidyRow) -> bool) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.aggregate == aggregate && pred(r))
            .map(|r| r.value)
    }
}

fn scenario_rows(fig: Figure, panel: &str, result: &ScenarioResult) -> Vec<TidyRow> {
    let mut rows = Vec::new();
    for p in &result.points {
        let metrics: [(&str, &Aggregate); 4] = [
            ("z_factor", &p.z_factor),
            ("ssmd", &p.ssmd),
            ("gssmd", &p.gssmd),
            ("ovl", &p.ovl),
        ];
        for (metric, agg) in metrics {
            for kind in AggregateKind::ALL {
                rows.push(TidyRow {
                    scenario: fig.name().into(),
                    panel: panel.into(),
                    dist: p.point.dist,
                    neg_scale: p.point.neg_scale,
                    n: p.point.n,
                    mu_diff: Some(p.point.mu_diff),
                    outlier_fraction: p.point.outlier_fraction,
                    outlier_mean: p.point.outlier_mean,
                    snr_db: p.point.snr_db,
                    metric: metric.into(),
                    aggregate: kind.name().into(),
                    value: agg.get(kind),
                });
            }
        }
    }
    rows
}

/// Per-curve min-max scaling of the trial means of SSMD and GSSMD across
/// the SNR grid; one curve per (n, mu_diff, metric).
fn scaled_rows(source: &[TidyRow], panel: &str) -> Vec<TidyRow> {
    let mut out = Vec::new();
    for metric in ["ssmd", "gssmd"] {
        let curve_rows: Vec<&TidyRow> = source
            .iter()
            .filter(|r| r.metric == metric && r.aggregate == "mean")
            .collect();
        let mut keys: Vec<(usize, f64)> = Vec::new();
        for r in &curve_rows {
            let key = (r.n, r.mu_diff.unwrap_or(0.0));
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        for key in keys {
            let curve: Vec<&&TidyRow> = curve_rows
                .iter()
                .filter(|r| (r.n, r.mu_diff.unwrap_or(0.0)) == key)
                .collect();
            let lo = curve.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
            let hi = curve.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
            for r in curve {
                let value = if hi > lo { (r.value - lo) / (hi - lo) } else { 0.0 };
                out.push(TidyRow {
                    panel: panel.into(),
                    aggregate: "scaled_mean".into(),
                    value,
                    ..(*r).clone()
                });
            }
        }
    }
    out
}

fn calibration_rows(fig: Figure, panel: &str, table: &NullCalibrationTable) -> Vec<TidyRow> {
    let mut rows = Vec::new();
    for r in &table.rows {
        let stats = [
            ("abs_gssmd", "mean", r.mean),
            ("abs_gssmd", "variance", r.variance),
            ("abs_gssmd", "min", r.min),
            ("abs_gssmd", "max", r.max),
            ("abs_gssmd", "p95", r.p95),
            ("abs_gssmd", "p99", r.p99),
            ("abs_gssmd", "p999", r.p999),
            ("gssmd", "mean", r.signed_mean),
            ("gssmd", "std_error", r.signed_std_error),
        ];
        for (metric, aggregate, value) in stats {
            rows.push(TidyRow {
                scenario: fig.name().into(),
                panel: panel.into(),
                dist: table.dist.kind,
                neg_scale: table.dist.scale,
                n: r.n,
                mu_diff: None,
                outlier_fraction: None,
                outlier_mean: None,
                snr_db: None,
                metric: metric.into(),
                aggregate: aggregate.into(),
                value,
            });
        }
    }
    rows
}

fn scenario_config(neg: DistributionSpec, n: usize, seed: u64, s: &FigureSettings) -> ScenarioConfig {
    ScenarioConfig {
        mu_diffs: s.mu_diffs.clone(),
        trials: s.trials,
        outlier_fractions: s.outlier_fractions.clone(),
        outlier_means: s.outlier_means.clone(),
        snr_db: s.snr_db.clone(),
        bins: s.bins,
        ..ScenarioConfig::new(neg, n, seed)
    }
}

fn panel_label(i: usize) -> String {
    char::from(b'A' + i as u8).to_string()
}

/// Subsampled estimates on noisy 100-sample groups, with the full-group
/// estimate alongside for comparison.
fn subsampling_rows(fig: Figure, panel: &str, s: &FigureSettings, seed: u64) -> Result<Vec<TidyRow>> {
    let neg_dist = DistributionSpec::normal(0.0, 1.0)?;
    let grid: Vec<(f64, f64)> = s
        .mu_diffs
        .iter()
        .flat_map(|&d| s.snr_db.iter().map(move |&snr| (d, snr)))
        .collect();
    let per_trial: Vec<Vec<[f64; 4]>> = (0..s.trials as u64)
        .into_par_iter()
        .map(|t| {
            let base = SampleSet::new("neg", neg_dist.sample_n(&mut stream(seed, &[t, 0]), s.n))?;
            grid.iter()
                .enumerate()
                .map(|(g, &(mu_diff, snr))| {
                    let g = g as u64;
                    let neg = add_awgn(&base, snr, derive_seed(seed, &[t, 1, g]))?;
                    let pos = add_awgn(&base.map(|v| v + mu_diff)?, snr, derive_seed(seed, &[t, 2, g]))?;
                    let sub = run_subsampled_estimate(
                        &neg,
                        &pos,
                        s.subsample_size,
                        s.repeats,
                        derive_seed(seed, &[t, 3, g]),
                        s.bins,
                    )?;
                    let full_g = overlap::gssmd(&neg, &pos, s.bins)?.gssmd;
                    let full_s = metrics::ssmd(&pos.summarize(), &neg.summarize())?;
                    Ok([sub.mean_gssmd, sub.mean_ssmd, full_g, full_s])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let names = ["gssmd", "ssmd", "gssmd_full", "ssmd_full"];
    let mut rows = Vec::new();
    for (g, &(mu_diff, snr)) in grid.iter().enumerate() {
        for (m, metric) in names.iter().enumerate() {
            let values: Vec<f64> = per_trial.iter().map(|t| t[g][m]).collect();
            let agg = Aggregate::of(&values);
            for kind in AggregateKind::ALL {
                rows.push(TidyRow {
                    scenario: fig.name().into(),
                    panel: panel.into(),
                    dist: DistributionKind::Normal,
                    neg_scale: 1.0,
                    n: s.n,
                    mu_diff: Some(mu_diff),
                    outlier_fraction: None,
                    outlier_mean: None,
                    snr_db: Some(snr),
                    metric: (*metric).into(),
                    aggregate: kind.name().into(),
                    value: agg.get(kind),
                });
            }
        }
    }
    Ok(rows)
}

/// Runs every panel of `fig`. Each panel draws from its own stream derived
/// from `seed`.
pub fn run_figure(fig: Figure, s: &FigureSettings, seed: u64) -> Result<Vec<Panel>> {
    let unit_normal = DistributionSpec::normal(0.0, 1.0)?;
    let panel = |name: String, rows: Vec<TidyRow>| Panel { name, rows };
    let panels = match fig {
        Figure::Fig1 => s
            .scales
            .iter()
            .enumerate()
            .map(|(i, &scale)| {
                let cfg = scenario_config(
                    DistributionSpec::normal(0.0, scale)?,
                    s.n,
                    derive_seed(seed, &[i as u64]),
                    s,
                );
                let name = panel_label(i);
                Ok(panel(name.clone(), scenario_rows(fig, &name, &run_mean_difference_sweep(&cfg)?)))
            })
            .collect::<Result<Vec<_>>>()?,
        Figure::Fig2 => {
            let cfg = scenario_config(DistributionSpec::log_normal(0.0, s.shape)?, s.n, seed, s);
            vec![panel("A".into(), scenario_rows(fig, "A", &run_mean_difference_sweep(&cfg)?))]
        }
        Figure::Fig3 => {
            let cfg = scenario_config(unit_normal, s.n, seed, s);
            vec![panel("A".into(), scenario_rows(fig, "A", &run_outlier_sweep(&cfg)?))]
        }
        Figure::Fig4 | Figure::Fig5 => {
            let main_cfg = scenario_config(unit_normal, s.n, derive_seed(seed, &[0]), s);
            let a = scenario_rows(fig, "A", &run_noise_sweep(&main_cfg)?);
            let b = scaled_rows(&a, "B");
            let mut c = Vec::new();
            for &n in &s.sizes {
                let cfg = scenario_config(unit_normal, n, derive_seed(seed, &[1, n as u64]), s);
                c.extend(scenario_rows(fig, "C", &run_noise_sweep(&cfg)?));
            }
            let mut panels = vec![panel("A".into(), a), panel("B".into(), b), panel("C".into(), c)];
            if fig == Figure::Fig5 {
                let d = subsampling_rows(fig, "D", s, derive_seed(seed, &[2]))?;
                panels.push(panel("D".into(), d));
            }
            panels
        }
        Figure::Fig6 => {
            let dists = [
                ("normal", unit_normal),
                ("lognormal", DistributionSpec::log_normal(0.0, 1.0)?),
            ];
            dists
                .iter()
                .enumerate()
                .map(|(i, (name, dist))| {
                    let table = calibrate_null(&s.sizes, s.trials, dist, derive_seed(seed, &[i as u64]), s.bins)?;
                    Ok(panel((*name).into(), calibration_rows(fig, name, &table)))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(fig: Figure) -> FigureSettings {
        FigureOverrides {
            n: Some(200),
            sizes: Some(vec![20, 50]),
            trials: Some(if fig == Figure::Fig6 { 100 } else { 3 }),
            snr_db: Some(vec![0.0, 20.0]),
            mu_diffs: Some(vec![0.0, 3.0]),
            outlier_fractions: Some(vec![0.0, 0.1]),
            outlier_means: Some(vec![30.0]),
            ..Default::default()
        }
        .apply(fig.defaults())
    }

    #[test]
    fn parse_figure_names() {
        assert_eq!("fig3".parse::<Figure>().unwrap(), Figure::Fig3);
        assert_eq!("FIG6".parse::<Figure>().unwrap(), Figure::Fig6);
        assert_eq!("fig7".parse::<Figure>(), Err(Error::UnknownScenario("fig7".into())));
    }

    #[test]
    fn fig1_defaults_cover_mean_grid() {
        let d = Figure::Fig1.defaults();
        assert_eq!(d.scales, vec![1.0, 3.0, 5.0]);
        assert_eq!(d.mu_diffs, vec![0.0, 1.0, 3.0, 5.0, 10.0, 20.0, 30.0]);
        assert_eq!(d.n, 1000);
        let f3 = Figure::Fig3.defaults();
        assert_eq!(f3.outlier_fractions.len(), 31);
        assert_eq!(f3.outlier_fractions[30], 0.3);
        assert_eq!(Figure::Fig6.defaults().trials, 10_000);
    }

    #[test]
    fn overrides_replace_only_given_fields() {
        let o = FigureOverrides::from_toml_str("trials = 4\nbins = 9").unwrap();
        let s = o.apply(Figure::Fig1.defaults());
        assert_eq!(s.trials, 4);
        assert_eq!(s.bins, Some(9));
        assert_eq!(s.scales, vec![1.0, 3.0, 5.0]);
        assert!(FigureOverrides::from_toml_str("nonsense = 1").is_err());
    }

    #[test]
    fn every_figure_runs_small_and_is_deterministic() {
        for fig in Figure::ALL {
            let s = small(fig);
            let a = run_figure(fig, &s, 11).unwrap();
            assert!(!a.is_empty(), "{fig}");
            assert!(a.iter().all(|p| !p.rows.is_empty()), "{fig}");
            assert_eq!(a, run_figure(fig, &s, 11).unwrap(), "{fig}");
        }
    }

    #[test]
    fn scaled_panel_is_unit_range() {
        let s = small(Figure::Fig4);
        let panels = run_figure(Figure::Fig4, &s, 2).unwrap();
        let b = panels.iter().find(|p| p.name == "B").unwrap();
        assert!(b.rows.iter().all(|r| (0.0..=1.0).contains(&r.value)));
        assert!(b.rows.iter().any(|r| r.value == 1.0));
    }
}
