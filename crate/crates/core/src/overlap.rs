//! Histogram-based overlap between two groups: OVL, GCNR and the signed
//! GSSMD.
//!
//! Both groups are binned on one set of equal-width edges spanning the
//! pooled range. Bins are left-closed and right-open except the last, which
//! is closed on both sides. Each group's counts are normalized to unit mass,
//! so the overlap is the sum over bins of the smaller of the two masses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SampleSet;

/// Bin count `ceil(1 + log2(n))`, at least 1.
pub fn bin_count(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    // ceil(log2(n)) for n >= 2 is the bit length of n - 1.
    1 + (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// Two probability-mass histograms over shared equal-width edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPair {
    pub edges: Vec<f64>,
    pub mass_neg: Vec<f64>,
    pub mass_pos: Vec<f64>,
    pub counts_neg: Vec<u64>,
    pub counts_pos: Vec<u64>,
    pub n_neg: usize,
    pub n_pos: usize,
}

impl HistogramPair {
    pub fn bins(&self) -> usize {
        self.mass_neg.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        0.5 * (self.edges[bin] + self.edges[bin + 1])
    }

    /// Bin holding `x`, or `None` outside the edge span.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        bin_index(&self.edges, x)
    }
}

fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    edges
}

fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    if !(lo..=hi).contains(&x) {
        return None;
    }
    let width = (hi - lo) / bins as f64;
    let mut idx = (((x - lo) / width) as usize).min(bins - 1);
    // Settle rounding in the division against the stored edges.
    while idx + 1 < bins && x >= edges[idx + 1] {
        idx += 1;
    }
    while idx > 0 && x < edges[idx] {
        idx -= 1;
    }
    Some(idx)
}

fn bin_counts(values: &[f64], edges: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len() - 1];
    for &v in values {
        // Edges span the pooled range, so every value lands in a bin.
        let b = bin_index(edges, v).expect("value inside pooled range");
        counts[b] += 1;
    }
    counts
}

fn normalize(counts: &[u64], n: usize) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Bins both groups on shared edges over their pooled range.
///
/// `bins` defaults to [`bin_count`] of the pooled size. When every pooled
/// value is identical a single bin `[v − 0.5, v + 0.5]` is used.
pub fn build_histogram_pair(
    neg: &SampleSet,
    pos: &SampleSet,
    bins: Option<usize>,
) -> Result<HistogramPair> {
    if bins == Some(0) {
        return Err(Error::InvalidParameter("bin count must be positive".into()));
    }
    let lo = neg.min().min(pos.min());
    let hi = neg.max().max(pos.max());
    let edges = if lo == hi {
        vec![lo - 0.5, hi + 0.5]
    } else {
        let k = bins.unwrap_or_else(|| bin_count(neg.len() + pos.len()));
        let edges = uniform_edges(lo, hi, k);
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "{k} bins too many for range [{lo}, {hi}]"
            )));
        }
        edges
    };
    let counts_neg = bin_counts(neg.values(), &edges);
    let counts_pos = bin_counts(pos.values(), &edges);
    Ok(HistogramPair {
        mass_neg: normalize(&counts_neg, neg.len()),
        mass_pos: normalize(&counts_pos, pos.len()),
        counts_neg,
        counts_pos,
        n_neg: neg.len(),
        n_pos: pos.len(),
        edges,
    })
}

/// Overlap coefficient: sum over bins of the smaller mass.
///
/// Evaluated exactly on the integer counts, `Σ min(c_neg·n_pos, c_pos·n_neg)
/// / (n_neg·n_pos)`. The result therefore does not depend on bin order or
/// group order, and identical groups give exactly 1.
pub fn ovl(h: &HistogramPair) -> f64 {
    let (nn, np) = (h.n_neg as u128, h.n_pos as u128);
    let shared: u128 = h
        .counts_neg
        .iter()
        .zip(&h.counts_pos)
        .map(|(&a, &b)| (a as u128 * np).min(b as u128 * nn))
        .sum();
    let total = shared as f64 / (nn * np) as f64;
    total.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    pub ovl: f64,
    pub gcnr: f64,
    pub gssmd: f64,
    pub bins_used: usize,
    /// `sgn(mean(pos) − mean(neg))`, with 0 for equal means.
    pub sign: i8,
}

impl OverlapResult {
    fn new(ovl: f64, sign: i8, bins_used: usize) -> Self {
        let gcnr = 1.0 - ovl;
        // `+ 0.0` folds a negative zero into positive zero.
        let gssmd = f64::from(sign) * gcnr + 0.0;
        Self {
            ovl,
            gcnr,
            gssmd,
            bins_used,
            sign,
        }
    }
}

pub(crate) fn sign_of(diff: f64) -> i8 {
    if diff > 0.0 {
        1
    } else if diff < 0.0 {
        -1
    } else {
        0
    }
}

/// Signed non-overlap `sgn(μ_pos − μ_neg) × (1 − OVL)`.
pub fn gssmd(neg: &SampleSet, pos: &SampleSet, bins: Option<usize>) -> Result<OverlapResult> {
    let h = build_histogram_pair(neg, pos, bins)?;
    Ok(gssmd_from_histogram(&h, pos.mean() - neg.mean()))
}

/// GSSMD from a prebuilt histogram and the mean difference `μ_pos − μ_neg`.
pub fn gssmd_from_histogram(h: &HistogramPair, mean_diff: f64) -> OverlapResult {
    OverlapResult::new(ovl(h), sign_of(mean_diff), h.bins())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::new("t", v.to_vec()).unwrap()
    }

    #[test]
    fn bin_count_rule() {
        assert_eq!(bin_count(1), 1);
        assert_eq!(bin_count(2), 2);
        assert_eq!(bin_count(3), 3);
        assert_eq!(bin_count(4), 3);
        assert_eq!(bin_count(1000), 11);
        assert_eq!(bin_count(1024), 11);
        assert_eq!(bin_count(1025), 12);
        assert_eq!(bin_count(2000), 12);
        assert_eq!(bin_count(1_000_000), 21);
    }

    #[test]
    fn bin_count_matches_float_formula() {
        for n in 2..5000usize {
            if n.is_power_of_two() {
                continue;
            }
            let expected = (1.0 + (n as f64).log2()).ceil() as usize;
            assert_eq!(bin_count(n), expected, "n = {n}");
        }
    }

    #[test]
    fn identical_inputs_have_identical_mass() {
        let a = set(&[0.0, 1.0, 2.0, 3.0]);
        let h = build_histogram_pair(&a, &a, Some(4)).unwrap();
        assert_eq!(h.mass_neg, vec![0.25; 4]);
        assert_eq!(h.mass_pos, vec![0.25; 4]);
        assert_eq!(ovl(&h), 1.0);
    }

    #[test]
    fn disjoint_inputs() {
        let h = build_histogram_pair(&set(&[0.0, 1.0]), &set(&[10.0, 11.0]), Some(2)).unwrap();
        assert_eq!(h.mass_neg, vec![1.0, 0.0]);
        assert_eq!(h.mass_pos, vec![0.0, 1.0]);
        assert_eq!(ovl(&h), 0.0);
    }

    #[test]
    fn degenerate_range_uses_one_bin() {
        let a = set(&[5.0, 5.0, 5.0]);
        let h = build_histogram_pair(&a, &a, None).unwrap();
        assert_eq!(h.bins(), 1);
        assert_eq!(h.mass_neg, vec![1.0]);
        assert_eq!(h.mass_pos, vec![1.0]);
        let r = gssmd(&a, &a, Some(7)).unwrap();
        assert_eq!(r.ovl, 1.0);
        assert_eq!(r.gssmd, 0.0);
        assert_eq!(r.bins_used, 1);
    }

    #[test]
    fn edge_ties_go_to_higher_bin_and_max_to_last() {
        // Edges 0, 1, 2, 3, 4.
        let h = build_histogram_pair(&set(&[0.0, 1.0, 2.0]), &set(&[3.0, 4.0]), Some(4)).unwrap();
        assert_eq!(h.edges, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let third = 1.0 / 3.0;
        assert_eq!(h.mass_neg, vec![third, third, third, 0.0]);
        assert_eq!(h.mass_pos, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(h.bin_of(4.0), Some(3));
        assert_eq!(h.bin_of(0.0), Some(0));
        assert_eq!(h.bin_of(4.5), None);
    }

    #[test]
    fn edges_are_equal_width_and_span_range() {
        let neg = set(&[-1.3, 0.2, 2.9, 0.7]);
        let pos = set(&[5.5, 3.1, 8.25]);
        let h = build_histogram_pair(&neg, &pos, None).unwrap();
        assert_eq!(h.bins(), bin_count(7));
        assert_eq!(h.edges[0], -1.3);
        assert_eq!(*h.edges.last().unwrap(), 8.25);
        let w = h.bin_width();
        for pair in h.edges.windows(2) {
            assert!(((pair[1] - pair[0]) - w).abs() <= 1e-12 * w.abs().max(1.0));
        }
        assert!((h.mass_neg.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((h.mass_pos.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_bins_rejected() {
        assert!(build_histogram_pair(&set(&[1.0]), &set(&[2.0]), Some(0)).is_err());
    }

    #[test]
    fn gssmd_sign_follows_mean_difference() {
        let neg = set(&[0.0, 1.0, 2.0]);
        let pos = set(&[10.0, 11.0, 12.0]);
        let up = gssmd(&neg, &pos, None).unwrap();
        assert_eq!(up.sign, 1);
        assert_eq!(up.gssmd, 1.0);
        let down = gssmd(&pos, &neg, None).unwrap();
        assert_eq!(down.sign, -1);
        assert_eq!(down.gssmd, -1.0);
        assert_eq!(up.gcnr, 1.0 - up.ovl);
    }

    #[test]
    fn equal_means_force_zero_gssmd() {
        // Variance-only effect: partial overlap but sgn(0) = 0.
        let neg = set(&[-1.0, 0.0, 1.0]);
        let pos = set(&[-10.0, 0.0, 10.0]);
        let r = gssmd(&neg, &pos, None).unwrap();
        assert_eq!(r.sign, 0);
        assert!(r.ovl < 1.0);
        assert_eq!(r.gssmd, 0.0);
    }
}
