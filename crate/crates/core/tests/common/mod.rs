//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use assayqc_core::{bin_count, SampleSet};
use proptest::prelude::*;

pub fn normal_pdf(x: f64, mu: f64) -> f64 {
    (-(x - mu) * (x - mu) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + i as f64 * h)
        })
        .sum();
    (f(a) + inner + f(b)) * h / 3.0
}

/// ∫ min(φ(x), φ(x − d)) dx, split at the crossing d/2 so each piece is
/// smooth.
pub fn normal_overlap_oracle(d: f64) -> f64 {
    let f = |x: f64| normal_pdf(x, 0.0).min(normal_pdf(x, d));
    simpson(f, -15.0, d / 2.0, 20_000) + simpson(f, d / 2.0, d + 15.0, 20_000)
}

pub fn set(v: &[f64]) -> SampleSet {
    SampleSet::new("t", v.to_vec()).unwrap()
}

pub fn group(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, len)
}

/// Two groups with a random offset between them.
pub fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (group(2..120), group(2..120), -60.0f64..60.0)
        .prop_map(|(n, p, shift)| (n, p.into_iter().map(|v| v + shift).collect()))
}

/// True when some interior value sits within `eps` (in bin units) of an
/// interior bin edge, where rounding could move it across the edge.
pub fn near_edge(neg: &[f64], pos: &[f64], eps: f64) -> bool {
    let all: Vec<f64> = neg.iter().chain(pos).copied().collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return false;
    }
    let k = bin_count(all.len()) as f64;
    all.iter().any(|&x| {
        if x == lo || x == hi {
            return false;
        }
        let p = (x - lo) / (hi - lo) * k;
        (p - p.round()).abs() < eps
    })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
