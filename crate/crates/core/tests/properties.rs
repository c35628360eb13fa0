//! Randomized invariants, 1000 cases per property.

use std::sync::OnceLock;

use assayqc_core::hits::{
    evaluate_threshold, fit_logistic_default, gssmd_threshold, select_hits, sigma_rule_threshold,
    ssmd_rule_threshold, Direction, HitOptions, Plate, ThresholdRule, Well, WellRole,
};
use assayqc_core::simulation::{run_mean_difference_sweep, DistributionSpec, ScenarioConfig};
use assayqc_core::{build_histogram_pair, cnr, gssmd, ovl, ssmd, z_factor};
use proptest::prelude::*;

mod common;
use common::{close, group, near_edge, pair, set};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 1000,
        ..ProptestConfig::default()
    }
}

fn plate(neg: &[f64], pos: &[f64], samples: &[f64]) -> Plate {
    let roles = [
        (WellRole::NegativeControl, neg),
        (WellRole::PositiveControl, pos),
        (WellRole::Sample, samples),
    ];
    let mut wells = Vec::new();
    for (role, values) in roles {
        for &v in values {
            let i = wells.len() as u32;
            wells.push(Well {
                row: i / 24 + 1,
                col: i % 24 + 1,
                role,
                value: Some(v),
            });
        }
    }
    Plate::new("prop", wells).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn cnr_is_abs_ssmd((neg, pos) in pair()) {
        let (sp, sn) = (set(&pos).summarize(), set(&neg).summarize());
        prop_assert_eq!(cnr(&sp, &sn).unwrap(), ssmd(&sp, &sn).unwrap().abs());
    }

    #[test]
    fn ssmd_antisymmetric_z_symmetric((a, b) in pair()) {
        let (sa, sb) = (set(&a).summarize(), set(&b).summarize());
        prop_assert_eq!(ssmd(&sa, &sb).unwrap(), -ssmd(&sb, &sa).unwrap());
        match (z_factor(&sa, &sb), z_factor(&sb, &sa)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn parametric_metrics_affine_equivariant((neg, pos) in pair(), a in 0.01f64..100.0, c in -100.0f64..100.0) {
        // x → a(x + c): the shift stays commensurate with the data scale.
        // A shift that dwarfs the spread loses digits to cancellation in the
        // mean difference, which no 1e-12 tolerance can absorb.
        let map = |v: &[f64]| set(&v.iter().map(|x| a * (x + c)).collect::<Vec<_>>()).summarize();
        let (sp, sn) = (set(&pos).summarize(), set(&neg).summarize());
        let (tp, tn) = (map(&pos), map(&neg));
        let (s0, s1) = (ssmd(&sp, &sn).unwrap(), ssmd(&tp, &tn).unwrap());
        prop_assert!(close(s0, s1, 1e-12), "ssmd {} vs {} (a={}, c={})", s0, s1, a, c);
        prop_assert!(close(cnr(&sp, &sn).unwrap(), cnr(&tp, &tn).unwrap(), 1e-12));
        // Z' divides by |Δμ|; compare only where that is not a near-total
        // cancellation of the readout magnitude.
        let scale = neg.iter().chain(&pos).fold(0.0f64, |m, x| m.max(x.abs()));
        let well_conditioned = (sp.mean - sn.mean).abs() >= 1e-3 * scale;
        if let (true, Ok(z0), Ok(z1)) = (well_conditioned, z_factor(&sp, &sn), z_factor(&tp, &tn)) {
            prop_assert!(close(z0, z1, 1e-12), "{} vs {}", z0, z1);
        }
    }

    #[test]
    fn overlap_ranges_and_identities((neg, pos) in pair(), bins in prop::option::of(1usize..40)) {
        let r = gssmd(&set(&neg), &set(&pos), bins).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.ovl));
        prop_assert!((0.0..=1.0).contains(&r.gcnr));
        prop_assert!((-1.0..=1.0).contains(&r.gssmd));
        prop_assert_eq!(r.gcnr, 1.0 - r.ovl);
        prop_assert_eq!(r.gssmd, f64::from(r.sign) * r.gcnr + 0.0);
    }

    #[test]
    fn histogram_masses_and_edges((neg, pos) in pair()) {
        let h = build_histogram_pair(&set(&neg), &set(&pos), None).unwrap();
        prop_assert!((h.mass_neg.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!((h.mass_pos.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let lo = neg.iter().chain(&pos).copied().fold(f64::INFINITY, f64::min);
        let hi = neg.iter().chain(&pos).copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(h.edges[0], lo);
        prop_assert_eq!(*h.edges.last().unwrap(), hi);
    }

    #[test]
    fn overlap_symmetric_gssmd_antisymmetric((neg, pos) in pair()) {
        let fwd = gssmd(&set(&neg), &set(&pos), None).unwrap();
        let rev = gssmd(&set(&pos), &set(&neg), None).unwrap();
        prop_assert_eq!(fwd.ovl, rev.ovl);
        prop_assert_eq!(fwd.gssmd, -rev.gssmd + 0.0);
    }

    #[test]
    fn same_multiset_fully_overlaps(v in group(1..200), seed in any::<u64>()) {
        // A shuffled copy: same multiset, different order.
        let mut w = v.clone();
        let k = w.len();
        w.rotate_left((seed as usize) % k);
        let r = gssmd(&set(&v), &set(&w), None).unwrap();
        prop_assert_eq!(r.ovl, 1.0);
        prop_assert_eq!(r.gssmd, 0.0);
    }

    #[test]
    fn gssmd_affine_invariant_off_edges((neg, pos) in pair(), a in 0.01f64..100.0, b in -1e3f64..1e3) {
        let tn: Vec<f64> = neg.iter().map(|x| a * x + b).collect();
        let tp: Vec<f64> = pos.iter().map(|x| a * x + b).collect();
        prop_assume!(!near_edge(&neg, &pos, 1e-6) && !near_edge(&tn, &tp, 1e-6));
        let diff = set(&pos).mean() - set(&neg).mean();
        prop_assume!(diff.abs() > 1e-9);
        let r0 = gssmd(&set(&neg), &set(&pos), None).unwrap();
        let r1 = gssmd(&set(&tn), &set(&tp), None).unwrap();
        prop_assert_eq!(r0.ovl.to_bits(), r1.ovl.to_bits());
        prop_assert_eq!(r0.gssmd.to_bits(), r1.gssmd.to_bits());
    }

    #[test]
    fn gssmd_mirror_antisymmetric_off_edges((neg, pos) in pair()) {
        prop_assume!(!near_edge(&neg, &pos, 1e-6));
        let mn: Vec<f64> = neg.iter().map(|x| -x).collect();
        let mp: Vec<f64> = pos.iter().map(|x| -x).collect();
        prop_assume!(!near_edge(&mn, &mp, 1e-6));
        let r0 = gssmd(&set(&neg), &set(&pos), None).unwrap();
        let r1 = gssmd(&set(&mn), &set(&mp), None).unwrap();
        prop_assert_eq!(r0.ovl, r1.ovl);
        prop_assert_eq!(r0.gssmd, -r1.gssmd + 0.0);
    }

    #[test]
    fn ovl_matches_naive_double_loop((neg, pos) in pair(), bins in prop::option::of(1usize..40)) {
        let h = build_histogram_pair(&set(&neg), &set(&pos), bins).unwrap();
        let mut naive = 0.0;
        for i in 0..h.bins() {
            for j in 0..h.bins() {
                if i == j {
                    naive += h.mass_neg[i].min(h.mass_pos[j]);
                }
            }
        }
        prop_assert!((ovl(&h) - naive).abs() <= 1e-12);
    }

    #[test]
    fn rule_thresholds_monotone_and_nested(
        neg in group(3..80),
        samples in group(1..80),
        k0 in 0.0f64..5.0,
        dk in 0.01f64..5.0,
        up in any::<bool>(),
    ) {
        let n = set(&neg);
        prop_assume!(n.summarize().std_dev > 0.0);
        let dir = if up { Direction::PositiveIsHigher } else { Direction::PositiveIsLower };
        for rule in [sigma_rule_threshold, ssmd_rule_threshold] {
            let (t0, t1) = (rule(&n, k0, dir).unwrap(), rule(&n, k0 + dk, dir).unwrap());
            prop_assert!((t1 - n.mean()).abs() > (t0 - n.mean()).abs());
            for &s in &samples {
                if dir.is_hit(s, t1) {
                    prop_assert!(dir.is_hit(s, t0));
                }
            }
        }
    }

    #[test]
    fn direction_coherent_under_negation(
        neg in group(3..60),
        pos in group(3..60),
        samples in group(1..60),
        shift in 5.0f64..80.0,
        rule_pick in 0usize..4,
    ) {
        let pos: Vec<f64> = pos.iter().map(|v| v * 0.2 + shift).collect();
        let neg: Vec<f64> = neg.iter().map(|v| v * 0.2).collect();
        let rule = [
            ThresholdRule::gssmd(0.05).unwrap(),
            ThresholdRule::sigma(3.0).unwrap(),
            ThresholdRule::ssmd(3.0).unwrap(),
            ThresholdRule::logistic(),
        ][rule_pick];
        let opts = HitOptions::default();
        let neg_of = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
        prop_assume!(!near_edge(&neg, &pos, 1e-6) && !near_edge(&neg_of(&neg), &neg_of(&pos), 1e-6));
        let a = select_hits(&plate(&neg, &pos, &samples), &rule, &opts).unwrap();
        let b = select_hits(&plate(&neg_of(&neg), &neg_of(&pos), &neg_of(&samples)), &rule, &opts).unwrap();
        prop_assume!(samples.iter().all(|s| (s - a.threshold).abs() > 1e-6 * a.threshold.abs().max(1.0)));
        prop_assert_eq!(b.direction, a.direction.flipped());
        prop_assert!(close(b.threshold, -a.threshold, 1e-9), "{} vs {}", a.threshold, b.threshold);
        prop_assert_eq!(a.hits, b.hits);
    }

    #[test]
    fn hits_lie_on_positive_side(
        (neg, pos) in pair(),
        samples in group(1..60),
        rule_pick in 0usize..3,
    ) {
        let rule = [ThresholdRule::gssmd(0.05).unwrap(), ThresholdRule::sigma(3.0).unwrap(), ThresholdRule::ssmd(3.0).unwrap()][rule_pick];
        let p = plate(&neg, &pos, &samples);
        if let Ok(r) = select_hits(&p, &rule, &HitOptions::default()) {
            for w in &p.wells {
                if w.role == WellRole::Sample && r.hits.contains(&w.address()) {
                    prop_assert!(r.direction.is_hit(w.value.unwrap(), r.threshold));
                }
            }
        }
    }

    #[test]
    fn logistic_boundary_affine((neg, pos) in pair(), a in 0.1f64..10.0, b in -100.0f64..100.0) {
        let (n, p) = (set(&neg), set(&pos));
        let m0 = fit_logistic_default(&n, &p).unwrap();
        prop_assume!(m0.boundary.is_finite() && m0.converged);
        let m1 = fit_logistic_default(&n.map(|x| a * x + b).unwrap(), &p.map(|x| a * x + b).unwrap()).unwrap();
        let expected = a * m0.boundary + b;
        prop_assert!((m1.boundary - expected).abs() <= 1e-6 * (a * m0.boundary.abs() + b.abs()).max(1.0),
            "{} vs {}", m1.boundary, expected);
    }

    #[test]
    fn accuracy_and_misclassification_sum_to_one((neg, pos) in pair(), t in -100.0f64..100.0, up in any::<bool>()) {
        let dir = if up { Direction::PositiveIsHigher } else { Direction::PositiveIsLower };
        let e = evaluate_threshold(&set(&neg), &set(&pos), t, dir);
        prop_assert!((e.accuracy + e.misclassification - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&e.type1_error));
    }

    #[test]
    fn gssmd_threshold_within_pooled_range((neg, pos) in pair(), bins in prop::option::of(1usize..40)) {
        let (n, p) = (set(&neg), set(&pos));
        prop_assume!(n.mean() != p.mean());
        let t = gssmd_threshold(&n, &p, 0.05, bins).unwrap();
        let lo = n.min().min(p.min());
        let hi = n.max().max(p.max());
        prop_assert!(t.threshold >= lo && t.threshold <= hi, "{} not in [{}, {}]", t.threshold, lo, hi);
    }
}

fn pools() -> &'static (rayon::ThreadPool, rayon::ThreadPool) {
    static POOLS: OnceLock<(rayon::ThreadPool, rayon::ThreadPool)> = OnceLock::new();
    POOLS.get_or_init(|| {
        let mk = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        (mk(1), mk(4))
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn sweep_deterministic_under_parallelism(seed in any::<u64>(), d in 0.0f64..5.0) {
        let mut cfg = ScenarioConfig::new(DistributionSpec::normal(0.0, 1.0).unwrap(), 40, seed);
        cfg.trials = 8;
        cfg.mu_diffs = vec![0.0, d];
        let (one, four) = pools();
        let a = one.install(|| run_mean_difference_sweep(&cfg)).unwrap();
        let b = four.install(|| run_mean_difference_sweep(&cfg)).unwrap();
        prop_assert_eq!(a, b);
    }
}
