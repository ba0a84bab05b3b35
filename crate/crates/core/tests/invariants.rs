use motzkin_core::criterion::{penalty_ratio, pinned_gap_bound, pinned_objective};
use motzkin_core::groundspace::{
    apply_interval_projector, approx_vector, ground_vector, identity_defect, overlap_defect, ApproxKind,
    ApproxStateSpec, IntervalProjector,
};
use motzkin_core::normtable::{ratios, ExactNormTable, FloatNormTable, REPRESENTABLE_FLOOR};
use motzkin_core::walks::all_classes;
use motzkin_core::Imbalance;
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn norms_are_symmetric(t in 0.05f64..1.5, k in 1usize..40) {
        let table = FloatNormTable::build_float(k, t).unwrap();
        for c in all_classes(k) {
            let (a, b) = (table.n(k, c.p, c.q), table.n(k, c.q, c.p));
            if a.max(b) >= REPRESENTABLE_FLOOR {
                prop_assert!((a - b).abs() <= 1e-13 * a.max(b));
            }
        }
    }

    #[test]
    fn exact_table_evaluates_to_float_table(t in 0.05f64..0.95, k in 1usize..18) {
        let exact = ExactNormTable::build_exact(k).unwrap().evaluate(t);
        let float = FloatNormTable::build_float(k, t).unwrap();
        for c in all_classes(k) {
            let (a, b) = (exact.n(k, c.p, c.q), float.n(k, c.p, c.q));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn ratios_are_sandwiched(t in 0.1f64..0.95, kmax in 5usize..60) {
        let table = FloatNormTable::build_float(kmax, t).unwrap();
        let r = ratios(&table);
        for k in 1..=kmax {
            for p in 0..=k.min(4) {
                prop_assert_eq!(r.pi(k, p, 0), 1.0);
                for q in 0..=(k - p).min(4) {
                    let pi = r.pi(k, p, q);
                    prop_assert!(pi >= 0.0);
                    prop_assert!(pi <= r.pi_limit(q) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn penalty_ratio_lower_bound(t in 0.01f64..0.99, n in 1usize..200) {
        let table = FloatNormTable::build_float(n, t).unwrap();
        prop_assert!(penalty_ratio(&table, n).unwrap() >= 1.0 - t);
    }

    #[test]
    fn projector_is_idempotent_and_symmetric(
        t in 0.1f64..0.95,
        a in 1usize..6,
        len in 1usize..6,
        x in prop::collection::vec(-1.0f64..1.0, 729),
        y in prop::collection::vec(-1.0f64..1.0, 729),
    ) {
        let b = (a + len).min(6);
        prop_assume!(b > a);
        let proj = IntervalProjector::new(6, a, b, t).unwrap();
        let px = apply_interval_projector(&proj, &x).unwrap();
        let ppx = apply_interval_projector(&proj, &px).unwrap();
        let py = apply_interval_projector(&proj, &y).unwrap();
        for (u, v) in px.iter().zip(&ppx) {
            prop_assert!((u - v).abs() < 1e-12);
        }
        prop_assert!((dot(&y, &px) - dot(&py, &x)).abs() < 1e-10);
    }

    #[test]
    fn pinned_bound_maximizes_objective(c1 in 0.01f64..2.0, c2 in 0.01f64..1.0, s in 0.0f64..1.0) {
        let best = pinned_gap_bound(c1, c2).unwrap();
        let eps = s * c1.min(1.0);
        prop_assert!(best.value > 0.0);
        prop_assert!(best.value >= pinned_objective(eps, c1, c2) - 1e-9);
    }

    #[test]
    fn atgs_defect_matches_identity(t in 0.2f64..0.9, half in 3usize..7) {
        let n = 2 * half;
        let spec = ApproxStateSpec {
            kind: ApproxKind::Atgs { cutoff: 1 },
            segments: vec![half, half],
            class: Imbalance::new(1, 1),
        };
        let exact = ground_vector(n, 1, 1, t).unwrap();
        let d = overlap_defect(&exact.state, &approx_vector(&spec, t).unwrap()).unwrap();
        let table = FloatNormTable::build_float(n, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&d.value));
        prop_assert!((d.value - identity_defect(&spec, &table).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn unit_weight_counts_all_strings() {
    let table = FloatNormTable::build_float(20, 1.0).unwrap();
    for k in 1..=20 {
        let total: f64 = all_classes(k).map(|c| table.n(k, c.p, c.q)).sum();
        assert_eq!(total, 3f64.powi(k as i32));
    }
}
