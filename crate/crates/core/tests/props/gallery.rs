use std::sync::Arc;

use approxconvex::defect::{convexity_defect, quasi_additivity_constant, sparse_convexity_defect, SparseTriple};
use approxconvex::gallery::*;
use approxconvex::grid::*;
use proptest::prelude::*;

use super::{check, close, Property};

pub const PROPS: &[(&str, Property)] = &[
    ("gallery_ribe_kalton_homogeneous", ribe_kalton_homogeneous),
    ("gallery_ribe_quasi_additivity", ribe_quasi_additivity),
    ("gallery_entropy_one_convex_grids", entropy_grids),
    ("gallery_entropy_one_convex_points", entropy_points),
    ("gallery_neg_log_norm_one_convex", neg_log_norm_convex),
    ("gallery_omega_two_convex", omega_two_convex),
    ("gallery_fstar_one_convex", fstar_convex),
    ("gallery_fstar_blocks_zero_at_q", fstar_blocks_zero),
    ("gallery_sparse_vector_and_theta_invariants", sparse_and_theta),
];

/// Dyadic sparse vector with indices in `1..=max_index`.
fn sparse(max_index: usize, nonnegative: bool) -> impl Strategy<Value = SparseVector> {
    proptest::collection::vec((1..=max_index, 1u32..=1024, 0i32..=8, any::<bool>()), 1..=6).prop_map(move |es| {
        let entries = es
            .into_iter()
            .map(|(i, u, s, neg)| {
                let v = u as f64 * (-(10 + s) as f64).exp2();
                (i, if neg && !nonnegative { -v } else { v })
            })
            .collect();
        SparseVector::new(entries).unwrap()
    })
}

fn ribe_kalton_homogeneous() -> Result<(), String> {
    let strat = (sparse(12, false), -20i32..=20, 1i64..=1000, 1i64..=1000);
    check(401, strat, |(x, e, p, q)| {
        let d = (e as f64).exp2();
        for f in [ribe as fn(&SparseVector) -> f64, kalton_map] {
            prop_assert_eq!(f(&x.scale(d)), d * f(&x));
            let t = p as f64 / q as f64;
            let scale = x.norm(NormKind::L1) * 64.0;
            prop_assert!((f(&x.scale(t)) - t * f(&x)).abs() <= 1e-12 * t.max(1.0) * (1.0 + scale));
            prop_assert_eq!(f(&x.scale(-1.0)), -f(&x));
        }
        Ok(())
    })
}

fn ribe_quasi_additivity() -> Result<(), String> {
    check(402, (sparse(12, false), sparse(12, false)), |(x, y)| {
        let rep = quasi_additivity_constant(|v| Ok(ribe(v)), &[(x, y)], NormKind::L1, None).unwrap();
        prop_assert!(rep.value <= 2.0 + 1e-9, "Q = {}", rep.value);
        Ok(())
    })
}

fn entropy_grids() -> Result<(), String> {
    check(403, (2usize..=4, 0u32..=2, 0u8..=3), |(n, k, j)| {
        let dom = Arc::new(make_simplex_grid(n, k).unwrap());
        let sf = sample_function(&dom, entropy_simplex).unwrap();
        let d = convexity_defect(&sf, &enumerate_convex_triples(&dom, j).unwrap()).unwrap().value;
        prop_assert!(d <= 1.0 + 1e-9, "defect {}", d);
        Ok(())
    })
}

/// Random simplex points as normalized positive weights.
fn simplex_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], n).prop_filter_map("nonzero", |w| {
        let s: f64 = w.iter().sum();
        (s > 0.0).then(|| w.iter().map(|v| v / s).collect())
    })
}

fn entropy_points() -> Result<(), String> {
    let strat = (2usize..=16).prop_flat_map(|n| (simplex_point(n), simplex_point(n), 0.0f64..=1.0));
    check(404, strat, |(x, y, t)| {
        let c: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let gap = entropy_simplex(&c) - t * entropy_simplex(&x) - (1.0 - t) * entropy_simplex(&y);
        prop_assert!(gap <= 1.0 + 1e-9, "gap {}", gap);
        Ok(())
    })
}

fn positive_point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0], d)
        .prop_filter("nonzero", |v| v.iter().any(|&a| a > 0.0))
}

fn neg_log_norm_convex() -> Result<(), String> {
    let kinds = prop_oneof![Just(NormKind::Sup), Just(NormKind::L1), Just(NormKind::L2)];
    let strat = (1usize..=6, kinds).prop_flat_map(|(d, k)| (positive_point(d), positive_point(d), 0.0f64..=1.0, Just(k)));
    check(405, strat, |(x, y, t, kind)| {
        let c: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let f = |v: &[f64]| neg_log_norm(v, kind).unwrap();
        let gap = f(&c) - t * f(&x) - (1.0 - t) * f(&y);
        prop_assert!(gap <= 1.0 + 1e-9, "{:?} gap {}", kind, gap);
        Ok(())
    })
}

fn omega_two_convex() -> Result<(), String> {
    let t = (0u32..=1024).prop_map(|a| a as f64 / 1024.0);
    check(406, (sparse(12, true), sparse(12, true), t), |(x, y, t)| {
        let rep = sparse_convexity_defect(|v| Ok(cholewa_kominek_omega(v)? as f64), &[SparseTriple { x, y, t }], None)
            .unwrap();
        prop_assert!(rep.value <= 2.0 + 1e-9, "defect {}", rep.value);
        Ok(())
    })
}

fn positive_grid_point(d: usize, k: u32) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(0i64..=(1 << k), d)
}

fn fstar_convex() -> Result<(), String> {
    let strat = (1usize..=8, 0u32..=3, 0u32..=3).prop_flat_map(|(d, k, j)| {
        (positive_grid_point(d, k), positive_grid_point(d, k), 0u32..=(1 << j), Just(k), Just(j))
    });
    check(407, strat, |(x, y, a, k, j)| {
        let den = (1u64 << k) as f64;
        let xv = SparseVector::from_dense(&x.iter().map(|&v| v as f64 / den).collect::<Vec<_>>());
        let yv = SparseVector::from_dense(&y.iter().map(|&v| v as f64 / den).collect::<Vec<_>>());
        let t = a as f64 / (1u64 << j) as f64;
        for cfg in [FStarConfig::nested(), FStarConfig::blocks()] {
            let n_max = Some(xv.support_end().max(yv.support_end()).max(1) + 4);
            let rep = sparse_convexity_defect(
                |v| f_star(v, &cfg, n_max),
                &[SparseTriple { x: xv.clone(), y: yv.clone(), t }],
                None,
            )
            .unwrap();
            prop_assert!(rep.value <= 1.0 + 1e-9, "{:?}: {}", cfg.variant, rep.value);
        }
        Ok(())
    })
}

fn fstar_blocks_zero() -> Result<(), String> {
    check(408, (1usize..=40, any::<prop::sample::Index>()), |(n, idx)| {
        let cfg = FStarConfig::blocks();
        let FStarVariant::Blocks(layout) = &cfg.variant else { unreachable!() };
        let (lo, hi) = layout.block(n).unwrap();
        let i = lo + idx.index(hi - lo + 1);
        let q = SparseVector::constant_on((lo..=hi).filter(|&j| j != i), 1.0).unwrap();
        prop_assert_eq!(f_star(&q, &cfg, None).unwrap(), 0.0);
        Ok(())
    })
}

fn sparse_and_theta() -> Result<(), String> {
    let raw = proptest::collection::vec((1usize..=20, prop_oneof![Just(0.0), -2.0f64..2.0]), 0..10);
    // 1 - 2^-n is representable below 1 only for n ≤ 52
    check(409, (raw, 1usize..=51), |(entries, n)| {
        let v = SparseVector::new(entries.clone()).unwrap();
        let es = v.entries();
        prop_assert!(es.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(es.iter().all(|e| e.1 != 0.0 && e.0 >= 1));
        for i in 1..=20 {
            let want: f64 = entries.iter().filter(|e| e.0 == i).map(|e| e.1).sum();
            prop_assert!(close(v.get(i), want, 1e-15));
        }
        let th = ThetaRule::Dyadic;
        prop_assert!(th.theta(n) < th.theta(n + 1) && th.theta(n + 1) < 1.0 && th.theta(n) > 0.0);
        let layout = BlockLayout::Natural;
        let (a, b) = layout.block(n).unwrap();
        let (c, _) = layout.block(n + 1).unwrap();
        prop_assert_eq!(c, b + 1);
        prop_assert_eq!(b - a + 1, n);
        prop_assert_eq!(layout.block_of(a), Some(n));
        Ok(())
    })
}
