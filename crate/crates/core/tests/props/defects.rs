use approxconvex::defect::*;
use approxconvex::grid::*;
use approxconvex::lp::convex_minorant;
use proptest::prelude::*;

use super::{affine_values, check, close, dyadic_value, function_on, lp_domain, small_domain, values_on, Property};

pub const PROPS: &[(&str, Property)] = &[
    ("defect_affine_invariance", affine_invariance),
    ("defect_affine_invariance_dyadic_exact", affine_invariance_dyadic),
    ("defect_positive_homogeneity", positive_homogeneity),
    ("defect_monotone_in_test_set", monotone_in_test_set),
    ("defect_jensen_below_affinity", jensen_below_affinity),
    ("defect_zero_on_convex_minorant", zero_on_minorant),
    ("defect_witness_reevaluates", witness_reevaluates),
];

fn all_kinds(sf: &SampledFunction, tr: &ConvexTriples, mp: &MidpointPairs) -> [f64; 3] {
    [
        convexity_defect(sf, tr).unwrap().value,
        affinity_defect(sf, tr).unwrap().value,
        jensen_defect(sf, mp).unwrap().value,
    ]
}

fn with_affine() -> impl Strategy<Value = (SampledFunction, Vec<f64>, u8)> {
    function_on(small_domain()).prop_flat_map(|sf| {
        let d = sf.domain.dim();
        (Just(sf), proptest::collection::vec(-4.0f64..4.0, d + 1), 0u8..=3)
    })
}

fn affine_invariance() -> Result<(), String> {
    check(201, with_affine(), |(sf, a, j)| {
        let dom = sf.domain.clone();
        let tr = enumerate_convex_triples(&dom, j).unwrap();
        let mp = enumerate_midpoint_pairs(&dom).unwrap();
        let av = affine_values(&dom, &a);
        let shifted = sf.map(|i, v| v + av[i]).unwrap();
        let scale = sf.values.iter().chain(&av).fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in all_kinds(&sf, &tr, &mp).iter().zip(all_kinds(&shifted, &tr, &mp)) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + scale) * 4.0, "{} vs {}", p, q);
        }
        Ok(())
    })
}

/// With dyadic values and dyadic affine coefficients every operation is exact.
fn affine_invariance_dyadic() -> Result<(), String> {
    let strat = small_domain().prop_flat_map(|dom| {
        let d = dom.dim();
        (values_on(dom, dyadic_value()), proptest::collection::vec(dyadic_value(), d + 1), 0u8..=3)
    });
    check(202, strat, |(sf, a, j)| {
        let dom = sf.domain.clone();
        let tr = enumerate_convex_triples(&dom, j).unwrap();
        let mp = enumerate_midpoint_pairs(&dom).unwrap();
        let av = affine_values(&dom, &a);
        let shifted = sf.map(|i, v| v + av[i]).unwrap();
        prop_assert_eq!(all_kinds(&sf, &tr, &mp), all_kinds(&shifted, &tr, &mp));
        Ok(())
    })
}

fn positive_homogeneity() -> Result<(), String> {
    let lambda = prop_oneof![Just(0.0), 0.0f64..10.0, (-6i32..6).prop_map(|e| (e as f64).exp2())];
    check(203, (function_on(small_domain()), lambda, 0u8..=3), |(sf, l, j)| {
        let dom = sf.domain.clone();
        let tr = enumerate_convex_triples(&dom, j).unwrap();
        let mp = enumerate_midpoint_pairs(&dom).unwrap();
        let scaled = sf.map(|_, v| l * v).unwrap();
        for (p, q) in all_kinds(&sf, &tr, &mp).iter().zip(all_kinds(&scaled, &tr, &mp)) {
            prop_assert!(close(l * p, q, 1e-12), "{} * {} vs {}", l, p, q);
            if l.log2().fract() == 0.0 {
                prop_assert_eq!(l * p, q);
            }
        }
        Ok(())
    })
}

fn monotone_in_test_set() -> Result<(), String> {
    let strat = function_on(small_domain()).prop_flat_map(|sf| (Just(sf), 0u8..=2, any::<u64>()));
    check(204, strat, |(sf, j, mask_seed)| {
        let dom = sf.domain.clone();
        let full = enumerate_convex_triples(&dom, j).unwrap();
        let finer = enumerate_convex_triples(&dom, j + 1).unwrap();
        let sub = ConvexTriples {
            items: full
                .items
                .iter()
                .enumerate()
                .filter(|(i, _)| (mask_seed.rotate_left(*i as u32 % 64) & 1) == 1)
                .map(|(_, t)| *t)
                .collect(),
            ..full.clone()
        };
        for f in [convexity_defect, affinity_defect] {
            let (s, a, b) = (f(&sf, &sub).unwrap().value, f(&sf, &full).unwrap().value, f(&sf, &finer).unwrap().value);
            prop_assert!(s <= a && a <= b, "{} {} {}", s, a, b);
        }
        Ok(())
    })
}

fn jensen_below_affinity() -> Result<(), String> {
    check(205, (function_on(small_domain()), 1u8..=3), |(sf, j)| {
        let tr = enumerate_convex_triples(&sf.domain, j).unwrap();
        let mids = tr.midpoint_subset();
        prop_assert!(jensen_defect(&sf, &mids).unwrap().value <= affinity_defect(&sf, &tr).unwrap().value);
        Ok(())
    })
}

fn zero_on_minorant() -> Result<(), String> {
    check(206, function_on(lp_domain()), |sf| {
        let co = convex_minorant(&sf).unwrap();
        let j = sf.domain.denom_power() as u8 + 1;
        let tr = enumerate_convex_triples(&sf.domain, j).unwrap();
        let d = convexity_defect(&co, &tr).unwrap().value;
        prop_assert!(d <= 1e-9, "defect of co f = {}", d);
        Ok(())
    })
}

fn witness_reevaluates() -> Result<(), String> {
    check(207, (function_on(small_domain()), 0u8..=3), |(sf, j)| {
        let tr = enumerate_convex_triples(&sf.domain, j).unwrap();
        let mp = enumerate_midpoint_pairs(&sf.domain).unwrap();
        for rep in [
            convexity_defect(&sf, &tr).unwrap(),
            affinity_defect(&sf, &tr).unwrap(),
            jensen_defect(&sf, &mp).unwrap(),
        ] {
            match rep.reevaluate(&sf) {
                Some(v) => prop_assert_eq!(v.max(0.0), rep.value),
                None => prop_assert_eq!(rep.value, 0.0),
            }
        }
        Ok(())
    })
}
