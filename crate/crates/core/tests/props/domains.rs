use std::collections::HashSet;

use approxconvex::grid::*;
use proptest::prelude::*;

use super::{check, small_domain, Property};

pub const PROPS: &[(&str, Property)] = &[
    ("grid_triples_exact_and_complete", triples_exact_and_complete),
    ("grid_triples_symmetric", triples_symmetric),
    ("grid_enumeration_deterministic", enumeration_deterministic),
    ("grid_point_counts", point_counts),
    ("grid_points_in_body_and_indexed", points_in_body_and_indexed),
    ("grid_sampled_function_checks", sampled_function_checks),
];

/// Integer identity `a·x + (2^j − a)·y = 2^j·combo` for every triple, and
/// nothing missed against a brute-force scan.
fn triples_exact_and_complete() -> Result<(), String> {
    check(101, (small_domain(), 0u8..=3), |(dom, j)| {
        let tr = enumerate_convex_triples(&dom, j).unwrap();
        let w = 1i64 << j;
        let mut got = HashSet::new();
        for t in &tr.items {
            prop_assert_eq!(t.t.pow, j);
            let a = t.t.num as i64;
            let (x, y, c) = (
                dom.numerators(t.x_id as usize),
                dom.numerators(t.y_id as usize),
                dom.numerators(t.combo_id as usize),
            );
            for i in 0..dom.dim() {
                prop_assert_eq!(a * x[i] + (w - a) * y[i], w * c[i]);
            }
            got.insert((t.x_id, t.y_id, t.t.num));
        }
        prop_assert_eq!(got.len(), tr.len());
        let mut expected = 0;
        for x in 0..dom.len() {
            for y in 0..dom.len() {
                for a in 0..=w {
                    let combo: Option<Vec<i64>> = (0..dom.dim())
                        .map(|i| {
                            let s = a * dom.numerators(x)[i] + (w - a) * dom.numerators(y)[i];
                            (s % w == 0).then_some(s / w)
                        })
                        .collect();
                    if combo.and_then(|c| dom.id_of(&c)).is_some() {
                        expected += 1;
                        prop_assert!(got.contains(&(x as u32, y as u32, a as u32)));
                    }
                }
            }
        }
        prop_assert_eq!(expected, tr.len());
        Ok(())
    })
}

fn triples_symmetric() -> Result<(), String> {
    check(102, (small_domain(), 0u8..=3), |(dom, j)| {
        let tr = enumerate_convex_triples(&dom, j).unwrap();
        let set: HashSet<_> = tr.items.iter().map(|t| (t.x_id, t.y_id, t.t.num, t.combo_id)).collect();
        for t in &tr.items {
            let c = t.t.complement();
            prop_assert!(set.contains(&(t.y_id, t.x_id, c.num, t.combo_id)));
        }
        let mids = tr.midpoint_subset();
        let all_mids = enumerate_midpoint_pairs(&dom).unwrap();
        if j >= 1 {
            prop_assert_eq!(mids.items, all_mids.items);
        }
        Ok(())
    })
}

fn enumeration_deterministic() -> Result<(), String> {
    let spec = (
        prop_oneof![
            Just(BodyKind::Simplex),
            Just(BodyKind::Cube),
            Just(BodyKind::BallSup),
            Just(BodyKind::BallEuclid),
            Just(BodyKind::PositiveConeSection),
        ],
        1usize..=3,
        0u32..=2,
        0u8..=2,
    );
    check(103, spec, |(body, dim, k, j)| {
        let caps = SizeCaps::default();
        let a = GridSpec::new(body, dim, k).build(&caps).unwrap();
        let b = GridSpec::new(body, dim, k).build(&caps).unwrap();
        prop_assert_eq!(a.points(), b.points());
        prop_assert_eq!(a.fingerprint(), b.fingerprint());
        prop_assert_eq!(enumerate_convex_triples(&a, j).unwrap(), enumerate_convex_triples(&b, j).unwrap());
        prop_assert_eq!(enumerate_midpoint_pairs(&a).unwrap(), enumerate_midpoint_pairs(&b).unwrap());
        let back = GridDomain::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(back.points(), a.points());
        prop_assert_eq!(back.fingerprint(), a.fingerprint());
        Ok(())
    })
}

fn point_counts() -> Result<(), String> {
    check(104, (1usize..=4, 0u32..=3), |(d, k)| {
        let n = 1u64 << k;
        let simplex = make_simplex_grid(d, k).unwrap();
        prop_assert_eq!(simplex.len() as u128, binomial(n + d as u64 - 1, d as u64 - 1).unwrap());
        if d <= 3 {
            let cube = make_cube_grid(d, k).unwrap();
            prop_assert_eq!(cube.len() as u64, (2 * n + 1).pow(d as u32));
            let pos = make_positive_section_grid(d, k).unwrap();
            prop_assert_eq!(pos.len() as u64, (n + 1).pow(d as u32));
            let ball = make_ball_grid(d, k, BallNorm::Sup).unwrap();
            prop_assert_eq!(ball.len(), cube.len());
        }
        Ok(())
    })
}

fn in_body(kind: BodyKind, p: &[i64], n: i64) -> bool {
    match kind {
        BodyKind::Simplex => p.iter().all(|&v| v >= 0) && p.iter().sum::<i64>() == n,
        BodyKind::Cube | BodyKind::BallSup => p.iter().all(|v| v.abs() <= n),
        BodyKind::BallEuclid => p.iter().map(|v| v * v).sum::<i64>() <= n * n,
        BodyKind::PositiveConeSection => p.iter().all(|&v| (0..=n).contains(&v)),
    }
}

fn points_in_body_and_indexed() -> Result<(), String> {
    check(105, small_domain(), |dom| {
        let n = dom.denominator();
        for id in 0..dom.len() {
            let p = dom.numerators(id);
            prop_assert!(in_body(dom.body_kind(), p, n));
            prop_assert_eq!(dom.id_of(p), Some(id));
            let x = dom.coords(id);
            for (a, b) in x.iter().zip(p) {
                prop_assert_eq!(*a * n as f64, *b as f64);
            }
        }
        Ok(())
    })
}

fn sampled_function_checks() -> Result<(), String> {
    check(106, (small_domain(), any::<usize>(), prop_oneof![Just(f64::NAN), Just(f64::INFINITY)]), |(dom, i, bad)| {
        let n = dom.len();
        prop_assert!(SampledFunction::new(dom.clone(), vec![0.0; n + 1]).is_err());
        let mut v = vec![0.5; n];
        v[i % n] = bad;
        prop_assert!(SampledFunction::new(dom.clone(), v).is_err());
        prop_assert!(SampledFunction::new(dom, vec![0.5; n]).is_ok());
        Ok(())
    })
}
