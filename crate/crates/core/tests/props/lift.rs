use std::sync::Arc;

use approxconvex::defect::{affinity_defect, jensen_defect};
use approxconvex::grid::*;
use approxconvex::homogenization::*;
use proptest::prelude::*;

use super::{check, close, Property};

pub const PROPS: &[(&str, Property)] = &[
    ("lift_homogeneous_along_rays", homogeneous_along_rays),
    ("lift_affine_error_within_two_eps", affine_error),
    ("lift_jensen_error_within_four_eps", jensen_error),
    ("lift_quasilinearity_identity", quasilinearity_identity),
    ("lift_directions_and_radii", directions_and_radii),
];

fn lift_domain() -> impl Strategy<Value = Arc<GridDomain>> {
    prop_oneof![
        (1usize..=2, 1u32..=2).prop_map(|(d, k)| make_cube_grid(d, k).unwrap()),
        (1u32..=2).prop_map(|k| make_ball_grid(2, k, BallNorm::Euclid).unwrap()),
    ]
    .prop_map(Arc::new)
}

/// Noisy linear functions with `f(0) = 0`.
fn noisy_linear() -> impl Strategy<Value = (SampledFunction, bool)> {
    (lift_domain(), 0.0f64..0.2, any::<bool>()).prop_flat_map(|(dom, amp, all)| {
        let n = dom.len();
        let d = dom.dim();
        (
            proptest::collection::vec(-2.0f64..2.0, d),
            proptest::collection::vec(-1.0f64..=1.0, n),
            Just(dom),
            Just(amp),
            Just(all),
        )
            .prop_map(|(a, noise, dom, amp, all)| {
                let vals = (0..dom.len())
                    .map(|id| {
                        let p = dom.numerators(id);
                        if p.iter().all(|&v| v == 0) {
                            return 0.0;
                        }
                        let x = dom.coords(id);
                        a.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>() + amp * noise[id]
                    })
                    .collect();
                (SampledFunction::new(dom, vals).unwrap(), all)
            })
    })
}

fn options(all: bool) -> LiftOptions {
    LiftOptions {
        directions: if all { DirectionSet::AllGridDirections } else { DirectionSet::SphereGrid },
        ..LiftOptions::default()
    }
}

fn on_ray_points(lift: &RadialLift, dom: &GridDomain) -> Vec<usize> {
    (0..dom.len()).filter(|&id| lift.eval_exact(dom.numerators(id), dom.denom_power()).is_some()).collect()
}

fn homogeneous_along_rays() -> Result<(), String> {
    let strat = (noisy_linear(), 1i64..=16, 0u32..=4, any::<bool>(), any::<prop::sample::Index>());
    check(501, strat, |((sf, all), a, b, jensen, idx)| {
        let dom = &sf.domain;
        let opts = options(all);
        let lift = if jensen { radial_jensen_lift(&sf, &opts) } else { radial_affine_lift(&sf, &opts) }.unwrap();
        let pts = on_ray_points(&lift, dom);
        let id = pts[idx.index(pts.len())];
        let v: Vec<i64> = dom.numerators(id).to_vec();
        let k = dom.denom_power();
        let base = lift.eval_exact(&v, k).unwrap();
        // t = a / 2^b, including t = q² for dyadic q
        let scaled: Vec<i64> = v.iter().map(|x| x * a).collect();
        let t = a as f64 / (1u64 << b) as f64;
        let got = lift.eval_exact(&scaled, k + b).unwrap();
        prop_assert!(close(got, t * base, 1e-14), "{} vs {}", got, t * base);
        if a == 1 {
            prop_assert_eq!(got, t * base);
        }
        let neg: Vec<i64> = v.iter().map(|x| -x).collect();
        prop_assert_eq!(lift.eval_exact(&neg, k).unwrap(), -base);
        let real = lift.eval(&dom.coords(id), OffRayPolicy::Forbid).unwrap();
        prop_assert!(close(real.value, base, 1e-12));
        prop_assert_eq!(real.angular_error, 0.0);
        Ok(())
    })
}

fn affine_error() -> Result<(), String> {
    check(502, noisy_linear(), |(sf, all)| {
        let k = sf.domain.denom_power() as u8;
        let eps = affinity_defect(&sf, &enumerate_convex_triples(&sf.domain, k + 1).unwrap()).unwrap().value;
        let lift = radial_affine_lift(&sf, &options(all)).unwrap();
        for l in &lift.lines {
            prop_assert!(l.fit_error <= eps + 1e-12, "fit {} > eps {}", l.fit_error, eps);
            prop_assert!(l.lift_error <= 2.0 * eps + 1e-12, "lift {} > 2 eps {}", l.lift_error, eps);
        }
        Ok(())
    })
}

fn jensen_error() -> Result<(), String> {
    check(503, noisy_linear(), |(sf, all)| {
        let delta = jensen_defect(&sf, &enumerate_midpoint_pairs(&sf.domain).unwrap()).unwrap().value;
        let lift = radial_jensen_lift(&sf, &options(all)).unwrap();
        prop_assert!(lift.max_lift_error() <= 4.0 * delta + 1e-9, "{} > 4 * {}", lift.max_lift_error(), delta);
        Ok(())
    })
}

fn quasilinearity_identity() -> Result<(), String> {
    let strat = (noisy_linear(), any::<bool>(), any::<prop::sample::Index>());
    check(504, strat, |((sf, all), jensen, idx)| {
        let dom = &sf.domain;
        let opts = options(all);
        let lift = if jensen { radial_jensen_lift(&sf, &opts) } else { radial_affine_lift(&sf, &opts) }.unwrap();
        let pairs = ray_pairs(&lift, dom);
        let (x, y) = pairs[idx.index(pairs.len())];
        let k = dom.denom_power();
        let (px, py) = (dom.numerators(x), dom.numerators(y));
        let s: Vec<i64> = px.iter().zip(py).map(|(a, b)| a + b).collect();
        let ev = |v: &[i64], p| lift.eval_exact(v, p).unwrap();
        let (fs, fx, fy) = (ev(&s, k), ev(px, k), ev(py, k));
        // (x + y)/2 has the same numerators over 2^(k+1)
        let fm = ev(&s, k + 1);
        let lhs = (fs - (fx + fy)).abs();
        let rhs = 2.0 * (fm - (fx + fy) / 2.0).abs();
        prop_assert_eq!(lhs, rhs);
        Ok(())
    })
}

fn directions_and_radii() -> Result<(), String> {
    check(505, (noisy_linear(), any::<bool>()), |((sf, all), jensen)| {
        let opts = options(all);
        let lift = if jensen { radial_jensen_lift(&sf, &opts) } else { radial_affine_lift(&sf, &opts) }.unwrap();
        prop_assert!(lift.r0 > 0.0 && lift.r0 <= lift.big_r0);
        let dirs: Vec<&Vec<i64>> = lift.lines.iter().map(|l| &l.direction).collect();
        for (i, u) in dirs.iter().enumerate() {
            prop_assert!(*u.iter().find(|&&v| v != 0).unwrap() > 0);
            let g = u.iter().fold(0i64, |g, &v| num_integer::gcd(g, v));
            prop_assert_eq!(g, 1);
            for w in &dirs[i + 1..] {
                // parallel primitive vectors with positive leading entries coincide
                prop_assert_ne!(*u, *w);
            }
        }
        Ok(())
    })
}
