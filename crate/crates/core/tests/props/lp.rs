use approxconvex::defect::convexity_defect;
use approxconvex::grid::*;
use approxconvex::lp::*;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};
use proptest::prelude::*;

use super::{affine_values, check, close, function_on, lp_domain, values_on, Property};

pub const PROPS: &[(&str, Property)] = &[
    ("lp_minorant_below_and_idempotent", minorant_below_and_idempotent),
    ("lp_minorant_monotone", minorant_monotone),
    ("lp_distance_to_convex_identity", distance_identity),
    ("lp_affine_fit_shift_invariant", affine_fit_shift),
    ("lp_solver_deterministic", solver_deterministic),
    ("lp_solution_feasible_and_exact_agrees", solution_feasible),
];

const TOL: f64 = 1e-9;

fn minorant_below_and_idempotent() -> Result<(), String> {
    check(301, function_on(lp_domain()), |sf| {
        let co = convex_minorant(&sf).unwrap();
        for (c, f) in co.values.iter().zip(&sf.values) {
            prop_assert!(*c <= f + TOL);
        }
        let co2 = convex_minorant(&co).unwrap();
        prop_assert!(co.max_abs_diff(&co2) <= TOL);
        Ok(())
    })
}

fn minorant_monotone() -> Result<(), String> {
    let strat = lp_domain().prop_flat_map(|d| (values_on(d.clone(), -1.0f64..1.0), values_on(d, 0.0f64..1.0)));
    check(302, strat, |(f, bump)| {
        let h = f.map(|i, v| v + bump.values[i]).unwrap();
        let (cf, ch) = (convex_minorant(&f).unwrap(), convex_minorant(&h).unwrap());
        for (a, b) in cf.values.iter().zip(&ch.values) {
            prop_assert!(*a <= b + TOL);
        }
        Ok(())
    })
}

fn distance_identity() -> Result<(), String> {
    check(303, function_on(lp_domain()), |sf| {
        let cd = distance_to_convex(&sf).unwrap();
        let gap = sf.values.iter().zip(&cd.minorant.values).map(|(f, c)| f - c).fold(0.0, f64::max);
        prop_assert_eq!(cd.distance, gap / 2.0);
        prop_assert!(close(sf.max_abs_diff(&cd.nearest), cd.distance, 1e-12));
        let j = sf.domain.denom_power() as u8 + 1;
        let tr = enumerate_convex_triples(&sf.domain, j).unwrap();
        prop_assert!(convexity_defect(&cd.nearest, &tr).unwrap().value <= 1e-7);
        Ok(())
    })
}

fn affine_fit_shift() -> Result<(), String> {
    let strat = function_on(lp_domain()).prop_flat_map(|sf| {
        let d = sf.domain.dim();
        (Just(sf), proptest::collection::vec(-3.0f64..3.0, d + 1))
    });
    check(304, strat, |(sf, a)| {
        let av = affine_values(&sf.domain, &a);
        let shifted = sf.map(|i, v| v + av[i]).unwrap();
        let (p, q) = (best_affine_fit(&sf).unwrap(), best_affine_fit(&shifted).unwrap());
        prop_assert!(close(p.deviation, q.deviation, 1e-9), "{} vs {}", p.deviation, q.deviation);
        // the returned fit attains its stated deviation
        let dom = &sf.domain;
        let attained = (0..dom.len()).map(|i| (shifted.values[i] - q.eval(&dom.coords(i))).abs()).fold(0.0, f64::max);
        prop_assert!(close(attained, q.deviation, 1e-9));
        Ok(())
    })
}

/// Random bounded LPs: `max c·x` s.t. `A x ≤ b`, `0 ≤ x ≤ u` with `b ≥ 0`, so 0 is feasible.
fn random_lp() -> impl Strategy<Value = (Vec<i32>, Vec<Vec<i32>>, Vec<i32>, Vec<(Relation, i32)>)> {
    (1usize..=4, 0usize..=4).prop_flat_map(|(n, extra)| {
        (
            proptest::collection::vec(-5i32..=5, n),
            proptest::collection::vec(proptest::collection::vec(-4i32..=4, n), 1..=4),
            proptest::collection::vec(1i32..=6, n),
            proptest::collection::vec((prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)], -3i32..=3), extra),
        )
    })
}

fn build<T: LpScalar>(
    (c, a, u, _): &(Vec<i32>, Vec<Vec<i32>>, Vec<i32>, Vec<(Relation, i32)>),
    conv: impl Fn(i32) -> T,
    with_extra: bool,
    extra: &[(Relation, i32)],
) -> LinearProgram<T> {
    let n = c.len();
    let mut lp = LinearProgram::new(Sense::Max, c.iter().map(|&v| conv(v)).collect());
    for (r, row) in a.iter().enumerate() {
        lp.add_constraint(row.iter().map(|&v| conv(v)).collect(), Relation::Le, conv(2 + r as i32));
    }
    if with_extra {
        // x₀ relation rhs: may be infeasible, which both scalar types must agree on
        for (rel, rhs) in extra {
            let mut row = vec![conv(0); n];
            row[0] = conv(1);
            lp.add_constraint(row, *rel, conv(*rhs));
        }
    }
    for (i, &ub) in u.iter().enumerate() {
        lp.set_bounds(i, Some(conv(0)), Some(conv(ub)));
    }
    lp
}

fn solver_deterministic() -> Result<(), String> {
    check(305, random_lp(), |input| {
        let lp = build(&input, |v| v as f64, true, &input.3);
        let (s1, s2) = (solve_lp(&lp).unwrap(), solve_lp(&lp).unwrap());
        prop_assert_eq!(s1.status, s2.status);
        prop_assert_eq!(
            s1.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            s2.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(s1.iterations, s2.iterations);
        Ok(())
    })
}

fn solution_feasible() -> Result<(), String> {
    check(306, random_lp(), |input| {
        let lp = build(&input, |v| v as f64, true, &input.3);
        let exact = build(&input, |v| BigRational::from_i32(v).unwrap(), true, &input.3);
        let (s, e) = (solve_lp(&lp).unwrap(), solve_lp(&exact).unwrap());
        prop_assert_eq!(s.status, e.status);
        if s.status == LpStatus::Optimal {
            let x = &s.values;
            for con in &lp.constraints {
                let lhs: f64 = con.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
                let ok = match con.relation {
                    Relation::Le => lhs <= con.rhs + FEASIBILITY_TOL,
                    Relation::Ge => lhs >= con.rhs - FEASIBILITY_TOL,
                    Relation::Eq => (lhs - con.rhs).abs() <= FEASIBILITY_TOL,
                };
                prop_assert!(ok, "{:?} at {:?}", con, x);
            }
            let dot: f64 = lp.objective.iter().zip(x).map(|(a, b)| a * b).sum();
            let obj = s.objective_value.unwrap();
            prop_assert!(close(dot, obj, 1e-9));
            let exact_obj = ToPrimitive::to_f64(&e.objective_value.unwrap()).unwrap();
            prop_assert!(close(obj, exact_obj, 1e-9), "{} vs exact {}", obj, exact_obj);
        }
        Ok(())
    })
}
