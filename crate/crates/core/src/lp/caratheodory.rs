//! Carathéodory constraints: a grid function extends to a convex function iff
//! `g(x) ≤ Σ λᵢ g(vᵢ)` whenever `x` lies in the simplex spanned by
//! `affine_dim + 1` grid points `vᵢ` with barycentric weights `λ`.
//!
//! Used as an independent route to the distance from the convex class.

use std::collections::HashSet;

use num_integer::Integer;
use serde::Serialize;

use super::solver::{solve_lp, LinearProgram, Relation, Sense};
use crate::error::{Error, Result};
use crate::grid::{binomial, GridDomain, SampledFunction, SizeCaps};

/// `g(point) ≤ Σ weight · g(vertex)`, weights exact as `num/den`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CaratheodoryConstraint {
    pub point: usize,
    /// `(vertex id, numerator, denominator)` with nonzero reduced weights.
    pub terms: Vec<(usize, i128, i128)>,
}

impl CaratheodoryConstraint {
    /// `g(point) − Σ wᵢ g(vᵢ)`; positive means violated.
    pub fn slack(&self, g: &[f64]) -> f64 {
        g[self.point]
            - self
                .terms
                .iter()
                .map(|&(v, n, d)| n as f64 / d as f64 * g[v])
                .sum::<f64>()
    }
}

fn det(mut m: Vec<Vec<i128>>) -> i128 {
    // Bareiss fraction-free elimination
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Emits every nontrivial Carathéodory constraint of the grid, deduplicated,
/// sorted by `(point, terms)`.
///
/// Scans all `(affine_dim + 1)`-subsets; fails with a size-limit error when the
/// scan would exceed `caps.max_triples` subset-point checks or more than
/// `caps.max_constraints` constraints are produced.
pub fn grid_convexity_constraints(
    domain: &GridDomain,
    caps: &SizeCaps,
) -> Result<Vec<CaratheodoryConstraint>> {
    let d = domain.affine_dim();
    let n = domain.len();
    if d == 0 || n < d + 2 {
        return Ok(Vec::new());
    }
    let k = d + 1;
    let scan = binomial(n as u64, k as u64)
        .and_then(|c| c.checked_mul(n as u128))
        .unwrap_or(u128::MAX);
    if scan > caps.max_triples {
        return Err(Error::SizeLimit {
            what: "Carathéodory subset scan",
            count: scan,
            cap: caps.max_triples,
        });
    }
    let pts: Vec<Vec<i128>> = (0..n)
        .map(|i| domain.hull_point(i).into_iter().map(i128::from).collect())
        .collect();

    let mut seen: HashSet<CaratheodoryConstraint> = HashSet::new();
    let mut out = Vec::new();
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        // columns (v; 1)
        let col = |i: usize, r: usize| if r < d { pts[subset[i]][r] } else { 1 };
        let m: Vec<Vec<i128>> = (0..k).map(|r| (0..k).map(|i| col(i, r)).collect()).collect();
        let dm = det(m.clone());
        if dm != 0 {
            // adjugate rows give λ·det as a linear function of (x; 1)
            let adj: Vec<Vec<i128>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|r| {
                            let minor: Vec<Vec<i128>> = (0..k)
                                .filter(|&rr| rr != r)
                                .map(|rr| (0..k).filter(|&c| c != i).map(|c| m[rr][c]).collect())
                                .collect();
                            let s = if (i + r) % 2 == 0 { 1 } else { -1 };
                            s * det(minor)
                        })
                        .collect()
                })
                .collect();
            for x in 0..n {
                if subset.contains(&x) {
                    continue;
                }
                let xv: Vec<i128> = (0..k).map(|r| if r < d { pts[x][r] } else { 1 }).collect();
                let lam: Vec<i128> = adj
                    .iter()
                    .map(|row| row.iter().zip(&xv).map(|(a, b)| a * b).sum())
                    .collect();
                if lam.iter().any(|&l| l != 0 && (l < 0) != (dm < 0)) {
                    continue;
                }
                let mut terms: Vec<(usize, i128, i128)> = lam
                    .iter()
                    .zip(&subset)
                    .filter(|(l, _)| **l != 0)
                    .map(|(&l, &v)| {
                        let g = l.gcd(&dm);
                        let (mut nn, mut dd) = (l / g, dm / g);
                        if dd < 0 {
                            nn = -nn;
                            dd = -dd;
                        }
                        (v, nn, dd)
                    })
                    .collect();
                terms.sort_unstable();
                let c = CaratheodoryConstraint { point: x, terms };
                if seen.insert(c.clone()) {
                    out.push(c);
                    if out.len() as u128 > caps.max_constraints {
                        return Err(Error::SizeLimit {
                            what: "Carathéodory constraints",
                            count: out.len() as u128,
                            cap: caps.max_constraints,
                        });
                    }
                }
            }
        }
        // next k-subset in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                out.sort();
                return Ok(out);
            }
            i -= 1;
            if subset[i] < n - k + i {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

impl PartialOrd for CaratheodoryConstraint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CaratheodoryConstraint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.point, &self.terms).cmp(&(other.point, &other.terms))
    }
}

/// Distance from `sf` to grid-convex functions, solved directly:
/// minimize `d` subject to `|f − g| ≤ d` and every Carathéodory constraint.
///
/// Constraints are added lazily (most violated first) until the LP optimum
/// satisfies all of them, which yields the optimum of the full LP.
pub fn distance_to_convex_direct(
    sf: &SampledFunction,
    constraints: &[CaratheodoryConstraint],
) -> Result<(f64, SampledFunction)> {
    let n = sf.domain.len();
    let dev = n;
    let mut active: Vec<usize> = Vec::new();
    let mut in_active = vec![false; constraints.len()];
    let batch = (2 * n).max(16);
    for _round in 0..10_000 {
        let mut obj = vec![0.0; n + 1];
        obj[dev] = 1.0;
        let mut lp = LinearProgram::new(Sense::Min, obj);
        for j in 0..n {
            lp.set_free(j);
        }
        for (i, &f) in sf.values.iter().enumerate() {
            let mut up = vec![0.0; n + 1];
            up[i] = 1.0;
            up[dev] = -1.0;
            lp.add_constraint(up, Relation::Le, f);
            let mut lo = vec![0.0; n + 1];
            lo[i] = -1.0;
            lo[dev] = -1.0;
            lp.add_constraint(lo, Relation::Le, -f);
        }
        for &ci in &active {
            let c = &constraints[ci];
            let mut row = vec![0.0; n + 1];
            row[c.point] += 1.0;
            for &(v, nn, dd) in &c.terms {
                row[v] -= nn as f64 / dd as f64;
            }
            lp.add_constraint(row, Relation::Le, 0.0);
        }
        let sol = solve_lp(&lp)?;
        if sol.max_violation > 1e-7 {
            return Err(Error::Solver(format!(
                "LP solution violates its constraints by {:e}",
                sol.max_violation
            )));
        }
        let (d, vals) = sol.into_optimal()?;
        let g = &vals[..n];
        let mut violated: Vec<(f64, usize)> = constraints
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_active[*i])
            .map(|(i, c)| (c.slack(g), i))
            .filter(|(s, _)| *s > 1e-10)
            .collect();
        if violated.is_empty() {
            return Ok((d, SampledFunction::new(sf.domain.clone(), g.to_vec())?));
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in violated.iter().take(batch) {
            in_active[i] = true;
            active.push(i);
        }
    }
    Err(Error::Solver("constraint generation did not converge".into()))
}
