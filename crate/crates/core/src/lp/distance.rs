//! Distance functionals on sampled functions: greatest convex minorant,
//! distance to the convex class, Chebyshev affine fit and best Jensen fit.

use serde::Serialize;

use super::solver::{solve_lp, LinearProgram, Relation, Sense};
use crate::error::{Error, Result};
use crate::grid::{enumerate_midpoint_pairs, SampledFunction};

/// `co f` at every grid point: the cheapest convex decomposition over the grid.
///
/// One LP per query point: minimize `Σ tᵢ f(xᵢ)` subject to `Σ tᵢ xᵢ = x`,
/// `Σ tᵢ = 1`, `t ≥ 0`, written in the coordinates that parametrize the
/// affine hull so that simplex grids carry no redundant rows.
pub fn convex_minorant(sf: &SampledFunction) -> Result<SampledFunction> {
    let dom = &sf.domain;
    let n = dom.len();
    let hull: Vec<Vec<f64>> = (0..n)
        .map(|i| dom.hull_point(i).into_iter().map(|v| v as f64).collect())
        .collect();
    let d = dom.affine_dim();
    let mut out = Vec::with_capacity(n);
    for q in 0..n {
        if d == 0 {
            out.push(sf.values[q]);
            continue;
        }
        let mut lp = LinearProgram::new(Sense::Min, sf.values.clone());
        for c in 0..d {
            let coeffs = hull.iter().map(|p| p[c]).collect();
            lp.add_constraint(coeffs, Relation::Eq, hull[q][c]);
        }
        lp.add_constraint(vec![1.0; n], Relation::Eq, 1.0);
        let (v, _) = solve_lp(&lp)?.into_optimal()?;
        // t = e_q is feasible, so anything above f(q) is solver noise
        out.push(v.min(sf.values[q]));
    }
    SampledFunction::new(dom.clone(), out)
}

/// Result of [`distance_to_convex`].
#[derive(Clone, Debug)]
pub struct ConvexDistance {
    /// `½ · max (f − co f)`.
    pub distance: f64,
    /// The nearest convex function `co f + distance`.
    pub nearest: SampledFunction,
    pub minorant: SampledFunction,
}

pub fn distance_to_convex(sf: &SampledFunction) -> Result<ConvexDistance> {
    let minorant = convex_minorant(sf)?;
    let gap = sf
        .values
        .iter()
        .zip(&minorant.values)
        .map(|(f, c)| f - c)
        .fold(0.0, f64::max);
    let distance = gap / 2.0;
    let nearest = minorant.map(|_, v| v + distance)?;
    Ok(ConvexDistance {
        distance,
        nearest,
        minorant,
    })
}

/// Chebyshev affine fit `⟨a, x⟩ + b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineFit {
    /// `dim` slopes followed by the constant term.
    pub coeffs: Vec<f64>,
    /// The minimax deviation.
    pub deviation: f64,
}

impl AffineFit {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let (slopes, b) = self.coeffs.split_at(self.coeffs.len() - 1);
        slopes.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b[0]
    }
}

/// Minimizes `max |f(x) − ⟨a, x⟩ − b|` over the grid.
pub fn best_affine_fit(sf: &SampledFunction) -> Result<AffineFit> {
    let pts: Vec<Vec<f64>> = (0..sf.domain.len()).map(|i| sf.domain.coords(i)).collect();
    minimax_affine(&pts, &sf.values, true)
}

/// Minimax fit of `values` by `⟨a, x⟩ (+ b)` over arbitrary points.
pub(crate) fn minimax_affine(points: &[Vec<f64>], values: &[f64], with_constant: bool) -> Result<AffineFit> {
    let Some(first) = points.first() else {
        return Err(Error::Parameter("affine fit needs at least one point".into()));
    };
    let dim = first.len();
    let nv = dim + 2; // slopes, constant, deviation
    let dev = dim + 1;
    let mut objective = vec![0.0; nv];
    objective[dev] = 1.0;
    let mut lp = LinearProgram::new(Sense::Min, objective);
    for j in 0..=dim {
        lp.set_free(j);
    }
    if !with_constant {
        lp.set_bounds(dim, Some(0.0), Some(0.0));
    }
    for (x, &f) in points.iter().zip(values) {
        let mut row = vec![0.0; nv];
        row[..dim].copy_from_slice(x);
        row[dim] = 1.0;
        // f − ⟨a,x⟩ − b ≤ d  and  ⟨a,x⟩ + b − f ≤ d
        let mut lo = row.iter().map(|v| -v).collect::<Vec<_>>();
        lo[dev] = -1.0;
        lp.add_constraint(lo, Relation::Le, -f);
        row[dev] = -1.0;
        lp.add_constraint(row, Relation::Le, f);
    }
    let (deviation, vals) = solve_lp(&lp)?.into_optimal()?;
    Ok(AffineFit {
        coeffs: vals[..=dim].to_vec(),
        deviation,
    })
}

/// Best Jensen fit on the grid.
#[derive(Clone, Debug)]
pub struct JensenFit {
    pub nearest: SampledFunction,
    pub distance: f64,
}

/// Minimizes `max |f − g|` over `g` satisfying every grid midpoint equation
/// `2 g(mid) = g(x) + g(y)`.
pub fn best_jensen_fit(sf: &SampledFunction) -> Result<JensenFit> {
    let dom = &sf.domain;
    let pairs = enumerate_midpoint_pairs(dom)?;
    if pairs.is_empty() {
        return Err(Error::Precondition("domain has no midpoint pairs".into()));
    }
    let n = dom.len();
    let rows: Vec<[(usize, i64); 3]> = pairs
        .items
        .iter()
        .filter(|p| p.x_id < p.y_id)
        .map(|p| [(p.mid_id as usize, 2), (p.x_id as usize, -1), (p.y_id as usize, -1)])
        .collect();
    let keep = independent_rows(&rows, n);

    let dev = n;
    let mut objective = vec![0.0; n + 1];
    objective[dev] = 1.0;
    let mut lp = LinearProgram::new(Sense::Min, objective);
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
    for r in keep {
        let mut row = vec![0.0; n + 1];
        for &(c, v) in &rows[r] {
            row[c] += v as f64;
        }
        lp.add_constraint(row, Relation::Eq, 0.0);
    }
    let (distance, vals) = solve_lp(&lp)?.into_optimal()?;
    let nearest = SampledFunction::new(dom.clone(), vals[..n].to_vec())?;
    Ok(JensenFit { nearest, distance })
}

/// Indices of a maximal linearly independent subset of sparse integer rows,
/// chosen greedily in order with exact fraction-free elimination.
fn independent_rows(rows: &[[(usize, i64); 3]], ncols: usize) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<i128>)> = Vec::new();
    let mut pivot_of = vec![usize::MAX; ncols];
    let mut keep = Vec::new();
    for (idx, sparse) in rows.iter().enumerate() {
        if basis.len() == ncols {
            break;
        }
        let mut row = vec![0i128; ncols];
        for &(c, v) in sparse {
            row[c] += v as i128;
        }
        for col in 0..ncols {
            if row[col] == 0 || pivot_of[col] == usize::MAX {
                continue;
            }
            let brow = &basis[pivot_of[col]].1;
            let (a, b) = (brow[col], row[col]);
            for (r, &br) in row.iter_mut().zip(brow) {
                *r = *r * a - br * b;
            }
            let g = row.iter().fold(0i128, |g, &v| num_integer::Integer::gcd(&g, &v));
            if g > 1 {
                row.iter_mut().for_each(|v| *v /= g);
            }
        }
        if let Some(col) = row.iter().position(|&v| v != 0) {
            pivot_of[col] = basis.len();
            basis.push((col, row));
            keep.push(idx);
        }
    }
    keep
}
