//! Dense two-phase tableau simplex.
//!
//! Generic over the scalar so the same code runs in `f64` (tolerance `1e-9`)
//! and in exact `BigRational` arithmetic (zero tolerance). Pivoting uses
//! Dantzig's rule for a bounded number of pivots and then switches to Bland's
//! rule, which cannot cycle.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Field operations plus the tolerances the pivoting logic needs.
pub trait LpScalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Feasibility and optimality tolerance.
    fn tolerance() -> Self;
    /// Smallest pivot magnitude accepted in the ratio test.
    fn pivot_tolerance() -> Self;
    fn to_f64(&self) -> f64;
    fn is_finite_value(&self) -> bool {
        true
    }
    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

pub const FEASIBILITY_TOL: f64 = 1e-9;

impl LpScalar for f64 {
    fn tolerance() -> Self {
        FEASIBILITY_TOL
    }
    fn pivot_tolerance() -> Self {
        1e-9
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

impl LpScalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }
    fn pivot_tolerance() -> Self {
        BigRational::zero()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs_value(&self) -> Self {
        self.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarBounds<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T: LpScalar> VarBounds<T> {
    pub fn nonnegative() -> Self {
        VarBounds {
            lower: Some(T::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        VarBounds {
            lower: None,
            upper: None,
        }
    }
}

/// A dense LP; variables default to `x >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearProgram<T = f64> {
    pub sense: Sense,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<VarBounds<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution<T = f64> {
    pub status: LpStatus,
    pub objective_value: Option<T>,
    pub values: Vec<T>,
    pub iterations: usize,
    /// Largest violation of a constraint or bound at the returned point.
    pub max_violation: f64,
}

impl<T: LpScalar> LpSolution<T> {
    /// The optimal point, or an error naming the status.
    pub fn into_optimal(self) -> Result<(T, Vec<T>)> {
        match (self.status, self.objective_value) {
            (LpStatus::Optimal, Some(v)) => Ok((v, self.values)),
            (LpStatus::Infeasible, _) => Err(Error::LpStatus("infeasible".into())),
            (LpStatus::Unbounded, _) => Err(Error::LpStatus("unbounded".into())),
            (LpStatus::Optimal, None) => Err(Error::Solver("optimal without value".into())),
        }
    }
}

impl<T: LpScalar> LinearProgram<T> {
    pub fn new(sense: Sense, objective: Vec<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: (0..n).map(|_| VarBounds::nonnegative()).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<T>, upper: Option<T>) -> &mut Self {
        self.bounds[var] = VarBounds { lower, upper };
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, None, None)
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(Error::Dimension(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Dimension(format!(
                    "constraint {i} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite_value() || c.coeffs.iter().any(|v| !v.is_finite_value()) {
                return Err(Error::Parameter(format!("constraint {i} is not finite")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite_value()) {
            return Err(Error::Parameter("objective is not finite".into()));
        }
        Ok(())
    }

    fn violation_at(&self, x: &[T]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let lhs = dot(&c.coeffs, x).to_f64();
            let rhs = c.rhs.to_f64();
            let v = match c.relation {
                Relation::Le => lhs - rhs,
                Relation::Ge => rhs - lhs,
                Relation::Eq => (lhs - rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (b, xi) in self.bounds.iter().zip(x) {
            let xi = xi.to_f64();
            if let Some(l) = &b.lower {
                worst = worst.max(l.to_f64() - xi);
            }
            if let Some(u) = &b.upper {
                worst = worst.max(xi - u.to_f64());
            }
        }
        worst
    }
}

fn dot<T: LpScalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// How an original variable is expressed through nonnegative standard columns.
struct VarMap<T> {
    offset: T,
    terms: Vec<(usize, bool)>, // (column, negated)
}

struct Tableau<T> {
    rows: usize,
    width: usize, // columns + rhs
    data: Vec<T>,
    cost: Vec<T>,
    basis: Vec<usize>,
    enterable: Vec<bool>,
}

impl<T: LpScalar> Tableau<T> {
    fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> &T {
        &self.data[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c].clone();
        for v in &mut self.data[r * w..(r + 1) * w] {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        let prow: Vec<T> = self.data[r * w..(r + 1) * w].to_vec();
        let nz: Vec<usize> = (0..w).filter(|&j| !prow[j].is_zero()).collect();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &j in &nz {
                row[j] = row[j].clone() - f.clone() * prow[j].clone();
            }
            row[c] = T::zero();
        }
        let f = self.cost[c].clone();
        if !f.is_zero() {
            for &j in &nz {
                self.cost[j] = self.cost[j].clone() - f.clone() * prow[j].clone();
            }
            self.cost[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Sets the reduced-cost row for `costs` (indexed by column) and the current basis.
    fn price(&mut self, costs: &[T]) {
        let w = self.width;
        let mut row: Vec<T> = costs.to_vec();
        row.push(T::zero());
        for i in 0..self.rows {
            let cb = costs[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, rv) in row.iter_mut().enumerate() {
                let a = &self.data[i * w + j];
                if !a.is_zero() {
                    *rv = rv.clone() - cb.clone() * a.clone();
                }
            }
        }
        self.cost = row;
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct PivotBudget {
    iterations: usize,
    dantzig_limit: usize,
    cap: usize,
}

fn run_simplex<T: LpScalar>(tab: &mut Tableau<T>, budget: &mut PivotBudget) -> Result<Outcome> {
    let ncols = tab.width - 1;
    let tol = T::tolerance();
    let ptol = T::pivot_tolerance();
    let neg_tol = -tol.clone();
    loop {
        if budget.iterations >= budget.cap {
            return Err(Error::Solver(format!(
                "iteration cap {} reached without convergence",
                budget.cap
            )));
        }
        let bland = budget.iterations >= budget.dantzig_limit;
        let mut entering: Option<usize> = None;
        for j in 0..ncols {
            if !tab.enterable[j] || tab.cost[j] >= neg_tol {
                continue;
            }
            match entering {
                None => {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                }
                Some(e) => {
                    if tab.cost[j] < tab.cost[e] {
                        entering = Some(j);
                    }
                }
            }
        }
        let Some(c) = entering else {
            return Ok(Outcome::Optimal);
        };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..tab.rows {
            let a = tab.at(i, c);
            if *a <= ptol || a.is_zero() {
                continue;
            }
            let rhs = tab.rhs(i).clone();
            let ratio = if rhs < T::zero() { T::zero() } else { rhs / a.clone() };
            leave = match leave {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let better = ratio.clone() + tol.clone() < br;
                    let tie = !better && ratio <= br.clone() + tol.clone();
                    // ties: Bland needs the smallest basic index; otherwise the
                    // largest pivot keeps the tableau well conditioned
                    let wins_tie = if bland {
                        tab.basis[i] < tab.basis[bi]
                    } else {
                        *a > *tab.at(bi, c) || (*a == *tab.at(bi, c) && tab.basis[i] < tab.basis[bi])
                    };
                    if better || (tie && wins_tie) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        let Some((r, _)) = leave else {
            return Ok(Outcome::Unbounded);
        };
        tab.pivot(r, c);
        // rounding can leave basic values just below zero; left alone they
        // feed negative ratios back into the test and the pivots can cycle
        for i in 0..tab.rows {
            let idx = i * tab.width + tab.width - 1;
            if tab.data[idx] < T::zero() && tab.data[idx] >= neg_tol {
                tab.data[idx] = T::zero();
            }
        }
        budget.iterations += 1;
    }
}

/// Solves `lp`; deterministic for identical input.
pub fn solve_lp<T: LpScalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    lp.validate()?;
    let n = lp.num_vars();

    // standard columns
    let mut maps: Vec<VarMap<T>> = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, T)> = Vec::new(); // column <= value
    for b in &lp.bounds {
        let map = match (&b.lower, &b.upper) {
            (Some(l), u) => {
                let c = ncols;
                ncols += 1;
                if let Some(u) = u {
                    if *u < *l {
                        return Ok(infeasible(n, 0));
                    }
                    bound_rows.push((c, u.clone() - l.clone()));
                }
                VarMap {
                    offset: l.clone(),
                    terms: vec![(c, false)],
                }
            }
            (None, Some(u)) => {
                let c = ncols;
                ncols += 1;
                VarMap {
                    offset: u.clone(),
                    terms: vec![(c, true)],
                }
            }
            (None, None) => {
                let c = ncols;
                ncols += 2;
                VarMap {
                    offset: T::zero(),
                    terms: vec![(c, false), (c + 1, true)],
                }
            }
        };
        maps.push(map);
    }

    // rows over standard columns, rhs made nonnegative
    let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::new();
    for con in &lp.constraints {
        let mut coeffs = vec![T::zero(); ncols];
        let mut rhs = con.rhs.clone();
        for (a, map) in con.coeffs.iter().zip(&maps) {
            if a.is_zero() {
                continue;
            }
            rhs = rhs - a.clone() * map.offset.clone();
            for &(c, neg) in &map.terms {
                coeffs[c] = if neg {
                    coeffs[c].clone() - a.clone()
                } else {
                    coeffs[c].clone() + a.clone()
                };
            }
        }
        rows.push((coeffs, con.relation, rhs));
    }
    for (c, ub) in bound_rows {
        let mut coeffs = vec![T::zero(); ncols];
        coeffs[c] = T::one();
        rows.push((coeffs, Relation::Le, ub));
    }
    for row in &mut rows {
        if row.2 < T::zero() {
            row.0.iter_mut().for_each(|v| *v = -v.clone());
            row.2 = -row.2.clone();
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let total = ncols + n_slack + n_art;
    let width = total + 1;
    let mut data = vec![T::zero(); m * width];
    let mut basis = vec![0usize; m];
    let mut is_art = vec![false; total];
    let (mut s, mut a) = (ncols, ncols + n_slack);
    for (i, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
        let row = &mut data[i * width..(i + 1) * width];
        for (j, v) in coeffs.into_iter().enumerate() {
            row[j] = v;
        }
        row[total] = rhs;
        match rel {
            Relation::Le => {
                row[s] = T::one();
                basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                row[s] = -T::one();
                s += 1;
                row[a] = T::one();
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
            Relation::Eq => {
                row[a] = T::one();
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
        }
    }
    let mut tab = Tableau {
        rows: m,
        width,
        data,
        cost: vec![T::zero(); width],
        basis,
        enterable: vec![true; total],
    };
    let mut budget = PivotBudget {
        iterations: 0,
        dantzig_limit: 20 * (m + total) + 100,
        cap: 200 * (m + total) + 10_000,
    };

    if n_art > 0 {
        let costs: Vec<T> = (0..total)
            .map(|j| if is_art[j] { T::one() } else { T::zero() })
            .collect();
        tab.price(&costs);
        run_simplex(&mut tab, &mut budget)?;
        let phase1 = -tab.cost[total].clone();
        let scale = (0..tab.rows)
            .map(|i| tab.rhs(i).abs_value())
            .fold(T::one(), |acc, v| if v > acc { v } else { acc });
        if phase1 > T::tolerance() * scale {
            return Ok(infeasible(n, budget.iterations));
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < tab.rows {
            if is_art[tab.basis[r]] {
                let col = (0..total).find(|&j| {
                    !is_art[j] && tab.at(r, j).abs_value() > T::pivot_tolerance()
                        && !tab.at(r, j).is_zero()
                });
                match col {
                    Some(c) => {
                        tab.pivot(r, c);
                        budget.iterations += 1;
                        r += 1;
                    }
                    None => tab.remove_row(r),
                }
            } else {
                r += 1;
            }
        }
        for (j, art) in is_art.iter().enumerate() {
            if *art {
                tab.enterable[j] = false;
            }
        }
    }

    let mut costs = vec![T::zero(); total];
    for (j, map) in maps.iter().enumerate() {
        let cj = match lp.sense {
            Sense::Min => lp.objective[j].clone(),
            Sense::Max => -lp.objective[j].clone(),
        };
        for &(c, neg) in &map.terms {
            costs[c] = if neg { -cj.clone() } else { cj.clone() };
        }
    }
    tab.price(&costs);
    let outcome = run_simplex(&mut tab, &mut budget)?;
    if let Outcome::Unbounded = outcome {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective_value: None,
            values: Vec::new(),
            iterations: budget.iterations,
            max_violation: 0.0,
        });
    }

    let mut std_vals = vec![T::zero(); total];
    for i in 0..tab.rows {
        std_vals[tab.basis[i]] = tab.rhs(i).clone();
    }
    let values: Vec<T> = maps
        .iter()
        .map(|map| {
            map.terms.iter().fold(map.offset.clone(), |acc, &(c, neg)| {
                if neg {
                    acc - std_vals[c].clone()
                } else {
                    acc + std_vals[c].clone()
                }
            })
        })
        .collect();
    let objective_value = dot(&lp.objective, &values);
    let max_violation = lp.violation_at(&values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: Some(objective_value),
        values,
        iterations: budget.iterations,
        max_violation,
    })
}

fn infeasible<T>(_n: usize, iterations: usize) -> LpSolution<T> {
    LpSolution {
        status: LpStatus::Infeasible,
        objective_value: None,
        values: Vec::new(),
        iterations,
        max_violation: f64::INFINITY,
    }
}
