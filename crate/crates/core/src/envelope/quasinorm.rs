//! The `p`-quasi-norm of `X_p(Ω)` by exact vertex enumeration, its envelope
//! norm by LP duality, and the gap table between them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::covering::{fmt_ratio, make_covering_system, CoveringSystem};
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpScalar, Relation, Sense};
use crate::report::fmt_f64;

fn ser_rationals<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

fn ser_ratio<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(r))
}

pub(crate) fn to_rational(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::Evaluation {
        at: "function value".into(),
        value: v,
    })
}

fn check_values(cs: &CoveringSystem, f: &[f64]) -> Result<()> {
    if f.len() != cs.omega_len() {
        return Err(Error::Dimension(format!(
            "{} values for |Ω| = {}",
            f.len(),
            cs.omega_len()
        )));
    }
    if let Some(v) = f.iter().find(|v| !v.is_finite()) {
        return Err(Error::Evaluation {
            at: "function value".into(),
            value: *v,
        });
    }
    Ok(())
}

fn check_p(p: Rational64) -> Result<()> {
    if p <= Rational64::zero() || p > Rational64::one() {
        return Err(Error::Parameter(format!("p = {} must lie in (0, 1]", fmt_ratio(&p))));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn subset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
}

fn normalize(mut r: Vec<BigInt>) -> Vec<BigInt> {
    let g = r.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        r.iter_mut().for_each(|x| *x /= &g);
    }
    r
}

/// Vertices and extreme recession directions of `{x ≥ 0 : A x ≥ b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    pub vertices: Vec<Vec<BigRational>>,
    pub rays: Vec<Vec<BigInt>>,
}

/// Exact double description: starts from the orthant cone of the homogenized
/// system `(x, λ) ≥ 0` and intersects one row `a·x − b·λ ≥ 0` at a time,
/// combining adjacent rays across each new hyperplane. Adjacency is decided
/// combinatorially from the sets of tight constraints.
pub fn enumerate_vertices(a: &[Vec<BigInt>], b: &[BigInt], dim: usize) -> Result<VertexSet> {
    if a.len() != b.len() || a.iter().any(|r| r.len() != dim) {
        return Err(Error::Dimension("constraint rows must have `dim` entries".into()));
    }
    let d = dim + 1;
    let total = d + a.len();
    let mut rays: Vec<(Vec<BigInt>, Bits)> = (0..d)
        .map(|j| {
            let mut r = vec![BigInt::zero(); d];
            r[j] = BigInt::one();
            let mut z = Bits::new(total);
            (0..d).filter(|&k| k != j).for_each(|k| z.set(k));
            (r, z)
        })
        .collect();
    for (k, (row, rhs)) in a.iter().zip(b).enumerate() {
        let cidx = d + k;
        let val = |r: &[BigInt]| -> BigInt {
            row.iter().zip(r).map(|(c, x)| c * x).sum::<BigInt>() - rhs * &r[dim]
        };
        let vals: Vec<BigInt> = rays.iter().map(|(r, _)| val(r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut next: Vec<(Vec<BigInt>, Bits)> = Vec::with_capacity(rays.len());
        for &i in &pos {
            next.push(rays[i].clone());
        }
        for (i, (r, z)) in rays.iter().enumerate() {
            if vals[i].is_zero() {
                let mut z = z.clone();
                z.set(cidx);
                next.push((r.clone(), z));
            }
        }
        for &i in &pos {
            for &j in &neg {
                let common = rays[i].1.and(&rays[j].1);
                if (common.count() as usize) + 2 < d {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(l, (_, z))| l == i || l == j || !common.subset_of(z));
                if !adjacent {
                    continue;
                }
                // vals[i] > 0 > vals[j]: vals[i]·r_j − vals[j]·r_i lies on the hyperplane
                let r: Vec<BigInt> = rays[j]
                    .0
                    .iter()
                    .zip(&rays[i].0)
                    .map(|(rj, ri)| &vals[i] * rj - &vals[j] * ri)
                    .collect();
                let mut z = common;
                z.set(cidx);
                next.push((normalize(r), z));
            }
        }
        rays = next;
    }
    let mut vertices = Vec::new();
    let mut recession = Vec::new();
    for (r, _) in rays {
        if r[dim].is_zero() {
            recession.push(r[..dim].to_vec());
        } else {
            let lam = r[dim].clone();
            vertices.push(r[..dim].iter().map(|x| BigRational::new(x.clone(), lam.clone())).collect());
        }
    }
    vertices.sort();
    vertices.dedup();
    recession.sort();
    recession.dedup();
    Ok(VertexSet {
        vertices,
        rays: recession,
    })
}

fn solve_square(mut m: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let k = rhs.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..k {
            if r != col && !m[r][col].is_zero() {
                let factor = &m[r][col] / &m[col][col];
                for c in col..k {
                    let v = &factor * &m[col][c];
                    m[r][c] -= v;
                }
                let v = &factor * &rhs[col];
                rhs[r] -= v;
            }
        }
    }
    Some((0..k).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// Independent oracle for [`enumerate_vertices`]: for every support
/// `S ⊆ {0..dim}` and every choice of `|S|` rows forced tight, solves the
/// square system exactly and keeps feasible solutions.
pub fn vertices_by_support_patterns(a: &[Vec<BigInt>], b: &[BigInt], dim: usize) -> Vec<Vec<BigRational>> {
    let mut out = Vec::new();
    let small = to_i128_rows(a, b);
    for mask in 0u64..(1 << dim) {
        let support: Vec<usize> = (0..dim).filter(|i| mask >> i & 1 == 1).collect();
        let reps = class_representatives(a, b, &support);
        let rows = reps.len();
        let k = support.len();
        let mut idx: Vec<usize> = (0..k).collect();
        if k > rows {
            continue;
        }
        loop {
            let choice: Vec<usize> = idx.iter().map(|&i| reps[i]).collect();
            let fast = small.as_ref().map(|(sa, sb)| cramer_vertex(sa, sb, &support, &choice));
            match fast {
                Some(Some(Some(x))) => out.push(x),
                Some(Some(None)) => {}
                _ => {
                    if let Some(x) = rational_vertex(a, b, dim, &support, &choice) {
                        out.push(x);
                    }
                }
            }
            let mut i = k;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if idx[i] < rows - k + i {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Rows restricted to `support`, grouped by positive multiples. Zero rows
/// never enter a nonsingular choice, and within a group only the row with
/// the largest scaled right-hand side can be tight at a feasible point.
fn class_representatives(a: &[Vec<BigInt>], b: &[BigInt], support: &[usize]) -> Vec<usize> {
    let mut best: BTreeMap<Vec<BigInt>, (BigRational, usize)> = BTreeMap::new();
    for (r, (row, rb)) in a.iter().zip(b).enumerate() {
        let sub: Vec<BigInt> = support.iter().map(|&c| row[c].clone()).collect();
        let g = sub.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        if g.is_zero() {
            continue;
        }
        let key: Vec<BigInt> = sub.iter().map(|v| v / &g).collect();
        let rhs = BigRational::new(rb.clone(), g);
        match best.get(&key) {
            Some((cur, _)) if *cur >= rhs => {}
            _ => {
                best.insert(key, (rhs, r));
            }
        }
    }
    let mut reps: Vec<usize> = best.into_values().map(|(_, r)| r).collect();
    reps.sort_unstable();
    reps
}

fn to_i128_rows(a: &[Vec<BigInt>], b: &[BigInt]) -> Option<(Vec<Vec<i128>>, Vec<i128>)> {
    let rows = a.iter().map(|r| r.iter().map(|v| v.to_i128()).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>()?;
    Some((rows, b.iter().map(|v| v.to_i128()).collect::<Option<Vec<_>>>()?))
}

fn rational_vertex(a: &[Vec<BigInt>], b: &[BigInt], dim: usize, support: &[usize], choice: &[usize]) -> Option<Vec<BigRational>> {
    let mat: Vec<Vec<BigRational>> = choice
        .iter()
        .map(|&r| support.iter().map(|&c| BigRational::from(a[r][c].clone())).collect())
        .collect();
    let rhs: Vec<BigRational> = choice.iter().map(|&r| BigRational::from(b[r].clone())).collect();
    let sol = solve_square(mat, rhs)?;
    let mut x = vec![BigRational::zero(); dim];
    for (&c, v) in support.iter().zip(sol) {
        x[c] = v;
    }
    let feasible = x.iter().all(|v| !v.is_negative())
        && a.iter().zip(b).all(|(row, rb)| {
            let lhs: BigRational = row.iter().zip(&x).map(|(c, v)| BigRational::from(c.clone()) * v).sum();
            lhs >= BigRational::from(rb.clone())
        });
    feasible.then_some(x)
}

const FAST_DIM: usize = 16;

/// Cramer's rule over `i128` via one fraction-free elimination of `[M | b]`.
/// Outer `None` means overflow or an oversized system; inner `None` means
/// singular or infeasible.
fn cramer_vertex(a: &[Vec<i128>], b: &[i128], support: &[usize], choice: &[usize]) -> Option<Option<Vec<BigRational>>> {
    let k = support.len();
    if k > FAST_DIM {
        return None;
    }
    let mut m = [[0i128; FAST_DIM + 1]; FAST_DIM];
    for (i, &r) in choice.iter().enumerate() {
        for (j, &c) in support.iter().enumerate() {
            m[i][j] = a[r][c];
        }
        m[i][k] = b[r];
    }
    let mut prev = 1i128;
    for col in 0..k {
        let Some(piv) = (col..k).find(|&r| m[r][col] != 0) else { return Some(None) };
        if piv != col {
            m.swap(col, piv);
        }
        for r in col + 1..k {
            for c in col + 1..=k {
                let v = m[r][c].checked_mul(m[col][col])?.checked_sub(m[r][col].checked_mul(m[col][c])?)?;
                m[r][c] = v / prev;
            }
            m[r][col] = 0;
        }
        prev = m[col][col];
    }
    // row i of the eliminated system is scaled by the leading minor of order i + 1
    // row swaps only flip the sign of det, which cancels in det·x
    let det = if k == 0 { 1 } else { m[k - 1][k - 1] };
    let mut nums = [0i128; FAST_DIM];
    for i in (0..k).rev() {
        let mut acc = det.checked_mul(m[i][k])?;
        for j in i + 1..k {
            acc = acc.checked_sub(m[i][j].checked_mul(nums[j])?)?;
        }
        nums[i] = acc / m[i][i];
    }
    let mut det = det;
    if det < 0 {
        det = -det;
        nums.iter_mut().for_each(|v| *v = -*v);
    }
    if nums[..k].iter().any(|&v| v < 0) {
        return Some(None);
    }
    for (row, &rb) in a.iter().zip(b) {
        let mut lhs = 0i128;
        for (j, &c) in support.iter().enumerate() {
            lhs = lhs.checked_add(row[c].checked_mul(nums[j])?)?;
        }
        if lhs < rb.checked_mul(det)? {
            return Some(None);
        }
    }
    let dim = a.first().map_or(0, |r| r.len());
    let d = BigInt::from(det);
    let mut x = vec![BigRational::zero(); dim];
    for (j, &c) in support.iter().enumerate() {
        x[c] = BigRational::new(BigInt::from(nums[j]), d.clone());
    }
    Some(Some(x))
}

/// Integer rows of `{c ≥ 0 : Σ_{i∈ω} c_i ≥ |f(ω)|}`, each scaled by the
/// denominator of its right-hand side.
pub fn covering_constraints(cs: &CoveringSystem, f: &[f64]) -> Result<(Vec<Vec<BigInt>>, Vec<BigInt>)> {
    check_values(cs, f)?;
    let mut a = Vec::with_capacity(f.len());
    let mut b = Vec::with_capacity(f.len());
    for (w, &v) in f.iter().enumerate() {
        let r = to_rational(v.abs())?;
        let den = r.denom().clone();
        a.push(
            (1..=cs.m())
                .map(|i| if cs.contains(i, w) { den.clone() } else { BigInt::zero() })
                .collect(),
        );
        b.push(r.numer().clone());
    }
    Ok((a, b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiNormCertificate {
    #[serde(serialize_with = "ser_ratio")]
    pub p: Rational64,
    #[serde(serialize_with = "ser_rationals")]
    pub c: Vec<BigRational>,
    /// `(Σ c_i^p)^{1/p}`.
    pub objective: f64,
    /// Indices of the `ω` with `Σ_{i∈ω} c_i = |f(ω)|`.
    pub active: Vec<usize>,
}

impl QuasiNormCertificate {
    /// Exact check of `Σ c_i 1_{A_i} ≥ |f|`, `c ≥ 0` and the objective value.
    pub fn verify(&self, cs: &CoveringSystem, f: &[f64]) -> Result<bool> {
        check_values(cs, f)?;
        if self.c.len() != cs.m() || self.c.iter().any(|v| v.is_negative()) {
            return Ok(false);
        }
        for (w, &v) in f.iter().enumerate() {
            let cover: BigRational = (1..=cs.m()).filter(|&i| cs.contains(i, w)).map(|i| self.c[i - 1].clone()).sum();
            if cover < to_rational(v.abs())? {
                return Ok(false);
            }
        }
        let obj = p_objective(&self.c, self.p);
        Ok((obj - self.objective).abs() <= 1e-12 * obj.max(1.0))
    }
}

fn p_objective(c: &[BigRational], p: Rational64) -> f64 {
    let pf = p.to_f64().expect("p converts");
    let s: f64 = c.iter().map(|v| ToPrimitive::to_f64(v).unwrap_or(f64::INFINITY).powf(pf)).sum();
    s.powf(1.0 / pf)
}

fn active_rows(cs: &CoveringSystem, f: &[f64], c: &[BigRational]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (w, &v) in f.iter().enumerate() {
        let cover: BigRational = (1..=cs.m()).filter(|&i| cs.contains(i, w)).map(|i| c[i - 1].clone()).sum();
        if cover == to_rational(v.abs())? {
            out.push(w);
        }
    }
    Ok(out)
}

/// Vertices of the feasible coefficient polyhedron of one `f`, reusable across `p`.
#[derive(Clone, Debug)]
pub struct QuasiNormSolver<'a> {
    cs: &'a CoveringSystem,
    f: Vec<f64>,
    vertices: VertexSet,
}

impl<'a> QuasiNormSolver<'a> {
    pub fn new(cs: &'a CoveringSystem, f: &[f64]) -> Result<Self> {
        let (a, b) = covering_constraints(cs, f)?;
        let vertices = enumerate_vertices(&a, &b, cs.m())?;
        Ok(QuasiNormSolver {
            cs,
            f: f.to_vec(),
            vertices,
        })
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    /// Best vertex for `Σ c_i^p`; near-ties (relative 1e-12) go to the
    /// lexicographically least `c`.
    pub fn solve(&self, p: Rational64) -> Result<QuasiNormCertificate> {
        check_p(p)?;
        let pf = p.to_f64().expect("p converts");
        let mut best: Option<(f64, &Vec<BigRational>)> = None;
        for v in &self.vertices.vertices {
            let s: f64 = v.iter().map(|x| ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY).powf(pf)).sum();
            best = match best {
                None => Some((s, v)),
                Some((bs, bv)) => {
                    let tie = (s - bs).abs() <= 1e-12 * bs.max(s).max(f64::MIN_POSITIVE);
                    if (tie && v.cmp(bv) == Ordering::Less) || (!tie && s < bs) {
                        Some((s, v))
                    } else {
                        Some((bs, bv))
                    }
                }
            };
        }
        let (_, c) = best.ok_or_else(|| Error::Solver("feasible polyhedron has no vertex".into()))?;
        Ok(QuasiNormCertificate {
            p,
            c: c.clone(),
            objective: p_objective(c, p),
            active: active_rows(self.cs, &self.f, c)?,
        })
    }
}

/// `‖f‖_p = inf{(Σ c_i^p)^{1/p} : |f| ≤ Σ c_i 1_{A_i}, c ≥ 0}`.
///
/// For `p < 1` the objective is concave, so the infimum is attained at a
/// vertex; all vertices are enumerated exactly. `p = 1` is an exact LP.
pub fn quasi_norm(cs: &CoveringSystem, f: &[f64], p: Rational64) -> Result<QuasiNormCertificate> {
    check_p(p)?;
    if p == Rational64::one() {
        let c = exact_min_cover(cs, f)?;
        return Ok(QuasiNormCertificate {
            p,
            objective: p_objective(&c, p),
            active: active_rows(cs, f, &c)?,
            c,
        });
    }
    QuasiNormSolver::new(cs, f)?.solve(p)
}

fn exact_min_cover(cs: &CoveringSystem, f: &[f64]) -> Result<Vec<BigRational>> {
    check_values(cs, f)?;
    let mut lp: LinearProgram<BigRational> = LinearProgram::new(Sense::Min, vec![BigRational::one(); cs.m()]);
    for (w, &v) in f.iter().enumerate() {
        let row = (1..=cs.m())
            .map(|i| if cs.contains(i, w) { BigRational::one() } else { BigRational::zero() })
            .collect();
        lp.add_constraint(row, Relation::Ge, to_rational(v.abs())?);
    }
    let (_, c) = solve_lp(&lp)?.into_optimal()?;
    Ok(c)
}

/// `n^{1/p−1} ε^{1/p} / (1+ε)`.
pub fn quasi_norm_lower_bound(cs: &CoveringSystem, p: Rational64) -> Result<f64> {
    check_p(p)?;
    let pf = p.to_f64().expect("p converts");
    let eps = cs.eps_f64();
    Ok((cs.n() as f64).powf(1.0 / pf - 1.0) * eps.powf(1.0 / pf) / (1.0 + eps))
}

/// For feasible `c` covering `1_Ω`, `J = {i : c_i ≥ 1/((1+ε)n)}`; returns
/// `(J, |J| > εn)`.
pub fn counting_claim(cs: &CoveringSystem, c: &[BigRational]) -> (Vec<usize>, bool) {
    let thresh = BigRational::new(BigInt::one(), BigInt::from(cs.m()));
    let j: Vec<usize> = (1..=cs.m()).filter(|&i| c[i - 1] >= thresh).collect();
    let holds = j.len() > cs.eps_n();
    (j, holds)
}

/// `max_i Σ_{ω∈A_i} |g(ω)|`, the norm dual to the envelope norm.
pub fn dual_norm(cs: &CoveringSystem, g: &[f64]) -> Result<f64> {
    check_values(cs, g)?;
    Ok((1..=cs.m())
        .map(|i| (0..cs.omega_len()).filter(|&w| cs.contains(i, w)).map(|w| g[w].abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

fn envelope_lp<T: LpScalar>(cs: &CoveringSystem, absf: Vec<T>) -> Result<T> {
    let mut lp = LinearProgram::new(Sense::Max, absf);
    for i in 1..=cs.m() {
        let row = (0..cs.omega_len())
            .map(|w| if cs.contains(i, w) { T::one() } else { T::zero() })
            .collect();
        lp.add_constraint(row, Relation::Le, T::one());
    }
    Ok(solve_lp(&lp)?.into_optimal()?.0)
}

/// `sup{Σ f·g : dual_norm(g) ≤ 1}`, the norm of the Banach envelope.
pub fn envelope_norm(cs: &CoveringSystem, f: &[f64]) -> Result<f64> {
    check_values(cs, f)?;
    envelope_lp(cs, f.iter().map(|v| v.abs()).collect())
}

pub fn envelope_norm_exact(cs: &CoveringSystem, f: &[f64]) -> Result<BigRational> {
    check_values(cs, f)?;
    let absf = f.iter().map(|v| to_rational(v.abs())).collect::<Result<Vec<_>>>()?;
    envelope_lp(cs, absf)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub quasi_norm: f64,
    pub lower_bound: f64,
    pub envelope_norm: f64,
    pub ratio: f64,
    /// `n^{1/p−1} ε^{1/p} / (1+ε)²`.
    pub ratio_bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapTable {
    #[serde(serialize_with = "ser_ratio")]
    pub eps: Rational64,
    #[serde(serialize_with = "ser_ratio")]
    pub p: Rational64,
    pub rows: Vec<GapRow>,
}

/// `‖1_Ω‖_p` against `‖1_Ω‖_co` for each `n`.
pub fn envelope_gap_report(eps: Rational64, n_list: &[usize], p: Rational64) -> Result<GapTable> {
    check_p(p)?;
    let mut rows = Vec::new();
    for &n in n_list {
        let cs = make_covering_system(eps, n)?;
        let ones = vec![1.0; cs.omega_len()];
        let qn = quasi_norm(&cs, &ones, p)?.objective;
        let lb = quasi_norm_lower_bound(&cs, p)?;
        let env = envelope_norm(&cs, &ones)?;
        let ratio = qn / env;
        let ratio_bound = lb / (1.0 + cs.eps_f64());
        rows.push(GapRow {
            n,
            quasi_norm: qn,
            lower_bound: lb,
            envelope_norm: env,
            ratio,
            ratio_bound,
            holds: qn >= lb * (1.0 - 1e-12) && ratio >= ratio_bound * (1.0 - 1e-12),
        });
    }
    Ok(GapTable { eps, p, rows })
}

impl GapTable {
    pub const HEADER: [&'static str; 7] =
        ["n", "quasi_norm", "lower_bound", "envelope_norm", "ratio", "ratio_bound", "holds"];

    fn cells(r: &GapRow) -> [String; 7] {
        [
            r.n.to_string(),
            fmt_f64(r.quasi_norm),
            fmt_f64(r.lower_bound),
            fmt_f64(r.envelope_norm),
            fmt_f64(r.ratio),
            fmt_f64(r.ratio_bound),
            r.holds.to_string(),
        ]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        crate::report::write_csv(out, &Self::HEADER, self.rows.iter().map(Self::cells))
    }

    pub fn write_dat<W: Write>(&self, out: W) -> Result<()> {
        let title = format!("eps {} p {}", fmt_ratio(&self.eps), fmt_ratio(&self.p));
        crate::report::write_dat(out, &title, &Self::HEADER, self.rows.iter().map(Self::cells))
    }
}
