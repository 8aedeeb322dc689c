//! Explicit approximately convex / quasi-linear functions and their growth tables.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::fmt_f64;

/// A finitely supported sequence with 1-based, strictly increasing indices and
/// nonzero values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Sorts, merges duplicate indices and drops zeros.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.iter().any(|&(i, v)| i == 0 || !v.is_finite()) {
            return Err(Error::Parameter(
                "sparse vector indices start at 1 and values must be finite".into(),
            ));
        }
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        Ok(SparseVector { entries: merged })
    }

    pub fn zero() -> Self {
        SparseVector::default()
    }

    /// The unit vector `e_i` (1-based).
    pub fn basis(i: usize) -> Self {
        assert!(i >= 1, "indices are 1-based");
        SparseVector {
            entries: vec![(i, 1.0)],
        }
    }

    /// Position `p` of `values` becomes index `p + 1`.
    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(p, &v)| (p + 1, v))
                .collect(),
        }
    }

    /// `value · Σ_{i∈indices} e_i`.
    pub fn constant_on(indices: impl IntoIterator<Item = usize>, value: f64) -> Result<Self> {
        SparseVector::new(indices.into_iter().map(|i| (i, value)).collect())
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries
            .binary_search_by_key(&i, |e| e.0)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    /// Largest index with a nonzero value.
    pub fn support_end(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0)
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            let take = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    i += 1;
                    j += 1;
                    (x.0, x.1 + y.1)
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    i += 1;
                    *x
                }
                (Some(x), None) => {
                    i += 1;
                    *x
                }
                (_, Some(y)) => {
                    j += 1;
                    *y
                }
                (None, None) => unreachable!(),
            };
            if take.1 != 0.0 {
                out.push(take);
            }
        }
        SparseVector { entries: out }
    }

    pub fn scale(&self, t: f64) -> SparseVector {
        if t == 0.0 {
            return SparseVector::zero();
        }
        SparseVector {
            entries: self.entries.iter().map(|&(i, v)| (i, t * v)).collect(),
        }
    }

    /// `t·self + (1−t)·other`.
    pub fn convex_combination(&self, other: &SparseVector, t: f64) -> SparseVector {
        self.scale(t).add(&other.scale(1.0 - t))
    }

    pub fn positive_part(&self) -> SparseVector {
        SparseVector {
            entries: self.entries.iter().copied().filter(|e| e.1 > 0.0).collect(),
        }
    }

    /// `x⁻ = max(−x, 0)`.
    pub fn negative_part(&self) -> SparseVector {
        SparseVector {
            entries: self
                .entries
                .iter()
                .filter(|e| e.1 < 0.0)
                .map(|&(i, v)| (i, -v))
                .collect(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|e| e.1 >= 0.0)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Sup => self.entries.iter().map(|e| e.1.abs()).fold(0.0, f64::max),
            NormKind::L1 => self.entries.iter().map(|e| e.1.abs()).sum(),
            NormKind::L2 => self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Sup,
    L1,
    L2,
}

impl NormKind {
    pub fn of(self, x: &[f64]) -> f64 {
        match self {
            NormKind::Sup => x.iter().map(|v| v.abs()).fold(0.0, f64::max),
            NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
            NormKind::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" | "linf" | "inf" => Ok(NormKind::Sup),
            "l1" => Ok(NormKind::L1),
            "l2" | "euclid" => Ok(NormKind::L2),
            other => Err(Error::Parameter(format!(
                "unknown norm {other:?} (expected sup, l1, l2)"
            ))),
        }
    }
}

fn xlog2x(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.abs().log2()
    }
}

/// Ribe's quasi-linear map `Σ xᵢ log₂|xᵢ| − (Σ xᵢ) log₂|Σ xᵢ|`.
///
/// Evaluated as `Σ xᵢ log₂|xᵢ / r|` with `r = Σ xᵢ` (or `max |xᵢ|` when the
/// sum vanishes), so scaling `x` by a power of two scales the result exactly.
pub fn ribe(x: &SparseVector) -> f64 {
    let s = x.sum();
    let r = if s != 0.0 { s } else { x.norm(NormKind::Sup) };
    if r == 0.0 {
        return 0.0;
    }
    x.entries().iter().map(|e| xlog2x(e.1 / r) * r).sum()
}

/// Kalton's quasi-linear map `Σ x̃ᵢ log₂ i` on the decreasing rearrangement,
/// extended by `K(x) = K(x⁺) − K(x⁻)`.
pub fn kalton_map(x: &SparseVector) -> f64 {
    fn positive(y: &SparseVector) -> f64 {
        let mut v: Vec<f64> = y.entries().iter().map(|e| e.1).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.iter()
            .enumerate()
            .map(|(r, val)| val * ((r + 1) as f64).log2())
            .sum()
    }
    positive(&x.positive_part()) - positive(&x.negative_part())
}

/// Entropy `−Σ xᵢ log₂ xᵢ` of a simplex point.
pub fn entropy_simplex(x: &[f64]) -> f64 {
    -x.iter().map(|&v| xlog2x(v)).sum::<f64>()
}

/// Cholewa–Kominek function `ω(x) = min{n ≥ 0 : max xᵢ ≥ 2⁻ⁿ}`.
pub fn cholewa_kominek_omega(x: &SparseVector) -> Result<u32> {
    if !x.is_nonnegative() {
        return Err(Error::Parameter("ω is defined on the positive cone".into()));
    }
    let m = x.norm(NormKind::Sup);
    omega_of_max(m)
}

pub(crate) fn omega_of_max(m: f64) -> Result<u32> {
    if m <= 0.0 {
        return Err(Error::Parameter("ω(0) is undefined: no n satisfies max ≥ 2^-n".into()));
    }
    let mut n = 0u32;
    let mut threshold = 1.0f64;
    while m < threshold {
        n += 1;
        threshold /= 2.0;
    }
    Ok(n)
}

/// `−log₂ ‖x‖`, singular at the origin.
pub fn neg_log_norm(x: &[f64], kind: NormKind) -> Result<f64> {
    let n = kind.of(x);
    if n == 0.0 {
        return Err(Error::Parameter("−log₂‖x‖ is singular at x = 0".into()));
    }
    Ok(-n.log2())
}

/// `−log₂ max tₙ` on the simplex.
pub fn simplex_max_counterexample(x: &[f64]) -> f64 {
    -x.iter().copied().fold(0.0, f64::max).log2()
}

/// Sequence `θₙ → 1` used by the `F*` construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaRule {
    /// `θₙ = 1 − 2⁻ⁿ`, so `−log₂(1 − θₙ) = n`.
    Dyadic,
    /// Explicit `θ₁, θ₂, …`; indices past the end reuse the last value.
    Explicit(Vec<f64>),
}

impl ThetaRule {
    pub fn theta(&self, n: usize) -> f64 {
        match self {
            ThetaRule::Dyadic => 1.0 - (-(n as f64)).exp2(),
            ThetaRule::Explicit(v) => v[(n - 1).min(v.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        if let ThetaRule::Explicit(v) = self {
            if v.is_empty()
                || v.iter().any(|&t| !(t > 0.0 && t < 1.0))
                || v.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(Error::Parameter(
                    "θ must be strictly increasing inside (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Consecutive disjoint coordinate blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLayout {
    /// Block `n` has `n` coordinates: `{1}, {2,3}, {4,5,6}, …`.
    Natural,
    /// Explicit sizes; coordinates after the last block belong to none.
    Sizes(Vec<usize>),
}

impl BlockLayout {
    /// 1-based inclusive coordinate range of block `n` (1-based).
    pub fn block(&self, n: usize) -> Option<(usize, usize)> {
        match self {
            BlockLayout::Natural => {
                let start = n * (n - 1) / 2 + 1;
                Some((start, start + n - 1))
            }
            BlockLayout::Sizes(s) => {
                if n > s.len() {
                    return None;
                }
                let start = s[..n - 1].iter().sum::<usize>() + 1;
                Some((start, start + s[n - 1] - 1))
            }
        }
    }

    /// Index of the block containing coordinate `i`.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        let mut n = 1;
        loop {
            let (a, b) = self.block(n)?;
            if (a..=b).contains(&i) {
                return Some(n);
            }
            n += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FStarVariant {
    /// `Fₙ` reads the first `n` coordinates.
    Nested,
    /// `Fₙ` reads block `n` only.
    Blocks(BlockLayout),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FStarConfig {
    pub variant: FStarVariant,
    pub theta: ThetaRule,
}

impl FStarConfig {
    pub fn nested() -> Self {
        FStarConfig {
            variant: FStarVariant::Nested,
            theta: ThetaRule::Dyadic,
        }
    }

    pub fn blocks() -> Self {
        FStarConfig {
            variant: FStarVariant::Blocks(BlockLayout::Natural),
            theta: ThetaRule::Dyadic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate()?;
        if let FStarVariant::Blocks(BlockLayout::Sizes(s)) = &self.variant {
            if s.is_empty() || s.contains(&0) {
                return Err(Error::Parameter("block sizes must be positive".into()));
            }
        }
        Ok(())
    }

    /// Smallest `n_max` for which the finite maximum equals the supremum.
    pub fn default_n_max(&self, x: &SparseVector) -> usize {
        match &self.variant {
            FStarVariant::Nested => x.support_end(),
            FStarVariant::Blocks(layout) => x
                .entries()
                .iter()
                .filter_map(|e| layout.block_of(e.0))
                .max()
                .unwrap_or(0),
        }
    }

    /// `Fₙ(x) = −log₂ ‖Pₙ1 − θₙ Pₙx‖∞` for the configured projection `Pₙ`.
    pub fn component(&self, x: &SparseVector, n: usize) -> f64 {
        let theta = self.theta.theta(n);
        let (lo, hi) = match &self.variant {
            FStarVariant::Nested => (1, n),
            FStarVariant::Blocks(layout) => match layout.block(n) {
                Some(r) => r,
                None => return 0.0,
            },
        };
        // ‖1 − θx‖ over the coordinates lo..=hi, all of which are in [0, 1]
        let mut min_x = f64::INFINITY;
        let mut present = 0usize;
        for &(i, v) in x.entries() {
            if i >= lo && i <= hi {
                min_x = min_x.min(v);
                present += 1;
            }
        }
        if present < hi - lo + 1 {
            min_x = min_x.min(0.0);
        }
        let norm = (1.0 - theta * min_x).max(0.0);
        let v = -norm.log2();
        if v == 0.0 {
            0.0
        } else {
            v
        }
    }
}

/// `F*(x) = max_{n ≤ n_max} Fₙ(x)` on the positive part of the unit ball.
pub fn f_star(x: &SparseVector, cfg: &FStarConfig, n_max: Option<usize>) -> Result<f64> {
    cfg.validate()?;
    if x.entries().iter().any(|e| !(0.0..=1.0).contains(&e.1)) {
        return Err(Error::Parameter("F* is defined for coordinates in [0, 1]".into()));
    }
    let n_max = n_max.unwrap_or_else(|| cfg.default_n_max(x));
    Ok((1..=n_max)
        .map(|n| cfg.component(x, n))
        .fold(0.0, |acc, v| if v > acc { v } else { acc }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Omega,
    Entropy,
    SimplexMax,
    FStarBlocks,
    FStarNested,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Omega => "omega",
            Family::Entropy => "entropy",
            Family::SimplexMax => "simplex_max",
            Family::FStarBlocks => "fstar_blocks",
            Family::FStarNested => "fstar_nested",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(Family::Omega),
            "entropy" => Ok(Family::Entropy),
            "simplex_max" | "simplexmax" => Ok(Family::SimplexMax),
            "fstar_blocks" | "fstar:blocks" | "fstar" => Ok(Family::FStarBlocks),
            "fstar_nested" | "fstar:nested" => Ok(Family::FStarNested),
            other => Err(Error::Parameter(format!(
                "unknown family {other:?} (expected omega, entropy, simplex_max, fstar_blocks, fstar_nested)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    /// Value at the averaged ("flat") point.
    pub flat_value: f64,
    /// Largest value at the extreme points being averaged.
    pub extreme_max: f64,
    pub lower_bound_formula: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthTable {
    pub family: Family,
    pub rows: Vec<GrowthRow>,
}

/// Largest `n` accepted for families that allocate `2^n` coordinates.
pub const MAX_DYADIC_N: usize = 22;

/// Values at a flat average versus the extreme points it averages.
///
/// * `omega`, `entropy`: average of `e_1, …, e_{2^n}`; bound `n`.
/// * `simplex_max`: average of `e_1, …, e_n`; bound `log₂ n`.
/// * `fstar_blocks`: natural blocks, block `n` of size `n`, extreme points
///   `qᵢ = 1_I − eᵢ`, flat point `((n−1)/n)·1_I`; bound `log₂ n − 1`.
/// * `fstar_nested`: extreme points `pᵢ = Sₙ − eᵢ`, flat point `((n−1)/n)·Sₙ`;
///   bound `−log₂(1 − θₙ(n−1)/n)`.
pub fn growth_report(family: Family, n_range: impl IntoIterator<Item = usize>) -> Result<GrowthTable> {
    let mut rows = Vec::new();
    for n in n_range {
        if n == 0 {
            return Err(Error::Parameter("growth rows start at n = 1".into()));
        }
        let row = match family {
            Family::Omega | Family::Entropy => {
                if n > MAX_DYADIC_N {
                    return Err(Error::Parameter(format!(
                        "n = {n} needs 2^{n} coordinates (max n = {MAX_DYADIC_N})"
                    )));
                }
                let count = 1usize << n;
                let w = (-(n as f64)).exp2();
                let (flat, extreme) = if family == Family::Omega {
                    let flat = SparseVector::constant_on(1..=count, w)?;
                    let extreme = (1..=count)
                        .map(|i| cholewa_kominek_omega(&SparseVector::basis(i)))
                        .try_fold(0u32, |acc, v| v.map(|v| acc.max(v)))?;
                    (cholewa_kominek_omega(&flat)? as f64, extreme as f64)
                } else {
                    let flat = entropy_simplex(&vec![w; count]);
                    let mut vertex = vec![0.0; count];
                    vertex[0] = 1.0;
                    (flat, entropy_simplex(&vertex))
                };
                GrowthRow {
                    n,
                    flat_value: flat,
                    extreme_max: extreme,
                    lower_bound_formula: n as f64,
                }
            }
            Family::SimplexMax => {
                let flat = simplex_max_counterexample(&vec![1.0 / n as f64; n]);
                let mut vertex = vec![0.0; n];
                vertex[0] = 1.0;
                GrowthRow {
                    n,
                    flat_value: flat,
                    extreme_max: simplex_max_counterexample(&vertex),
                    lower_bound_formula: (n as f64).log2(),
                }
            }
            Family::FStarBlocks => {
                let cfg = FStarConfig::blocks();
                let FStarVariant::Blocks(layout) = &cfg.variant else {
                    unreachable!()
                };
                let (lo, hi) = layout.block(n).expect("natural blocks are unbounded");
                let flat = SparseVector::constant_on(lo..=hi, (n - 1) as f64 / n as f64)?;
                let mut extreme = 0.0f64;
                for i in lo..=hi {
                    let q = SparseVector::constant_on((lo..=hi).filter(|&j| j != i), 1.0)?;
                    extreme = extreme.max(f_star(&q, &cfg, None)?);
                }
                GrowthRow {
                    n,
                    flat_value: f_star(&flat, &cfg, None)?,
                    extreme_max: extreme,
                    lower_bound_formula: (n as f64).log2() - 1.0,
                }
            }
            Family::FStarNested => {
                let cfg = FStarConfig::nested();
                let flat = SparseVector::constant_on(1..=n, (n - 1) as f64 / n as f64)?;
                let mut extreme = 0.0f64;
                for i in 1..=n {
                    let p = SparseVector::constant_on((1..=n).filter(|&j| j != i), 1.0)?;
                    extreme = extreme.max(f_star(&p, &cfg, Some(n))?);
                }
                let theta = cfg.theta.theta(n);
                GrowthRow {
                    n,
                    flat_value: f_star(&flat, &cfg, Some(n))?,
                    extreme_max: extreme,
                    lower_bound_formula: -(1.0 - theta * (n - 1) as f64 / n as f64).log2(),
                }
            }
        };
        rows.push(row);
    }
    Ok(GrowthTable { family, rows })
}

impl GrowthTable {
    pub const HEADER: [&'static str; 4] = ["n", "flat_value", "extreme_max", "lower_bound_formula"];

    fn cells(row: &GrowthRow) -> [String; 4] {
        [
            row.n.to_string(),
            fmt_f64(row.flat_value),
            fmt_f64(row.extreme_max),
            fmt_f64(row.lower_bound_formula),
        ]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        crate::report::write_csv(out, &Self::HEADER, self.rows.iter().map(Self::cells))
    }

    pub fn write_dat<W: Write>(&self, out: W) -> Result<()> {
        crate::report::write_dat(
            out,
            &format!("family {}", self.family),
            &Self::HEADER,
            self.rows.iter().map(Self::cells),
        )
    }
}
