//! The covering system `Ω(ε, n)`: all `n`-subsets of `{1, …, (1+ε)n}` and the
//! incidence sets `A_i = {ω : i ∈ ω}`.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{binomial, SizeCaps};

/// Parses `"a/b"`, `"a"` or a finite decimal such as `"0.5"`.
pub fn parse_ratio(s: &str) -> Result<Rational64> {
    let bad = || Error::Parameter(format!("cannot read {s:?} as a rational number"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let mag = whole.abs() * den + f;
        return Ok(Rational64::new(if neg { -mag } else { mag }, den));
    }
    Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?))
}

pub fn fmt_ratio(r: &Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `Ω(ε, n)` with `ω` stored as bitmasks over `S = {1, …, m}` (bit `i−1` for `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringSystem {
    eps: Rational64,
    n: usize,
    m: usize,
    omega: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct CoveringDoc {
    eps: String,
    n: usize,
}

impl Serialize for CoveringSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CoveringDoc {
            eps: fmt_ratio(&self.eps),
            n: self.n,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoveringSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = CoveringDoc::deserialize(d)?;
        let eps = parse_ratio(&doc.eps).map_err(serde::de::Error::custom)?;
        make_covering_system(eps, doc.n).map_err(serde::de::Error::custom)
    }
}

/// Ground sets beyond 63 elements do not fit the bitmask representation.
pub const MAX_GROUND_SET: usize = 63;

pub fn make_covering_system(eps: Rational64, n: usize) -> Result<CoveringSystem> {
    make_covering_system_capped(eps, n, &SizeCaps::from_env())
}

pub fn make_covering_system_capped(eps: Rational64, n: usize, caps: &SizeCaps) -> Result<CoveringSystem> {
    if eps <= Rational64::zero() || n == 0 {
        return Err(Error::Parameter("need ε > 0 and n ≥ 1".into()));
    }
    let m = (Rational64::from_integer(1) + eps) * Rational64::from_integer(n as i64);
    if !m.is_integer() {
        return Err(Error::Parameter(format!(
            "(1+ε)·n = {} is not an integer",
            fmt_ratio(&m)
        )));
    }
    let m = m.to_integer() as usize;
    if m > MAX_GROUND_SET {
        return Err(Error::Parameter(format!("ground set of size {m} exceeds {MAX_GROUND_SET}")));
    }
    let count = binomial(m as u64, n as u64).unwrap_or(u128::MAX);
    if count > caps.max_points {
        return Err(Error::SizeLimit {
            what: "covering system Ω",
            count,
            cap: caps.max_points,
        });
    }
    let mut omega = Vec::with_capacity(count as usize);
    // n-subsets in lexicographic order of their sorted elements
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        omega.push(idx.iter().fold(0u64, |acc, &i| acc | 1 << i));
        let mut i = n;
        loop {
            if i == 0 {
                let cs = CoveringSystem { eps, n, m, omega };
                cs.check_invariants()?;
                return Ok(cs);
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

impl CoveringSystem {
    pub fn eps(&self) -> Rational64 {
        self.eps
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps.to_f64().expect("small rationals convert")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `|S| = (1+ε)n`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `εn`.
    pub fn eps_n(&self) -> usize {
        self.m - self.n
    }

    pub fn omega_len(&self) -> usize {
        self.omega.len()
    }

    pub fn omega_masks(&self) -> &[u64] {
        &self.omega
    }

    /// Elements of `ω` (1-based).
    pub fn omega(&self, w: usize) -> Vec<usize> {
        mask_elements(self.omega[w])
    }

    /// Whether `ω ∈ A_i` (1-based `i`).
    pub fn contains(&self, i: usize, w: usize) -> bool {
        self.omega[w] >> (i - 1) & 1 == 1
    }

    /// Indices of the `ω` in `A_i`.
    pub fn a_set(&self, i: usize) -> Vec<usize> {
        (0..self.omega.len()).filter(|&w| self.contains(i, w)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("covering systems serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parameter(format!("bad covering system JSON: {e}")))
    }

    fn check_invariants(&self) -> Result<()> {
        let expect_omega = binomial(self.m as u64, self.n as u64).unwrap_or(0);
        let expect_a = binomial(self.m as u64 - 1, self.n as u64 - 1).unwrap_or(0);
        if self.omega.len() as u128 != expect_omega {
            return Err(Error::Verification(format!(
                "|Ω| = {} but C({}, {}) = {expect_omega}",
                self.omega.len(),
                self.m,
                self.n
            )));
        }
        for i in 1..=self.m {
            let a = self.a_set(i).len() as u128;
            if a != expect_a {
                return Err(Error::Verification(format!("|A_{i}| = {a}, expected {expect_a}")));
            }
        }
        let ps = verify_partition_sum(self);
        if !ps.holds {
            return Err(Error::Verification("Σ 1_{A_i} ≠ n·1_Ω".into()));
        }
        Ok(())
    }
}

impl fmt::Display for CoveringSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ω(ε={}, n={})", fmt_ratio(&self.eps), self.n)
    }
}

impl FromStr for CoveringSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CoveringSystem::from_json(s)
    }
}

pub(crate) fn mask_elements(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnionWitness {
    pub j: Vec<usize>,
    /// First `ω` (in `Ω` order) outside `∪_{i∈J} A_i`, `None` if `J` covers.
    pub omega: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallUnionReport {
    pub checked: usize,
    pub all_pass: bool,
    pub witnesses: Vec<UnionWitness>,
}

/// Scans every `J ⊆ S` with `|J| ≤ εn` and looks for an uncovered `ω`.
pub fn verify_small_union(cs: &CoveringSystem) -> SmallUnionReport {
    let mut witnesses = Vec::new();
    let limit = cs.eps_n();
    for size in 0..=limit {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let jmask = idx.iter().fold(0u64, |acc, &i| acc | 1 << i);
            // ω ∈ A_i for some i ∈ J iff ω meets J
            let uncovered = cs.omega.iter().find(|&&w| w & jmask == 0);
            witnesses.push(UnionWitness {
                j: idx.iter().map(|i| i + 1).collect(),
                omega: uncovered.map(|&w| mask_elements(w)),
            });
            let mut i = size;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if idx[i] < cs.m - size + i {
                    idx[i] += 1;
                    for k in i + 1..size {
                        idx[k] = idx[k - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    SmallUnionReport {
        checked: witnesses.len(),
        all_pass: witnesses.iter().all(|w| w.omega.is_some()),
        witnesses,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionSumReport {
    /// `Σ_i 1_{A_i}(ω)` per `ω`.
    pub counts: Vec<usize>,
    pub holds: bool,
}

/// Checks `Σ_i 1_{A_i} = n·1_Ω` pointwise.
pub fn verify_partition_sum(cs: &CoveringSystem) -> PartitionSumReport {
    let counts: Vec<usize> = (0..cs.omega.len())
        .map(|w| (1..=cs.m).filter(|&i| cs.contains(i, w)).count())
        .collect();
    let holds = counts.iter().all(|&c| c == cs.n);
    PartitionSumReport { counts, holds }
}
