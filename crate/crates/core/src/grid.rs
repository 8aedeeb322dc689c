//! Dyadic grids on convex bodies and the convex-combination test sets built on them.
//!
//! Every coordinate is stored as an integer numerator over the implied
//! denominator `2^denom_power`, so grid membership of a combination is an
//! integer question and never depends on floating comparisons.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of grid points.
pub const DEFAULT_MAX_POINTS: u128 = 2_000_000;
/// Default cap on the number of enumerated triples or pairs.
pub const DEFAULT_MAX_TRIPLES: u128 = 100_000_000;
/// Default cap on emitted Carathéodory constraints.
pub const DEFAULT_MAX_CONSTRAINTS: u128 = 5_000_000;

pub const ENV_MAX_POINTS: &str = "APPROXCONVEX_MAX_POINTS";
pub const ENV_MAX_TRIPLES: &str = "APPROXCONVEX_MAX_TRIPLES";
pub const ENV_MAX_CONSTRAINTS: &str = "APPROXCONVEX_MAX_CONSTRAINTS";

/// Hard limits on enumeration sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCaps {
    pub max_points: u128,
    pub max_triples: u128,
    pub max_constraints: u128,
}

impl Default for SizeCaps {
    fn default() -> Self {
        SizeCaps {
            max_points: DEFAULT_MAX_POINTS,
            max_triples: DEFAULT_MAX_TRIPLES,
            max_constraints: DEFAULT_MAX_CONSTRAINTS,
        }
    }
}

impl SizeCaps {
    /// Defaults overridden by the `APPROXCONVEX_MAX_*` environment variables.
    pub fn from_env() -> Self {
        fn read(name: &str, default: u128) -> u128 {
            std::env::var(name)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .unwrap_or(default)
        }
        SizeCaps {
            max_points: read(ENV_MAX_POINTS, DEFAULT_MAX_POINTS),
            max_triples: read(ENV_MAX_TRIPLES, DEFAULT_MAX_TRIPLES),
            max_constraints: read(ENV_MAX_CONSTRAINTS, DEFAULT_MAX_CONSTRAINTS),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Simplex,
    Cube,
    BallSup,
    BallEuclid,
    PositiveConeSection,
}

impl BodyKind {
    pub fn name(self) -> &'static str {
        match self {
            BodyKind::Simplex => "simplex",
            BodyKind::Cube => "cube",
            BodyKind::BallSup => "ball_sup",
            BodyKind::BallEuclid => "ball_euclid",
            BodyKind::PositiveConeSection => "positive_cone_section",
        }
    }
}

impl fmt::Display for BodyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BodyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(BodyKind::Simplex),
            "cube" => Ok(BodyKind::Cube),
            "ball_sup" | "ball-sup" => Ok(BodyKind::BallSup),
            "ball_euclid" | "ball-euclid" => Ok(BodyKind::BallEuclid),
            "positive_cone_section" | "positive" | "positive-section" => {
                Ok(BodyKind::PositiveConeSection)
            }
            other => Err(Error::Parameter(format!(
                "unknown body kind {other:?} (expected simplex, cube, ball_sup, ball_euclid, positive)"
            ))),
        }
    }
}

/// A finite set of dyadic points inside a named convex body.
#[derive(Clone, Debug)]
pub struct GridDomain {
    body_kind: BodyKind,
    dim: usize,
    denom_power: u32,
    points: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
    /// Coordinates that parametrize the affine hull injectively.
    hull_coords: Vec<usize>,
    fingerprint: u64,
}

#[derive(Serialize, Deserialize)]
struct GridDomainDoc {
    body_kind: BodyKind,
    dim: usize,
    denom_power: u32,
    points: Vec<Vec<i64>>,
}

impl PartialEq for GridDomain {
    fn eq(&self, other: &Self) -> bool {
        self.body_kind == other.body_kind
            && self.dim == other.dim
            && self.denom_power == other.denom_power
            && self.points == other.points
    }
}

impl Serialize for GridDomain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridDomainDoc {
            body_kind: self.body_kind,
            dim: self.dim,
            denom_power: self.denom_power,
            points: self.points.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridDomain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = GridDomainDoc::deserialize(d)?;
        GridDomain::from_points(doc.body_kind, doc.dim, doc.denom_power, doc.points)
            .map_err(serde::de::Error::custom)
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// `C(n, k)` in u128, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn scale(denom_power: u32) -> Result<i64> {
    if denom_power > 40 {
        return Err(Error::Parameter(format!(
            "denominator power {denom_power} is too large (max 40)"
        )));
    }
    Ok(1i64 << denom_power)
}

impl GridDomain {
    /// Builds a domain from explicit numerators, validating body membership.
    pub fn from_points(
        body_kind: BodyKind,
        dim: usize,
        denom_power: u32,
        points: Vec<Vec<i64>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        let n = scale(denom_power)?;
        let mut index = HashMap::with_capacity(points.len());
        for (id, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Dimension(format!(
                    "point {id} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if !in_body(body_kind, p, n) {
                return Err(Error::Parameter(format!(
                    "point {p:?} lies outside the {body_kind} body"
                )));
            }
            if index.insert(p.clone(), id).is_some() {
                return Err(Error::Parameter(format!("duplicate point {p:?}")));
            }
        }
        let hull_coords = hull_coordinates(&points, dim);
        let fingerprint = fingerprint(body_kind, dim, denom_power, &points);
        Ok(GridDomain {
            body_kind,
            dim,
            denom_power,
            points,
            index,
            hull_coords,
            fingerprint,
        })
    }

    pub fn body_kind(&self) -> BodyKind {
        self.body_kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn denom_power(&self) -> u32 {
        self.denom_power
    }

    /// The implied denominator `2^denom_power`.
    pub fn denominator(&self) -> i64 {
        1i64 << self.denom_power
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn numerators(&self, id: usize) -> &[i64] {
        &self.points[id]
    }

    pub fn coords(&self, id: usize) -> Vec<f64> {
        let d = self.denominator() as f64;
        self.points[id].iter().map(|&m| m as f64 / d).collect()
    }

    pub fn id_of(&self, numerators: &[i64]) -> Option<usize> {
        self.index.get(numerators).copied()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Coordinate indices on which projection is injective over the affine hull.
    pub fn hull_coords(&self) -> &[usize] {
        &self.hull_coords
    }

    /// Dimension of the affine hull of the points.
    pub fn affine_dim(&self) -> usize {
        self.hull_coords.len()
    }

    /// Numerators restricted to [`Self::hull_coords`].
    pub fn hull_point(&self, id: usize) -> Vec<i64> {
        self.hull_coords.iter().map(|&c| self.points[id][c]).collect()
    }

    /// A new domain keeping only points for which `keep` holds.
    pub fn filtered(&self, keep: impl Fn(&[i64]) -> bool) -> Result<GridDomain> {
        let pts = self.points.iter().filter(|p| keep(p)).cloned().collect();
        GridDomain::from_points(self.body_kind, self.dim, self.denom_power, pts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid domain serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parameter(format!("bad domain JSON: {e}")))
    }
}

fn in_body(body: BodyKind, p: &[i64], n: i64) -> bool {
    match body {
        BodyKind::Simplex => p.iter().all(|&m| m >= 0) && p.iter().sum::<i64>() == n,
        BodyKind::Cube | BodyKind::BallSup => p.iter().all(|&m| m.abs() <= n),
        BodyKind::BallEuclid => {
            let sq: i128 = p.iter().map(|&m| (m as i128) * (m as i128)).sum();
            sq <= (n as i128) * (n as i128)
        }
        BodyKind::PositiveConeSection => p.iter().all(|&m| (0..=n).contains(&m)),
    }
}

fn fingerprint(body: BodyKind, dim: usize, k: u32, points: &[Vec<i64>]) -> u64 {
    let mut h = DefaultHasher::new();
    body.hash(&mut h);
    dim.hash(&mut h);
    k.hash(&mut h);
    points.hash(&mut h);
    h.finish()
}

/// Pivot columns of the row-echelon form of the difference vectors.
fn hull_coordinates(points: &[Vec<i64>], dim: usize) -> Vec<usize> {
    let Some(base) = points.first() else {
        return Vec::new();
    };
    // echelon rows keyed by pivot column
    let mut basis: Vec<(usize, Vec<i128>)> = Vec::new();
    for p in &points[1..] {
        if basis.len() == dim {
            break;
        }
        let mut row: Vec<i128> = p.iter().zip(base).map(|(&a, &b)| (a - b) as i128).collect();
        for (col, brow) in &basis {
            if row[*col] != 0 {
                let (a, b) = (brow[*col], row[*col]);
                for (r, &br) in row.iter_mut().zip(brow) {
                    *r = *r * a - br * b;
                }
                normalize_row(&mut row);
            }
        }
        if let Some(col) = row.iter().position(|&v| v != 0) {
            basis.push((col, row));
        }
    }
    let mut cols: Vec<usize> = basis.into_iter().map(|(c, _)| c).collect();
    cols.sort_unstable();
    cols
}

fn normalize_row(row: &mut [i128]) {
    let g = row.iter().fold(0i128, |g, &v| num_integer::Integer::gcd(&g, &v));
    if g > 1 {
        row.iter_mut().for_each(|v| *v /= g);
    }
}

/// Parameters of a grid construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub body_kind: BodyKind,
    pub dim: usize,
    pub denom_power: u32,
}

impl GridSpec {
    pub fn new(body_kind: BodyKind, dim: usize, denom_power: u32) -> Self {
        GridSpec { body_kind, dim, denom_power }
    }

    /// Number of candidate points before any body filter.
    pub fn candidate_count(&self) -> Option<u128> {
        let n = 1u128 << self.denom_power.min(100);
        match self.body_kind {
            BodyKind::Simplex => binomial(n as u64 + self.dim as u64 - 1, self.dim as u64 - 1),
            BodyKind::Cube | BodyKind::BallSup | BodyKind::BallEuclid => {
                checked_pow(2 * n + 1, self.dim)
            }
            BodyKind::PositiveConeSection => checked_pow(n + 1, self.dim),
        }
    }

    pub fn build(&self, caps: &SizeCaps) -> Result<GridDomain> {
        if self.dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        let n = scale(self.denom_power)?;
        let count = self.candidate_count().unwrap_or(u128::MAX);
        if count > caps.max_points {
            return Err(Error::SizeLimit {
                what: "grid",
                count,
                cap: caps.max_points,
            });
        }
        let points = match self.body_kind {
            BodyKind::Simplex => simplex_points(self.dim, n),
            BodyKind::Cube | BodyKind::BallSup => box_points(self.dim, -n, n),
            BodyKind::BallEuclid => {
                let mut pts = box_points(self.dim, -n, n);
                pts.retain(|p| in_body(BodyKind::BallEuclid, p, n));
                pts
            }
            BodyKind::PositiveConeSection => box_points(self.dim, 0, n),
        };
        GridDomain::from_points(self.body_kind, self.dim, self.denom_power, points)
    }
}

/// Compositions of `n` into `parts` nonnegative parts, lexicographically ascending.
fn simplex_points(parts: usize, n: i64) -> Vec<Vec<i64>> {
    fn rec(prefix: &mut Vec<i64>, parts: usize, remaining: i64, out: &mut Vec<Vec<i64>>) {
        if prefix.len() + 1 == parts {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(prefix, parts, remaining - v, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(parts), parts, n, &mut out);
    out
}

fn box_points(dim: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![lo; dim];
    loop {
        out.push(cur.clone());
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < hi {
                cur[i] += 1;
                break;
            }
            cur[i] = lo;
        }
    }
}

pub fn make_simplex_grid(n_coords: usize, denom_power: u32) -> Result<GridDomain> {
    GridSpec::new(BodyKind::Simplex, n_coords, denom_power).build(&SizeCaps::from_env())
}

pub fn make_cube_grid(dim: usize, denom_power: u32) -> Result<GridDomain> {
    GridSpec::new(BodyKind::Cube, dim, denom_power).build(&SizeCaps::from_env())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallNorm {
    Sup,
    Euclid,
}

pub fn make_ball_grid(dim: usize, denom_power: u32, norm: BallNorm) -> Result<GridDomain> {
    let body = match norm {
        BallNorm::Sup => BodyKind::BallSup,
        BallNorm::Euclid => BodyKind::BallEuclid,
    };
    GridSpec::new(body, dim, denom_power).build(&SizeCaps::from_env())
}

pub fn make_positive_section_grid(dim: usize, denom_power: u32) -> Result<GridDomain> {
    GridSpec::new(BodyKind::PositiveConeSection, dim, denom_power).build(&SizeCaps::from_env())
}

/// The weight `num / 2^pow` of a convex combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicWeight {
    pub num: u32,
    pub pow: u8,
}

impl DyadicWeight {
    pub fn value(self) -> f64 {
        self.num as f64 / (1u64 << self.pow) as f64
    }

    pub fn complement(self) -> DyadicWeight {
        DyadicWeight {
            num: (1u32 << self.pow) - self.num,
            pow: self.pow,
        }
    }
}

/// `combo = t·x + (1−t)·y`, exactly, with all three on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConvexTriple {
    pub x_id: u32,
    pub y_id: u32,
    pub t: DyadicWeight,
    pub combo_id: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MidpointPair {
    pub x_id: u32,
    pub y_id: u32,
    pub mid_id: u32,
}

/// Convex triples tagged with the domain they were enumerated on.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexTriples {
    pub fingerprint: u64,
    pub t_power: u8,
    pub items: Vec<ConvexTriple>,
}

/// Midpoint pairs tagged with the domain they were enumerated on.
#[derive(Clone, Debug, PartialEq)]
pub struct MidpointPairs {
    pub fingerprint: u64,
    pub items: Vec<MidpointPair>,
}

impl ConvexTriples {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The triples with `t = 1/2`, viewed as midpoint pairs.
    pub fn midpoint_subset(&self) -> MidpointPairs {
        let items = self
            .items
            .iter()
            .filter(|tr| tr.t.pow > 0 && (tr.t.num as u64) << 1 == 1u64 << tr.t.pow)
            .map(|tr| MidpointPair {
                x_id: tr.x_id,
                y_id: tr.y_id,
                mid_id: tr.combo_id,
            })
            .collect();
        MidpointPairs {
            fingerprint: self.fingerprint,
            items,
        }
    }
}

impl MidpointPairs {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn two_adic_valuation(diff: &[i64]) -> Option<u32> {
    diff.iter()
        .filter(|&&d| d != 0)
        .map(|d| d.trailing_zeros())
        .min()
}

/// Streams the triples of [`enumerate_convex_triples`] without collecting them.
pub fn convex_triples_iter(
    domain: &GridDomain,
    t_power: u8,
) -> impl Iterator<Item = ConvexTriple> + '_ {
    let full = 1i64 << t_power;
    let n = domain.len();
    let mut buf = vec![0i64; domain.dim()];
    (0..n).flat_map(move |x| (0..n).map(move |y| (x, y))).flat_map(move |(x, y)| {
        let px = &domain.points[x];
        let py = &domain.points[y];
        let diff: Vec<i64> = px.iter().zip(py).map(|(a, b)| a - b).collect();
        let step = match two_adic_valuation(&diff) {
            None => 1,
            Some(v) if v >= t_power as u32 => 1,
            Some(v) => 1i64 << (t_power as u32 - v),
        };
        let mut found = Vec::new();
        let mut a = 0i64;
        while a <= full {
            // combo = y + a·(x − y)/2^j, integral by the valuation step
            for (b, (&yy, &d)) in buf.iter_mut().zip(py.iter().zip(&diff)) {
                *b = yy + (a * d) / full;
            }
            if let Some(c) = domain.id_of(&buf) {
                found.push(ConvexTriple {
                    x_id: x as u32,
                    y_id: y as u32,
                    t: DyadicWeight {
                        num: a as u32,
                        pow: t_power,
                    },
                    combo_id: c as u32,
                });
            }
            a += step;
        }
        found
    })
}

/// All `(x, y, t = a/2^j)` whose combination lands exactly on the grid,
/// ordered lexicographically by `(x_id, y_id, a)`.
pub fn enumerate_convex_triples(domain: &GridDomain, t_power: u8) -> Result<ConvexTriples> {
    enumerate_convex_triples_capped(domain, t_power, &SizeCaps::from_env())
}

pub fn enumerate_convex_triples_capped(
    domain: &GridDomain,
    t_power: u8,
    caps: &SizeCaps,
) -> Result<ConvexTriples> {
    if t_power > 24 {
        return Err(Error::Parameter(format!("t power {t_power} is too large (max 24)")));
    }
    let mut items = Vec::new();
    for tr in convex_triples_iter(domain, t_power) {
        items.push(tr);
        if items.len() as u128 > caps.max_triples {
            return Err(Error::SizeLimit {
                what: "convex triples",
                count: items.len() as u128,
                cap: caps.max_triples,
            });
        }
    }
    Ok(ConvexTriples {
        fingerprint: domain.fingerprint(),
        t_power,
        items,
    })
}

/// All ordered pairs whose midpoint is a grid point, ordered by `(x_id, y_id)`.
pub fn enumerate_midpoint_pairs(domain: &GridDomain) -> Result<MidpointPairs> {
    let caps = SizeCaps::from_env();
    let mut items = Vec::new();
    let mut buf = vec![0i64; domain.dim()];
    for (x, px) in domain.points.iter().enumerate() {
        for (y, py) in domain.points.iter().enumerate() {
            if px.iter().zip(py).any(|(a, b)| (a + b) % 2 != 0) {
                continue;
            }
            for (b, (a, c)) in buf.iter_mut().zip(px.iter().zip(py)) {
                *b = (a + c) / 2;
            }
            if let Some(m) = domain.id_of(&buf) {
                items.push(MidpointPair {
                    x_id: x as u32,
                    y_id: y as u32,
                    mid_id: m as u32,
                });
                if items.len() as u128 > caps.max_triples {
                    return Err(Error::SizeLimit {
                        what: "midpoint pairs",
                        count: items.len() as u128,
                        cap: caps.max_triples,
                    });
                }
            }
        }
    }
    Ok(MidpointPairs {
        fingerprint: domain.fingerprint(),
        items,
    })
}

/// Real values attached to every point of a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub domain: Arc<GridDomain>,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::Dimension(format!(
                "{} values for a domain of {} points",
                values.len(),
                domain.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Evaluation {
                at: format!("{:?}", domain.coords(i)),
                value: *v,
            });
        }
        Ok(SampledFunction { domain, values })
    }

    /// Pointwise map keeping the domain.
    pub fn map(&self, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        SampledFunction::new(self.domain.clone(), values)
    }

    pub fn max_abs_diff(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates `evaluator` at the real coordinates of every point.
pub fn sample_function(
    domain: &Arc<GridDomain>,
    evaluator: impl Fn(&[f64]) -> f64,
) -> Result<SampledFunction> {
    let mut values = Vec::with_capacity(domain.len());
    for id in 0..domain.len() {
        let x = domain.coords(id);
        let v = evaluator(&x);
        if !v.is_finite() {
            return Err(Error::Evaluation {
                at: format!("{x:?}"),
                value: v,
            });
        }
        values.push(v);
    }
    Ok(SampledFunction {
        domain: domain.clone(),
        values,
    })
}
