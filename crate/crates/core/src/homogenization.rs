//! Radial lifts built from one-dimensional best fits, their quasi-linearity,
//! and the constant accounting of the stability bounds.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::defect::{affinity_defect, DefectKind, DefectReport, Witness};
use crate::error::{Error, Result};
use crate::gallery::{NormKind, SparseVector};
use crate::grid::{enumerate_convex_triples, BodyKind, GridDomain, SampledFunction};
use crate::lp::{best_jensen_fit, distance::minimax_affine};

/// Which rays through the origin carry a one-dimensional fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSet {
    /// Directions of grid points on the unit sphere of the body's norm.
    #[default]
    SphereGrid,
    /// Directions of every nonzero grid point.
    AllGridDirections,
}

/// How a lift treats points that lie on no sampled ray.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OffRayPolicy {
    #[default]
    Forbid,
    /// Project onto the line of the closest direction (by angle).
    NearestDirection,
}

/// `1`: the fit is affine and the lift is linear along each ray.
/// `2`: the fit is Jensen and the lift is dyadically homogeneous, `f*(2x) = 2f*(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HomogeneityDegree {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineFit {
    /// Primitive integer direction, first nonzero entry positive.
    pub direction: Vec<i64>,
    /// Lift value per unit step `direction / 2^k`.
    pub slope: f64,
    /// Best-fit deviation on the line (with the constant term).
    pub fit_error: f64,
    /// `max |f − f*|` on the line, after dropping the constant.
    pub lift_error: f64,
    /// Multiples `j` of the step that are grid points.
    pub steps: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialLift {
    pub degree: HomogeneityDegree,
    pub norm: NormKind,
    pub denom_power: u32,
    pub lines: Vec<LineFit>,
    /// `min` over lines of the shorter reach from the origin.
    pub r0: f64,
    /// `max` norm over the grid.
    #[serde(rename = "R0")]
    pub big_r0: f64,
    #[serde(skip)]
    by_direction: BTreeMap<Vec<i64>, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftValue {
    pub value: f64,
    /// Angle in radians between the point and the ray used; 0 on sampled rays.
    pub angular_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftOptions {
    pub directions: DirectionSet,
    /// Lines with fewer grid points are skipped.
    pub min_points_per_line: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            directions: DirectionSet::SphereGrid,
            min_points_per_line: 3,
        }
    }
}

/// The norm whose unit ball the body is.
pub fn body_norm(kind: BodyKind) -> Result<NormKind> {
    match kind {
        BodyKind::Cube | BodyKind::BallSup => Ok(NormKind::Sup),
        BodyKind::BallEuclid => Ok(NormKind::L2),
        other => Err(Error::Precondition(format!(
            "radial lifts need a body with 0 in its interior, got {other}"
        ))),
    }
}

/// `(primitive direction, multiplier)` with the first nonzero entry positive.
fn primitive(v: &[i64]) -> Option<(Vec<i64>, i64)> {
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    if g == 0 {
        return None;
    }
    let first = *v.iter().find(|&&x| x != 0)?;
    let g = if first < 0 { -g } else { g };
    Some((v.iter().map(|x| x / g).collect(), g))
}

fn int_norm(v: &[i64], norm: NormKind, denom: f64) -> f64 {
    let x: Vec<f64> = v.iter().map(|&a| a as f64 / denom).collect();
    norm.of(&x)
}

fn on_sphere(v: &[i64], norm: NormKind, denom: i64) -> bool {
    match norm {
        NormKind::Sup => v.iter().map(|a| a.abs()).max() == Some(denom),
        NormKind::L2 => v.iter().map(|a| (*a as i128) * (*a as i128)).sum::<i128>() == (denom as i128).pow(2),
        NormKind::L1 => v.iter().map(|a| a.abs()).sum::<i64>() == denom,
    }
}

struct Line {
    direction: Vec<i64>,
    steps: Vec<i64>,
    ids: Vec<usize>,
}

fn collect_lines(dom: &GridDomain, norm: NormKind, opts: &LiftOptions) -> Result<(Vec<Line>, f64, f64)> {
    let denom = dom.denominator();
    if dom.id_of(&vec![0; dom.dim()]).is_none() {
        return Err(Error::Precondition("the origin is not a grid point".into()));
    }
    let mut lines: BTreeMap<Vec<i64>, Vec<(i64, usize)>> = BTreeMap::new();
    let mut wanted: BTreeMap<Vec<i64>, ()> = BTreeMap::new();
    let mut big_r0 = 0.0f64;
    for (id, p) in dom.points().iter().enumerate() {
        big_r0 = big_r0.max(int_norm(p, norm, denom as f64));
        let Some((dir, mult)) = primitive(p) else {
            continue;
        };
        if opts.directions == DirectionSet::AllGridDirections || on_sphere(p, norm, denom) {
            wanted.insert(dir.clone(), ());
        }
        lines.entry(dir).or_default().push((mult, id));
    }
    let zero = dom.id_of(&vec![0; dom.dim()]).expect("checked above");
    let mut out = Vec::new();
    let mut r0 = f64::INFINITY;
    for (dir, mut pts) in lines {
        if !wanted.contains_key(&dir) {
            continue;
        }
        pts.push((0, zero));
        pts.sort_unstable();
        let lo = pts.first().expect("nonempty").0;
        let hi = pts.last().expect("nonempty").0;
        let unit = int_norm(&dir, norm, denom as f64);
        let reach = (-lo).min(hi) as f64 * unit;
        if reach == 0.0 {
            return Err(Error::Precondition(format!(
                "0 is not interior: the ray along {dir:?} is one-sided (r0 = 0)"
            )));
        }
        if pts.len() < opts.min_points_per_line {
            continue;
        }
        r0 = r0.min(reach);
        out.push(Line {
            direction: dir,
            steps: pts.iter().map(|p| p.0).collect(),
            ids: pts.iter().map(|p| p.1).collect(),
        });
    }
    if out.is_empty() {
        return Err(Error::Precondition("no sampled direction has enough grid points".into()));
    }
    Ok((out, r0, big_r0))
}

fn build(
    sf: &SampledFunction,
    opts: &LiftOptions,
    degree: HomogeneityDegree,
) -> Result<RadialLift> {
    let dom = &sf.domain;
    let norm = body_norm(dom.body_kind())?;
    let (lines, r0, big_r0) = collect_lines(dom, norm, opts)?;
    let mut fits = Vec::with_capacity(lines.len());
    for line in lines {
        let vals: Vec<f64> = line.ids.iter().map(|&i| sf.values[i]).collect();
        let (slope, fit_error) = match degree {
            HomogeneityDegree::One => {
                let pts: Vec<Vec<f64>> = line.steps.iter().map(|&j| vec![j as f64]).collect();
                let fit = minimax_affine(&pts, &vals, true)?;
                (fit.coeffs[0], fit.deviation)
            }
            HomogeneityDegree::Two => jensen_line_fit(&line.steps, &vals)?,
        };
        let lift_error = line
            .steps
            .iter()
            .zip(&vals)
            .map(|(&j, v)| (v - slope * j as f64).abs())
            .fold(0.0, f64::max);
        fits.push(LineFit {
            direction: line.direction,
            slope,
            fit_error,
            lift_error,
            steps: line.steps,
        });
    }
    let by_direction = fits.iter().enumerate().map(|(i, l)| (l.direction.clone(), i)).collect();
    Ok(RadialLift {
        degree,
        norm,
        denom_power: dom.denom_power(),
        lines: fits,
        r0,
        big_r0,
        by_direction,
    })
}

/// Best Jensen fit `g` on the line, then `f*(j·u) = j·(g(j_max) − g(j_min)) / (j_max − j_min)`,
/// which equals `g − g(0)` whenever `g` is Jensen on the consecutive steps.
fn jensen_line_fit(steps: &[i64], vals: &[f64]) -> Result<(f64, f64)> {
    let span = steps.iter().map(|j| j.abs()).max().unwrap_or(1).max(1) as u64;
    let p = 64 - (span - 1).leading_zeros().min(63);
    let pts: Vec<Vec<i64>> = steps.iter().map(|&j| vec![j]).collect();
    let dom = Arc::new(GridDomain::from_points(BodyKind::Cube, 1, p, pts)?);
    let sf = SampledFunction::new(dom, vals.to_vec())?;
    let fit = best_jensen_fit(&sf)?;
    let (first, last) = (0, steps.len() - 1);
    let slope = (fit.nearest.values[last] - fit.nearest.values[first]) / (steps[last] - steps[first]) as f64;
    Ok((slope, fit.distance))
}

/// Per-ray Chebyshev affine fits with the constant dropped.
pub fn radial_affine_lift(sf: &SampledFunction, opts: &LiftOptions) -> Result<RadialLift> {
    build(sf, opts, HomogeneityDegree::One)
}

/// Per-ray best Jensen fits, homogenized along dyadic multiples.
pub fn radial_jensen_lift(sf: &SampledFunction, opts: &LiftOptions) -> Result<RadialLift> {
    build(sf, opts, HomogeneityDegree::Two)
}

impl RadialLift {
    pub fn per_line_max_error(&self) -> f64 {
        self.lines.iter().map(|l| l.fit_error).fold(0.0, f64::max)
    }

    pub fn max_lift_error(&self) -> f64 {
        self.lines.iter().map(|l| l.lift_error).fold(0.0, f64::max)
    }

    /// Exact evaluation at `numerators / 2^denom_power`; `None` off the sampled rays.
    pub fn eval_exact(&self, numerators: &[i64], denom_power: u32) -> Option<f64> {
        let Some((dir, mult)) = primitive(numerators) else {
            return Some(0.0);
        };
        let &i = self.by_direction.get(&dir)?;
        let scale = (self.denom_power as f64 - denom_power as f64).exp2();
        Some(self.lines[i].slope * mult as f64 * scale)
    }

    /// Evaluation at a real point under the given policy.
    pub fn eval(&self, x: &[f64], policy: OffRayPolicy) -> Result<LiftValue> {
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xn == 0.0 {
            return Ok(LiftValue { value: 0.0, angular_error: 0.0 });
        }
        let mut best: Option<(f64, usize, f64)> = None; // (angle, line, lambda)
        let step = (-(self.denom_power as f64)).exp2();
        for (i, l) in self.lines.iter().enumerate() {
            let u: Vec<f64> = l.direction.iter().map(|&a| a as f64 * step).collect();
            let uu: f64 = u.iter().map(|a| a * a).sum();
            let lambda = u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / uu;
            let resid = u.iter().zip(x).map(|(a, b)| (b - lambda * a).powi(2)).sum::<f64>().sqrt();
            // atan2 stays accurate near 0, unlike acos of the cosine
            let angle = resid.atan2(lambda.abs() * uu.sqrt());
            if best.is_none_or(|b| angle < b.0) {
                best = Some((angle, i, lambda));
            }
        }
        let (angle, i, lambda) = best.expect("lifts have at least one line");
        if angle > 1e-12 && policy == OffRayPolicy::Forbid {
            return Err(Error::OffRay(format!(
                "{x:?} ({angle:.3e} rad from the nearest one)"
            )));
        }
        Ok(LiftValue {
            value: self.lines[i].slope * lambda,
            angular_error: if angle > 1e-12 { angle } else { 0.0 },
        })
    }
}

/// Grid point pairs `(x, y)`, `x ≤ y` by id, with `x`, `y` and `x + y` on sampled rays.
pub fn ray_pairs(lift: &RadialLift, dom: &GridDomain) -> Vec<(usize, usize)> {
    let on = |v: &[i64]| lift.eval_exact(v, dom.denom_power()).is_some();
    let n = dom.len();
    let mut out = Vec::new();
    for a in 0..n {
        let pa = dom.numerators(a);
        if !on(pa) {
            continue;
        }
        for b in a..n {
            let pb = dom.numerators(b);
            let s: Vec<i64> = pa.iter().zip(pb).map(|(x, y)| x + y).collect();
            if on(pb) && on(&s) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Measured quasi-additivity constant of the lift over grid pairs.
pub fn lift_quasilinearity(lift: &RadialLift, dom: &GridDomain, pairs: &[(usize, usize)]) -> Result<DefectReport> {
    let k = dom.denom_power();
    let ev = |v: &[i64]| {
        lift.eval_exact(v, k)
            .ok_or_else(|| Error::OffRay(format!("{v:?}")))
    };
    let denom = dom.denominator() as f64;
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    let mut count = 0;
    for &(a, b) in pairs {
        let (pa, pb) = (dom.numerators(a), dom.numerators(b));
        let nrm = int_norm(pa, lift.norm, denom) + int_norm(pb, lift.norm, denom);
        if nrm == 0.0 {
            continue;
        }
        let s: Vec<i64> = pa.iter().zip(pb).map(|(x, y)| x + y).collect();
        let g = (ev(&s)? - ev(pa)? - ev(pb)?).abs() / nrm;
        count += 1;
        if g > best {
            best = g;
            witness = Some((a, b));
        }
    }
    Ok(DefectReport {
        kind: DefectKind::QuasiAdditive,
        value: best.max(0.0),
        witness: witness.map(|(a, b)| Witness::Vectors {
            x: SparseVector::from_dense(&dom.coords(a)),
            y: SparseVector::from_dense(&dom.coords(b)),
            t: None,
        }),
        test_set_size: count,
        seed: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityBudget {
    pub epsilon: f64,
    pub r0: f64,
    #[serde(rename = "R0")]
    pub big_r0: f64,
    /// Assumed K-space constant.
    #[serde(rename = "M")]
    pub m: f64,
    pub delta: Option<f64>,
}

impl StabilityBudget {
    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon >= 0.0
            && self.r0 > 0.0
            && self.r0 <= self.big_r0
            && self.m > 0.0
            && self.delta.is_none_or(|d| d > 0.0)
            && [self.epsilon, self.big_r0, self.m].iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::Parameter(
                "budget needs ε ≥ 0, 0 < r0 ≤ R0, M > 0 and δ > 0 when given".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityBounds {
    /// `(6·M·R0/r0 + 2)·ε`.
    pub affine: f64,
    /// `(4 + R0/δ)·ε`.
    pub jensen: Option<f64>,
    /// `2·affine`, valid in finite dimension.
    pub jensen_via_affine: f64,
}

pub fn stability_bound_report(budget: &StabilityBudget, want_jensen: bool) -> Result<StabilityBounds> {
    budget.validate()?;
    let jensen = match (want_jensen, budget.delta) {
        (true, None) => {
            return Err(Error::Parameter("the Jensen bound needs δ (--delta)".into()));
        }
        (_, d) => d.map(|d| (4.0 + budget.big_r0 / d) * budget.epsilon),
    };
    let affine = (6.0 * budget.m * budget.big_r0 / budget.r0 + 2.0) * budget.epsilon;
    Ok(StabilityBounds {
        affine,
        jensen,
        jensen_via_affine: 2.0 * affine,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub epsilon: f64,
    pub r0: f64,
    #[serde(rename = "R0")]
    pub big_r0: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub per_line_max_error: f64,
    #[serde(rename = "measured_Q")]
    pub measured_q: f64,
    pub measured_d: f64,
    pub theoretical_bound: f64,
    /// Slopes followed by the constant.
    pub coeffs: Vec<f64>,
    pub bound_holds: bool,
}

impl RecoveryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Measures ε, lifts radially, fits one linear map to the lift, adds the best
/// constant, and compares `sup |f − a|` with the affine stability bound.
pub fn affine_recovery_experiment(
    sf: &SampledFunction,
    m_assumed: f64,
    t_power: u8,
    opts: &LiftOptions,
) -> Result<RecoveryReport> {
    let dom = &sf.domain;
    let triples = enumerate_convex_triples(dom, t_power)?;
    let epsilon = affinity_defect(sf, &triples)?.value;
    let lift = radial_affine_lift(sf, opts)?;

    let k = dom.denom_power();
    let mut pts = Vec::new();
    let mut lv = Vec::new();
    for id in 0..dom.len() {
        if let Some(v) = lift.eval_exact(dom.numerators(id), k) {
            pts.push(dom.coords(id));
            lv.push(v);
        }
    }
    let linear = minimax_affine(&pts, &lv, false)?;
    let slopes = &linear.coeffs[..dom.dim()];
    let resid: Vec<f64> = (0..dom.len())
        .map(|id| {
            let x = dom.coords(id);
            sf.values[id] - slopes.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    let hi = resid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = resid.iter().copied().fold(f64::INFINITY, f64::min);
    let constant = (hi + lo) / 2.0;
    let measured_d = (hi - lo) / 2.0;

    let pairs = ray_pairs(&lift, dom);
    let measured_q = lift_quasilinearity(&lift, dom, &pairs)?.value;
    let budget = StabilityBudget {
        epsilon,
        r0: lift.r0,
        big_r0: lift.big_r0,
        m: m_assumed,
        delta: None,
    };
    let theoretical_bound = stability_bound_report(&budget, false)?.affine;
    let mut coeffs = slopes.to_vec();
    coeffs.push(constant);
    Ok(RecoveryReport {
        epsilon,
        r0: lift.r0,
        big_r0: lift.big_r0,
        m: m_assumed,
        per_line_max_error: lift.per_line_max_error(),
        measured_q,
        measured_d,
        theoretical_bound,
        coeffs,
        bound_holds: measured_d <= theoretical_bound,
    })
}
