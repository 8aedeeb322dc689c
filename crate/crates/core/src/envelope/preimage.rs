//! The `(p, θ, κ)` property on finite cubes and the geometric-series
//! preimage scheme driven by a halving oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::NormKind;

fn sup(x: &[f64]) -> f64 {
    NormKind::Sup.of(x)
}

/// All `2^dim` vectors with entries `±1`.
pub fn sign_vectors(dim: usize) -> Vec<Vec<f64>> {
    (0..1u64 << dim)
        .map(|m| (0..dim).map(|k| if m >> k & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}

/// Best `t ∈ [−1, 1]` for `max_k |y_k − κ t g_k|`, searched over the
/// breakpoints of the piecewise-linear objective.
fn best_multiple(y: &[f64], g: &[f64], kappa: f64) -> (f64, f64) {
    let mut cand = vec![-1.0, 0.0, 1.0];
    for j in 0..y.len() {
        if g[j] != 0.0 {
            cand.push(y[j] / (kappa * g[j]));
        }
        for k in j + 1..y.len() {
            for (s, gs) in [(y[j] + y[k], g[j] + g[k]), (y[j] - y[k], g[j] - g[k])] {
                if gs != 0.0 {
                    cand.push(s / (kappa * gs));
                }
            }
        }
    }
    cand.into_iter()
        .map(|t| t.clamp(-1.0, 1.0))
        .map(|t| {
            let r = y.iter().zip(g).map(|(a, b)| (a - kappa * t * b).abs()).fold(0.0, f64::max);
            (r, t)
        })
        .fold((f64::INFINITY, 0.0), |best, c| if c.0 < best.0 { c } else { best })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PThetaKappaReport {
    pub p: f64,
    pub theta: f64,
    pub kappa: f64,
    /// `max ‖g‖∞` over the generators.
    pub outer_radius: f64,
    pub samples: usize,
    pub worst_residual: f64,
    pub worst_sample: Option<Vec<f64>>,
    pub passed: bool,
}

/// Certifies `y ∈ θB + κA` for each sample, with `A` the `p`-convex hull of
/// the symmetric generators and `B` their convex hull, in the sup norm.
///
/// Candidates in `A` are `a = 0` and `a = t·g` with `|t| ≤ 1`, which lie in
/// `A` for every `p`; when the generators are the sign vectors this includes
/// the rounding `a = sgn(y)/(2κ)` with residual at most `½`. A failure means no
/// candidate certified the sample, not that the property fails.
pub fn pthetakappa_check(
    generators: &[Vec<f64>],
    p: f64,
    theta: f64,
    kappa: f64,
    sample: &[Vec<f64>],
) -> Result<PThetaKappaReport> {
    if !(p > 0.0 && p <= 1.0) || !(theta >= 0.0) || !(kappa > 0.0) {
        return Err(Error::Parameter("need 0 < p ≤ 1, θ ≥ 0, κ > 0".into()));
    }
    let dim = generators.first().map_or(0, |g| g.len());
    if generators.iter().chain(sample).any(|v| v.len() != dim) {
        return Err(Error::Dimension("generators and samples must share one dimension".into()));
    }
    let outer_radius = generators.iter().map(|g| sup(g)).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    let mut worst_sample = None;
    for y in sample {
        let mut best = sup(y);
        for g in generators {
            best = best.min(best_multiple(y, g, kappa).0);
        }
        if worst_sample.is_none() || best > worst {
            worst = best;
            worst_sample = Some(y.clone());
        }
    }
    Ok(PThetaKappaReport {
        p,
        theta,
        kappa,
        outer_radius,
        samples: sample.len(),
        worst_residual: worst,
        worst_sample,
        passed: worst <= theta * outer_radius + 1e-12,
    })
}

/// Halving oracle: for `‖y‖∞ ≤ 1` returns `x` with `‖x‖ ≤ 1` and
/// `‖y − ½Tx‖∞ ≤ ½ + ε`.
pub trait HalfOracle {
    fn half(&self, y: &[f64]) -> Vec<f64>;
    /// The operator `T`.
    fn image(&self, x: &[f64]) -> Vec<f64>;
    /// The `ε` of the contract.
    fn slack(&self) -> f64;
}

/// `T = id` on the cube and `x = sgn y` (coordinatewise, `sgn 0 = 0`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SignOracle;

impl HalfOracle for SignOracle {
    fn half(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .map(|&v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
            .collect()
    }

    fn image(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn slack(&self) -> f64 {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreimageTrace {
    pub eps: f64,
    pub p: f64,
    /// Weight `(½+ε)^{i−1}` of step `i`, or 0 when the step was skipped.
    pub coefficients: Vec<f64>,
    pub steps: Vec<Vec<f64>>,
    /// `‖r_k‖∞` for `k = 0..=k_max`.
    pub residuals: Vec<f64>,
    /// `(½+ε)^k`.
    pub envelope: Vec<f64>,
    /// `½ Σ c_i x_i`.
    pub preimage: Vec<f64>,
    pub p_sum: f64,
    /// `1 / (1 − (½+ε)^p)`.
    pub p_sum_bound: f64,
}

/// Builds `x_i` with `‖y − ½ Σ (½+ε)^{i−1} T x_i‖∞ ≤ (½+ε)^k`.
///
/// Step `i` feeds the rescaled residual `r_{i−1} / (½+ε)^{i−1}` to the oracle
/// and keeps whichever of the oracle step and the zero step leaves the smaller
/// residual, so the trace is nonincreasing.
pub fn iterative_preimage(
    oracle: &dyn HalfOracle,
    y: &[f64],
    eps: f64,
    k_max: usize,
    p: f64,
) -> Result<PreimageTrace> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Parameter("ε must lie in [0, ½) for the scheme to contract".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter("p must lie in (0, 1]".into()));
    }
    if sup(y) > 1.0 {
        return Err(Error::Parameter("target must satisfy ‖y‖∞ ≤ 1".into()));
    }
    let q = 0.5 + eps;
    let contract = 0.5 + oracle.slack();
    let mut r = y.to_vec();
    let mut residuals = vec![sup(&r)];
    let mut envelope = vec![1.0];
    let mut coefficients = Vec::with_capacity(k_max);
    let mut steps = Vec::with_capacity(k_max);
    let mut preimage = vec![0.0; y.len()];
    let mut s = 1.0f64;
    for i in 1..=k_max {
        let z: Vec<f64> = r.iter().map(|v| v / s).collect();
        let x = oracle.half(&z);
        let tx = oracle.image(&x);
        let step_res: Vec<f64> = z.iter().zip(&tx).map(|(a, b)| a - 0.5 * b).collect();
        let res = sup(&step_res);
        if sup(&x) > 1.0 + 1e-12 || res > contract + 1e-12 {
            return Err(Error::Oracle {
                step: i,
                residual: res,
                bound: contract,
            });
        }
        let candidate: Vec<f64> = step_res.iter().map(|v| v * s).collect();
        if sup(&candidate) < sup(&r) {
            for (pv, xv) in preimage.iter_mut().zip(&x) {
                *pv += 0.5 * s * xv;
            }
            r = candidate;
            coefficients.push(s);
            steps.push(x);
        } else {
            coefficients.push(0.0);
            steps.push(vec![0.0; y.len()]);
        }
        residuals.push(sup(&r));
        s *= q;
        envelope.push(s);
    }
    let p_sum = coefficients.iter().map(|c| c.powf(p)).sum();
    Ok(PreimageTrace {
        eps,
        p,
        coefficients,
        steps,
        residuals,
        envelope,
        preimage,
        p_sum,
        p_sum_bound: 1.0 / (1.0 - q.powf(p)),
    })
}
