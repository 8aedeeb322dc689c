//! Named functions addressable from the command line.

use approxconvex::gallery::{
    cholewa_kominek_omega, entropy_simplex, f_star, kalton_map, neg_log_norm, ribe, simplex_max_counterexample,
    FStarConfig, NormKind, SparseVector, ThetaRule,
};
use approxconvex::{Error, Result};

pub const REGISTRY: &[&str] = &[
    "entropy",
    "ribe",
    "kalton",
    "affine:a1,...,ad,b",
    "sqnorm",
    "supnorm",
    "abs",
    "neglog:sup|l1|l2",
    "simplexmax",
    "omega",
    "fstar:nested|blocks[:theta=dyadic]",
    "zero",
];

pub type Evaluator = Box<dyn Fn(&[f64]) -> Result<f64>>;

fn usage(name: &str, why: &str) -> Error {
    Error::Parameter(format!(
        "unknown function {name:?} ({why}); registry: {}",
        REGISTRY.join(", ")
    ))
}

/// Resolves `name` for points with `dim` coordinates.
pub fn lookup(name: &str, dim: usize) -> Result<Evaluator> {
    let (head, rest) = name.split_once(':').unwrap_or((name, ""));
    let ev: Evaluator = match (head, rest) {
        ("entropy", "") => Box::new(|x| Ok(entropy_simplex(x))),
        ("ribe", "") => Box::new(|x| Ok(ribe(&SparseVector::from_dense(x)))),
        ("kalton", "") => Box::new(|x| Ok(kalton_map(&SparseVector::from_dense(x)))),
        ("sqnorm", "") => Box::new(|x| Ok(x.iter().map(|v| v * v).sum())),
        ("supnorm" | "abs", "") => Box::new(|x| Ok(NormKind::Sup.of(x))),
        ("simplexmax", "") => Box::new(|x| Ok(simplex_max_counterexample(x))),
        ("omega", "") => Box::new(|x| Ok(cholewa_kominek_omega(&SparseVector::from_dense(x))? as f64)),
        ("zero", "") => Box::new(|_| Ok(0.0)),
        ("neglog", norm) => {
            let kind: NormKind = norm.parse()?;
            Box::new(move |x| neg_log_norm(x, kind))
        }
        ("affine", coeffs) => {
            let c: Vec<f64> = coeffs
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| usage(name, "affine coefficients must be numbers"))?;
            if c.len() != dim + 1 {
                return Err(Error::Parameter(format!(
                    "affine:{coeffs} has {} numbers; dimension {dim} needs {} slopes and a constant",
                    c.len(),
                    dim
                )));
            }
            Box::new(move |x| Ok(c[..dim].iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + c[dim]))
        }
        ("fstar", spec) => {
            let mut parts = spec.split(':');
            let mut cfg = match parts.next() {
                Some("nested") => FStarConfig::nested(),
                Some("blocks") | Some("") | None => FStarConfig::blocks(),
                Some(other) => return Err(usage(name, &format!("variant {other:?}"))),
            };
            for p in parts {
                match p {
                    "theta=dyadic" => cfg.theta = ThetaRule::Dyadic,
                    other => return Err(usage(name, &format!("option {other:?}"))),
                }
            }
            Box::new(move |x| f_star(&SparseVector::from_dense(x), &cfg, None))
        }
        _ => return Err(usage(name, "not registered")),
    };
    Ok(ev)
}
