//! Convexity, affinity, Jensen and quasi-additivity defects over explicit test sets.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallery::{NormKind, SparseVector};
use crate::grid::{ConvexTriple, ConvexTriples, MidpointPair, MidpointPairs, SampledFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Convex,
    Affine,
    Jensen,
    QuasiAdditive,
}

/// The test item at which the supremum was first attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Triple {
        x_id: u32,
        y_id: u32,
        t_num: u32,
        t_pow: u8,
        combo_id: u32,
    },
    Pair {
        x_id: u32,
        y_id: u32,
        mid_id: u32,
    },
    /// Off-grid points; `t` is present for convex combinations.
    Vectors {
        x: SparseVector,
        y: SparseVector,
        #[serde(skip_serializing_if = "Option::is_none")]
        t: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    pub kind: DefectKind,
    pub value: f64,
    /// `None` only for an empty test set.
    pub witness: Option<Witness>,
    pub test_set_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl DefectReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("defect reports serialize")
    }

    /// Recomputes the defect expression at a grid witness.
    pub fn reevaluate(&self, sf: &SampledFunction) -> Option<f64> {
        let g = match (&self.witness, self.kind) {
            (Some(Witness::Triple { x_id, y_id, t_num, t_pow, combo_id }), kind) => {
                let tr = ConvexTriple {
                    x_id: *x_id,
                    y_id: *y_id,
                    t: crate::grid::DyadicWeight { num: *t_num, pow: *t_pow },
                    combo_id: *combo_id,
                };
                let raw = convex_gap(&sf.values, &tr);
                if kind == DefectKind::Affine {
                    raw.abs()
                } else {
                    raw
                }
            }
            (Some(Witness::Pair { x_id, y_id, mid_id }), _) => jensen_gap(
                &sf.values,
                &MidpointPair { x_id: *x_id, y_id: *y_id, mid_id: *mid_id },
            ),
            _ => return None,
        };
        Some(g.max(0.0))
    }
}

fn convex_gap(f: &[f64], tr: &ConvexTriple) -> f64 {
    let t = tr.t.value();
    let s = tr.t.complement().value();
    f[tr.combo_id as usize] - (t * f[tr.x_id as usize] + s * f[tr.y_id as usize])
}

fn jensen_gap(f: &[f64], p: &MidpointPair) -> f64 {
    (f[p.mid_id as usize] - (0.5 * f[p.x_id as usize] + 0.5 * f[p.y_id as usize])).abs()
}

/// `max(0, sup gap)` with the first maximizer in iteration order.
fn first_max<I, W>(items: I) -> (f64, Option<W>, usize)
where
    I: IntoIterator<Item = (f64, W)>,
{
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    let mut count = 0;
    for (g, w) in items {
        count += 1;
        if g > best {
            best = g;
            witness = Some(w);
        }
    }
    (best.max(0.0), witness, count)
}

fn check_domain(sf: &SampledFunction, fingerprint: u64, max_id: Option<u32>) -> Result<()> {
    if sf.domain.fingerprint() != fingerprint || max_id.is_some_and(|m| m as usize >= sf.values.len()) {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

fn triple_witness(tr: &ConvexTriple) -> Witness {
    Witness::Triple {
        x_id: tr.x_id,
        y_id: tr.y_id,
        t_num: tr.t.num,
        t_pow: tr.t.pow,
        combo_id: tr.combo_id,
    }
}

fn triple_defect(sf: &SampledFunction, triples: &ConvexTriples, kind: DefectKind) -> Result<DefectReport> {
    let max_id = triples.items.iter().map(|t| t.x_id.max(t.y_id).max(t.combo_id)).max();
    check_domain(sf, triples.fingerprint, max_id)?;
    let (value, witness, n) = first_max(triples.items.iter().map(|tr| {
        let g = convex_gap(&sf.values, tr);
        let g = if kind == DefectKind::Affine { g.abs() } else { g };
        (g, triple_witness(tr))
    }));
    Ok(DefectReport {
        kind,
        value,
        witness,
        test_set_size: n,
        seed: None,
    })
}

/// `max(0, sup f(combo) − t f(x) − (1−t) f(y))` over the triples.
pub fn convexity_defect(sf: &SampledFunction, triples: &ConvexTriples) -> Result<DefectReport> {
    triple_defect(sf, triples, DefectKind::Convex)
}

/// `sup |f(combo) − t f(x) − (1−t) f(y)|` over the triples.
pub fn affinity_defect(sf: &SampledFunction, triples: &ConvexTriples) -> Result<DefectReport> {
    triple_defect(sf, triples, DefectKind::Affine)
}

/// `sup |f((x+y)/2) − (f(x) + f(y))/2|` over the pairs.
pub fn jensen_defect(sf: &SampledFunction, pairs: &MidpointPairs) -> Result<DefectReport> {
    let max_id = pairs.items.iter().map(|p| p.x_id.max(p.y_id).max(p.mid_id)).max();
    check_domain(sf, pairs.fingerprint, max_id)?;
    let (value, witness, n) = first_max(pairs.items.iter().map(|p| {
        (
            jensen_gap(&sf.values, p),
            Witness::Pair { x_id: p.x_id, y_id: p.y_id, mid_id: p.mid_id },
        )
    }));
    Ok(DefectReport {
        kind: DefectKind::Jensen,
        value,
        witness,
        test_set_size: n,
        seed: None,
    })
}

/// A convex combination `t·x + (1−t)·y` of sparse vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseTriple {
    pub x: SparseVector,
    pub y: SparseVector,
    pub t: f64,
}

fn eval_checked(f: &impl Fn(&SparseVector) -> Result<f64>, x: &SparseVector) -> Result<f64> {
    let v = f(x)?;
    if !v.is_finite() {
        return Err(Error::Evaluation {
            at: format!("{:?}", x.entries()),
            value: v,
        });
    }
    Ok(v)
}

/// Convexity defect of an evaluator over sampled sparse triples.
pub fn sparse_convexity_defect(
    f: impl Fn(&SparseVector) -> Result<f64>,
    triples: &[SparseTriple],
    seed: Option<u64>,
) -> Result<DefectReport> {
    let mut items = Vec::with_capacity(triples.len());
    for tr in triples {
        let combo = tr.x.convex_combination(&tr.y, tr.t);
        let g = eval_checked(&f, &combo)?
            - (tr.t * eval_checked(&f, &tr.x)? + (1.0 - tr.t) * eval_checked(&f, &tr.y)?);
        items.push((
            g,
            Witness::Vectors {
                x: tr.x.clone(),
                y: tr.y.clone(),
                t: Some(tr.t),
            },
        ));
    }
    let (value, witness, n) = first_max(items);
    Ok(DefectReport {
        kind: DefectKind::Convex,
        value,
        witness,
        test_set_size: n,
        seed,
    })
}

/// `sup |f(x+y) − f(x) − f(y)| / (‖x‖ + ‖y‖)`, skipping `x = y = 0`.
pub fn quasi_additivity_constant(
    f: impl Fn(&SparseVector) -> Result<f64>,
    pairs: &[(SparseVector, SparseVector)],
    norm: NormKind,
    seed: Option<u64>,
) -> Result<DefectReport> {
    let mut items = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let denom = x.norm(norm) + y.norm(norm);
        if denom == 0.0 {
            continue;
        }
        let g = (eval_checked(&f, &x.add(y))? - eval_checked(&f, x)? - eval_checked(&f, y)?).abs() / denom;
        items.push((
            g,
            Witness::Vectors {
                x: x.clone(),
                y: y.clone(),
                t: None,
            },
        ));
    }
    let (value, witness, n) = first_max(items);
    Ok(DefectReport {
        kind: DefectKind::QuasiAdditive,
        value,
        witness,
        test_set_size: n,
        seed,
    })
}

/// Seeded generator of dyadic sparse vectors.
///
/// Values are `±u / 2^(bits + s)` with `u ∈ [1, 2^bits]` and `s ∈ [0, max_shift]`,
/// so sums and dyadic combinations of sampled vectors stay exact in `f64`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseSampler {
    pub seed: u64,
    pub max_index: usize,
    pub max_support: usize,
    pub nonnegative: bool,
    pub bits: u32,
    pub max_shift: u32,
}

impl SparseSampler {
    pub fn new(seed: u64) -> Self {
        SparseSampler {
            seed,
            max_index: 12,
            max_support: 6,
            nonnegative: false,
            bits: 10,
            max_shift: 8,
        }
    }

    fn vector(&self, rng: &mut ChaCha8Rng) -> SparseVector {
        let support = rng.gen_range(1..=self.max_support.min(self.max_index));
        let mut entries = Vec::with_capacity(support);
        for _ in 0..support {
            let i = rng.gen_range(1..=self.max_index);
            let u = rng.gen_range(1..=1u64 << self.bits) as f64;
            let s = rng.gen_range(0..=self.max_shift) as i32;
            let mut v = u * (-((self.bits as i32) + s) as f64).exp2();
            if !self.nonnegative && rng.gen_bool(0.5) {
                v = -v;
            }
            entries.push((i, v));
        }
        SparseVector::new(entries).expect("sampled entries are valid")
    }

    fn nonzero_vector(&self, rng: &mut ChaCha8Rng) -> SparseVector {
        loop {
            let v = self.vector(rng);
            if !v.is_zero() {
                return v;
            }
        }
    }

    pub fn pairs(&self, count: usize) -> Vec<(SparseVector, SparseVector)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| (self.nonzero_vector(&mut rng), self.nonzero_vector(&mut rng)))
            .collect()
    }

    /// Triples with dyadic `t = a / 2^bits`.
    pub fn triples(&self, count: usize) -> Vec<SparseTriple> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let x = self.nonzero_vector(&mut rng);
                let y = self.nonzero_vector(&mut rng);
                let t = rng.gen_range(0..=1u64 << self.bits) as f64 * (-(self.bits as f64)).exp2();
                SparseTriple { x, y, t }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `|f(Σxᵢ) − Σf(xᵢ)| ≤ Q · Σ i·ϱ(xᵢ)` (1-based `i`).
pub fn chain_inequality_check(
    f: impl Fn(&SparseVector) -> Result<f64>,
    x_list: &[SparseVector],
    q: f64,
    gauge: impl Fn(&SparseVector) -> f64,
) -> Result<ChainReport> {
    if x_list.is_empty() {
        return Ok(ChainReport {
            lhs: 0.0,
            rhs: 0.0,
            holds: true,
        });
    }
    let mut sum = SparseVector::zero();
    let mut parts = 0.0;
    let mut rhs = 0.0;
    for (i, x) in x_list.iter().enumerate() {
        sum = sum.add(x);
        parts += eval_checked(&f, x)?;
        rhs += (i + 1) as f64 * gauge(x);
    }
    let lhs = (eval_checked(&f, &sum)? - parts).abs();
    let rhs = q * rhs;
    Ok(ChainReport {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}
