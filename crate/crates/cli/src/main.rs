//! `approxconvex`: batch reports for approximate convexity experiments.
//!
//! Exit codes: 0 when every verification passed, 1 when one failed (summary
//! on stderr), 2 on usage or runtime errors.

mod manifest;
mod registry;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use approxconvex::defect::{affinity_defect, convexity_defect, jensen_defect, DefectReport};
use approxconvex::envelope::{
    envelope_gap_report, iterative_preimage, make_covering_system, parse_ratio, verify_partition_sum,
    verify_small_union, SignOracle,
};
use approxconvex::gallery::{growth_report, Family};
use approxconvex::grid::{
    enumerate_convex_triples, enumerate_midpoint_pairs, BodyKind, GridDomain, GridSpec, SampledFunction, SizeCaps,
};
use approxconvex::homogenization::{affine_recovery_experiment, DirectionSet, LiftOptions};
use approxconvex::lp::{best_affine_fit, best_jensen_fit, distance_to_convex};
use approxconvex::report::fmt_f64;
use approxconvex::{Error, Result};

use manifest::Run;

#[derive(Parser, Debug)]
#[command(name = "approxconvex", version, about = "Approximate convexity reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convexity, affinity or Jensen defect of a function on a grid.
    Defect(DefectArgs),
    /// Distance from a function to the convex, affine or Jensen class.
    Distance(DistanceArgs),
    /// Growth table for a counterexample family.
    Gallery(GalleryArgs),
    /// Affine recovery through the radial lift.
    Lift(LiftArgs),
    /// Covering-system lemmas and the quasi-norm/envelope gap table.
    Talagrand(TalagrandArgs),
    /// Geometric-series preimage trace for the sign oracle.
    Preimage(PreimageArgs),
}

#[derive(Args, Debug, Serialize)]
struct DomainArgs {
    /// simplex, cube, ball_sup, ball_euclid or positive
    #[arg(long)]
    body: String,
    #[arg(long)]
    dim: usize,
    /// Coordinates are integers over 2^k.
    #[arg(long)]
    k: u32,
    /// Drop the origin from the grid.
    #[arg(long)]
    exclude_origin: bool,
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
struct Source {
    /// Registered function name, e.g. entropy or affine:1,0.
    #[arg(long = "fn")]
    func: Option<String>,
    /// JSON file with one value per grid point (array, or {"values": [...]}).
    #[arg(long)]
    values: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum DefectChoice {
    Convex,
    Affine,
    Jensen,
}

#[derive(Args, Debug, Serialize)]
struct DefectArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum)]
    kind: DefectChoice,
    /// Weights t are multiples of 2^-J (default: k).
    #[arg(long)]
    t_power: Option<u8>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct DistanceArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum)]
    class: DefectChoice,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct GalleryArgs {
    /// omega, entropy, simplexmax, fstar:blocks or fstar:nested
    #[arg(long)]
    family: String,
    /// Inclusive range a..b or a comma list.
    #[arg(long, default_value = "1..8")]
    n: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Directions {
    Sphere,
    All,
}

#[derive(Args, Debug, Serialize)]
struct LiftArgs {
    #[arg(long, default_value = "cube")]
    body: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Base function; a seeded random affine map when omitted.
    #[arg(long = "fn")]
    func: Option<String>,
    /// Amplitude of the uniform noise added to the base function.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Assumed constant in the stability bound.
    #[arg(long = "M", default_value_t = 200.0)]
    m: f64,
    #[arg(long, value_enum, default_value = "sphere")]
    directions: Directions,
    #[arg(long)]
    t_power: Option<u8>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TalagrandArgs {
    /// Ratio such as 1, 1/2 or 0.5.
    #[arg(long, default_value = "1")]
    eps: String,
    /// Comma list of n values.
    #[arg(long, default_value = "2,3,4")]
    n: String,
    #[arg(long, default_value = "1/2")]
    p: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct PreimageArgs {
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Comma list in [-1, 1]; seeded random when omitted.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1/2")]
    p: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn build_domain(d: &DomainArgs) -> Result<Arc<GridDomain>> {
    let body: BodyKind = d.body.parse()?;
    let dom = GridSpec::new(body, d.dim, d.k).build(&SizeCaps::from_env())?;
    let dom = if d.exclude_origin {
        dom.filtered(|p| p.iter().any(|&v| v != 0))?
    } else {
        dom
    };
    Ok(Arc::new(dom))
}

fn evaluate(dom: &Arc<GridDomain>, name: &str) -> Result<SampledFunction> {
    let f = registry::lookup(name, dom.dim())?;
    let values = (0..dom.len())
        .map(|id| {
            let x = dom.coords(id);
            f(&x).map_err(|e| match e {
                Error::Parameter(msg) => Error::Parameter(format!("{name} at {x:?}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(dom.clone(), values)
}

fn load_values(dom: &Arc<GridDomain>, path: &PathBuf) -> Result<SampledFunction> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))?;
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
    let arr = match &json {
        serde_json::Value::Array(_) => &json,
        serde_json::Value::Object(m) if m.contains_key("values") => &m["values"],
        _ => {
            return Err(Error::Parameter(format!(
                "{}: expected an array of numbers or an object with \"values\"",
                path.display()
            )))
        }
    };
    let values: Vec<f64> = serde_json::from_value(arr.clone())
        .map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))?;
    if values.len() != dom.len() {
        return Err(Error::Dimension(format!(
            "{} has {} values but the grid has {} points",
            path.display(),
            values.len(),
            dom.len()
        )));
    }
    SampledFunction::new(dom.clone(), values)
}

fn source_function(dom: &Arc<GridDomain>, src: &Source) -> Result<SampledFunction> {
    match (&src.func, &src.values) {
        (Some(name), _) => evaluate(dom, name),
        (None, Some(path)) => load_values(dom, path),
        (None, None) => Err(Error::Parameter("pass --fn NAME or --values FILE".into())),
    }
}

fn measure(sf: &SampledFunction, kind: DefectChoice, t_power: u8) -> Result<DefectReport> {
    match kind {
        DefectChoice::Convex => convexity_defect(sf, &enumerate_convex_triples(&sf.domain, t_power)?),
        DefectChoice::Affine => affinity_defect(sf, &enumerate_convex_triples(&sf.domain, t_power)?),
        DefectChoice::Jensen => jensen_defect(sf, &enumerate_midpoint_pairs(&sf.domain)?),
    }
}

fn default_t_power(k: u32, t_power: Option<u8>) -> Result<u8> {
    match t_power {
        Some(j) => Ok(j),
        None => u8::try_from(k).map_err(|_| Error::Parameter(format!("k = {k} is too large; pass --t-power"))),
    }
}

fn cmd_defect(a: &DefectArgs) -> Result<Run> {
    let mut run = Run::new("defect", params(a), None, &a.out)?;
    let dom = build_domain(&a.domain)?;
    let sf = source_function(&dom, &a.source)?;
    let rep = measure(&sf, a.kind, default_t_power(a.domain.k, a.t_power)?)?;
    run.write_json("defect.json", &rep)?;
    match rep.reevaluate(&sf) {
        Some(v) => run.check(
            "witness_reevaluates",
            v == rep.value,
            format!("witness gives {}, report {}", fmt_f64(v), fmt_f64(rep.value)),
        ),
        None => run.check(
            "witness_reevaluates",
            rep.value == 0.0,
            format!("no witness, value {}", fmt_f64(rep.value)),
        ),
    }
    Ok(run)
}

#[derive(Serialize)]
struct DistanceOutput<'a> {
    class: DefectChoice,
    distance: f64,
    nearest: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    affine_coeffs: Option<Vec<f64>>,
}

fn cmd_distance(a: &DistanceArgs) -> Result<Run> {
    const DEFECT_TOL: f64 = 1e-7;
    const MATCH_TOL: f64 = 1e-9;
    let mut run = Run::new("distance", params(a), None, &a.out)?;
    let dom = build_domain(&a.domain)?;
    let sf = source_function(&dom, &a.source)?;
    let t_power = default_t_power(a.domain.k, None)?;
    let (distance, nearest, coeffs) = match a.class {
        DefectChoice::Convex => {
            let cd = distance_to_convex(&sf)?;
            (cd.distance, cd.nearest, None)
        }
        DefectChoice::Affine => {
            let fit = best_affine_fit(&sf)?;
            let g = SampledFunction::new(dom.clone(), (0..dom.len()).map(|id| fit.eval(&dom.coords(id))).collect())?;
            (fit.deviation, g, Some(fit.coeffs))
        }
        DefectChoice::Jensen => {
            let fit = best_jensen_fit(&sf)?;
            (fit.distance, fit.nearest, None)
        }
    };
    run.write_json(
        "distance.json",
        &DistanceOutput {
            class: a.class,
            distance,
            nearest: &nearest.values,
            affine_coeffs: coeffs,
        },
    )?;
    let defect = measure(&nearest, a.class, t_power)?.value;
    run.check(
        "nearest_in_class",
        defect <= DEFECT_TOL,
        format!("defect of the returned function {}", fmt_f64(defect)),
    );
    let gap = sf.max_abs_diff(&nearest);
    run.check(
        "distance_attained",
        (gap - distance).abs() <= MATCH_TOL * (1.0 + distance.abs()),
        format!("max |f - g| = {}, reported {}", fmt_f64(gap), fmt_f64(distance)),
    );
    Ok(run)
}

/// `a..b` (inclusive) or `a,b,c`.
fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parameter(format!("cannot read {s:?} as a range a..b or a comma list"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn cmd_gallery(a: &GalleryArgs) -> Result<Run> {
    let family: Family = a.family.parse()?;
    let ns = parse_n_list(&a.n)?;
    let mut run = Run::new("gallery", params(a), None, &a.out)?;
    let table = growth_report(family, ns)?;
    let stem = format!("gallery_{}", family.name());
    run.write_with(&format!("{stem}.csv"), |b| table.write_csv(b))?;
    run.write_with(&format!("{stem}.dat"), |b| table.write_dat(b))?;
    for row in &table.rows {
        run.check(
            &format!("n={} flat>=bound", row.n),
            row.flat_value >= row.lower_bound_formula - 1e-9,
            format!("{} vs {}", fmt_f64(row.flat_value), fmt_f64(row.lower_bound_formula)),
        );
        // nested extreme values grow by design and are reported, not checked
        if family != Family::FStarNested {
            run.check(
                &format!("n={} extreme=0", row.n),
                row.extreme_max == 0.0,
                format!("extreme max {}", fmt_f64(row.extreme_max)),
            );
        }
    }
    Ok(run)
}

fn cmd_lift(a: &LiftArgs) -> Result<Run> {
    if !(a.noise >= 0.0 && a.noise.is_finite()) {
        return Err(Error::Parameter("--noise must be a finite nonnegative number".into()));
    }
    let mut run = Run::new("lift", params(a), Some(a.seed), &a.out)?;
    let domain = DomainArgs {
        body: a.body.clone(),
        dim: a.dim,
        k: a.k,
        exclude_origin: false,
    };
    let dom = build_domain(&domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let base = match &a.func {
        Some(name) => evaluate(&dom, name)?,
        None => {
            let c: Vec<f64> = (0..=dom.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let vals = (0..dom.len())
                .map(|id| dom.coords(id).iter().zip(&c).map(|(x, a)| a * x).sum::<f64>() + c[dom.dim()])
                .collect();
            SampledFunction::new(dom.clone(), vals)?
        }
    };
    let noise: Vec<f64> = (0..dom.len()).map(|_| a.noise * rng.gen_range(-1.0..=1.0)).collect();
    let noisy = base.map(|id, v| v + noise[id])?;
    let opts = LiftOptions {
        directions: match a.directions {
            Directions::Sphere => DirectionSet::SphereGrid,
            Directions::All => DirectionSet::AllGridDirections,
        },
        ..LiftOptions::default()
    };
    let rep = affine_recovery_experiment(&noisy, a.m, default_t_power(a.k, a.t_power)?, &opts)?;
    run.write_json("recovery.json", &rep)?;
    run.check(
        "bound_holds",
        rep.bound_holds,
        format!("d = {} vs bound {}", fmt_f64(rep.measured_d), fmt_f64(rep.theoretical_bound)),
    );
    Ok(run)
}

#[derive(Serialize)]
struct CoveringSummary {
    n: usize,
    m: usize,
    omega_len: usize,
    small_unions_checked: usize,
    small_unions_fail_to_cover: bool,
    partition_sum_holds: bool,
    uncovered_witnesses: Vec<(Vec<usize>, Option<Vec<usize>>)>,
}

fn cmd_talagrand(a: &TalagrandArgs) -> Result<Run> {
    let eps = parse_ratio(&a.eps)?;
    let p = parse_ratio(&a.p)?;
    let ns = parse_n_list(&a.n)?;
    let mut run = Run::new("talagrand", params(a), None, &a.out)?;
    let mut summaries = Vec::new();
    for &n in &ns {
        let cs = make_covering_system(eps, n)?;
        let small = verify_small_union(&cs);
        let part = verify_partition_sum(&cs);
        run.check(&format!("n={n} small_union"), small.all_pass, format!("{} subsets J checked", small.checked));
        run.check(&format!("n={n} partition_sum"), part.holds, "sum of indicators equals n on every omega");
        summaries.push(CoveringSummary {
            n,
            m: cs.m(),
            omega_len: cs.omega_len(),
            small_unions_checked: small.checked,
            small_unions_fail_to_cover: small.all_pass,
            partition_sum_holds: part.holds,
            uncovered_witnesses: small.witnesses.into_iter().map(|w| (w.j, w.omega)).collect(),
        });
    }
    let table = envelope_gap_report(eps, &ns, p)?;
    for row in &table.rows {
        run.check(
            &format!("n={} gap_bounds", row.n),
            row.holds,
            format!(
                "quasi-norm {} >= {}, ratio {} >= {}",
                fmt_f64(row.quasi_norm),
                fmt_f64(row.lower_bound),
                fmt_f64(row.ratio),
                fmt_f64(row.ratio_bound)
            ),
        );
    }
    let stem = format!("talagrand_eps{eps}_p{p}").replace('/', "_");
    run.write_json(&format!("{stem}_lemmas.json"), &summaries)?;
    run.write_with(&format!("{stem}_gap.csv"), |b| table.write_csv(b))?;
    run.write_with(&format!("{stem}_gap.dat"), |b| table.write_dat(b))?;
    Ok(run)
}

fn cmd_preimage(a: &PreimageArgs) -> Result<Run> {
    let p = ratio_f64(parse_ratio(&a.p)?);
    let mut run = Run::new("preimage", params(a), Some(a.seed), &a.out)?;
    let y: Vec<f64> = match &a.target {
        Some(s) => {
            let y = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parameter(format!("--target {s:?} is not a comma list of numbers")))?;
            if y.len() != a.dim {
                return Err(Error::Dimension(format!("--target has {} entries, --dim is {}", y.len(), a.dim)));
            }
            y
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..a.dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()
        }
    };
    let tr = iterative_preimage(&SignOracle, &y, a.eps, a.k, p)?;
    run.write_json("preimage.json", &tr)?;
    let rows = (0..tr.residuals.len()).map(|k| {
        let c = if k == 0 { 0.0 } else { tr.coefficients[k - 1] };
        [k.to_string(), fmt_f64(tr.residuals[k]), fmt_f64(tr.envelope[k]), fmt_f64(c)]
    });
    let header = ["k", "residual", "envelope", "coefficient"];
    let rows: Vec<_> = rows.collect();
    run.write_with("preimage_residuals.csv", |b| approxconvex::report::write_csv(b, &header, rows.clone()))?;
    run.write_with("preimage_residuals.dat", |b| {
        approxconvex::report::write_dat(b, &format!("preimage eps {} p {}", a.eps, p), &header, rows)
    })?;
    let worst = tr
        .residuals
        .iter()
        .zip(&tr.envelope)
        .enumerate()
        .find(|(_, (r, e))| **r > **e * (1.0 + 1e-12));
    run.check(
        "residual_below_envelope",
        worst.is_none(),
        match worst {
            Some((k, (r, e))) => format!("step {k}: {} > {}", fmt_f64(*r), fmt_f64(*e)),
            None => format!("final residual {}", fmt_f64(*tr.residuals.last().unwrap())),
        },
    );
    run.check(
        "p_sum_bounded",
        tr.p_sum <= tr.p_sum_bound + 1e-9,
        format!("{} vs {}", fmt_f64(tr.p_sum), fmt_f64(tr.p_sum_bound)),
    );
    Ok(run)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Defect(a) => cmd_defect(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Gallery(a) => cmd_gallery(a),
        Command::Lift(a) => cmd_lift(a),
        Command::Talagrand(a) => cmd_talagrand(a),
        Command::Preimage(a) => cmd_preimage(a),
    };
    match result.and_then(Run::finish) {
        Ok(failed) if failed.is_empty() => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{} verification(s) failed:", failed.len());
            for c in &failed {
                eprintln!("  {}: {}", c.name, c.detail);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
