//! The five subcommands. Each merges its flags with the config file,
//! resolves defaults, and echoes the resolved settings in its report.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use ellcover::characterize::{
    build_xi_cover, default_direction_count, derive_constants, directions, engulf_check, inner_property_check,
    quasi_convexity_certify, roundtrip_equivalence, InnerOptions, RoundtripOptions,
};
use ellcover::cover::{
    engulf_constant, shape_constants_convert, theta0_case_audit, union_engulf, validate_shape_geometric,
    validate_shape_norm, validate_volume, EngulfOptions, Theta0Case, UnionHints,
};
use ellcover::distance::{ahlfors_certify, symmetry_check, theta0_case, triangle_constant, AhlforsOptions};
use ellcover::sampling::Region;
use ellcover::{CertReport, Cover, QuasiDistance, Sampler};

use crate::config::merge;
use crate::select::{self, CoverKind, MetricKind};
use crate::{CliError, Outcome};

fn seed_required(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Usage("--seed is required for this command".into()))
}

fn positive(name: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        return Err(CliError::Usage(format!("--{name} must be positive")));
    }
    Ok(v)
}

fn echo<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("settings serialise")
}

fn reports(rs: &[&CertReport]) -> Value {
    echo(&rs)
}

/// Sampling box shared by the stochastic commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RegionArgs {
    /// Centres are uniform in [-h, h]ⁿ [default: 4]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// Scale range for t; radii are r = 2^{-t} [default: -8 24]
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_range: Option<Vec<f64>>,
    /// Scale-gap range for s [default: 0 12]
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_range: Option<Vec<f64>>,
}

impl RegionArgs {
    fn resolve(&self) -> Result<Region, CliError> {
        let d = Region::default();
        let pair = |v: &Option<Vec<f64>>, def: (f64, f64), name: &str| -> Result<(f64, f64), CliError> {
            match v {
                None => Ok(def),
                Some(p) if p.len() == 2 && p[0] <= p[1] && p.iter().all(|x| x.is_finite()) => Ok((p[0], p[1])),
                Some(_) => Err(CliError::Usage(format!("--{name} needs two finite values LO <= HI"))),
            }
        };
        let half_width = self.half_width.unwrap_or(d.half_width);
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(CliError::Usage("--half-width must be positive".into()));
        }
        Ok(Region {
            half_width,
            t_range: pair(&self.t_range, d.t_range, "t-range")?,
            s_range: pair(&self.s_range, d.s_range, "s-range")?,
        })
    }
}

fn region_echo(r: &Region) -> Value {
    json!({
        "half-width": r.half_width,
        "t-range": [r.t_range.0, r.t_range.1],
        "s-range": [r.s_range.0, r.s_range.1],
    })
}

/// Metric selection shared by dist, check, roundtrip and ball.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MetricArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricKind>,
    /// Exponent k of ρ_k [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Dimension for the dimension-generic metrics [default: 2]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

struct ResolvedMetric {
    kind: MetricKind,
    k: u32,
    n: usize,
    metric: Box<dyn QuasiDistance>,
}

impl MetricArgs {
    fn resolve(&self) -> Result<ResolvedMetric, CliError> {
        let kind = self.metric.ok_or_else(|| CliError::Usage("--metric is required".into()))?;
        let k = self.k.unwrap_or(1);
        let n = if kind.is_planar() { 2 } else { self.n.unwrap_or(2) };
        if kind.is_planar() && self.n.is_some_and(|v| v != 2) {
            return Err(CliError::Usage(format!("metric {kind:?} lives in the plane; --n must be 2")));
        }
        let metric = select::metric(kind, n, k)?;
        Ok(ResolvedMetric { kind, k, n, metric })
    }
}

fn metric_echo(m: &ResolvedMetric) -> Value {
    json!({ "metric": m.kind, "k": m.k, "n": m.n })
}

fn merge_into(base: &mut Value, extra: Value) {
    if let (Value::Object(b), Value::Object(e)) = (base, extra) {
        b.extend(e);
    }
}

fn point(v: &Option<Vec<f64>>, name: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let p = v.clone().ok_or_else(|| CliError::Usage(format!("--{name} is required")))?;
    if p.len() != n || p.iter().any(|c| !c.is_finite()) {
        return Err(CliError::Usage(format!("--{name} needs {n} finite coordinates")));
    }
    Ok(p)
}

// ---------------------------------------------------------------- dist

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DistArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    /// Ball centre
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    /// Second point
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// Write the report here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn dist(a: DistArgs, file: Option<&Path>) -> Result<Outcome, CliError> {
    let out = a.out.clone();
    let a: DistArgs = merge(&a, file)?;
    let m = a.metric.resolve()?;
    let x = point(&a.x, "x", m.n)?;
    let y = point(&a.y, "y", m.n)?;
    let mut config = metric_echo(&m);
    merge_into(&mut config, json!({ "x": x, "y": y }));
    let value = m.metric.eval(&x, &y)?;
    let mut body = json!({ "value": value });
    if m.kind == MetricKind::Theta0 {
        let d = theta0_case(&x, &y)?;
        merge_into(&mut body, json!({ "case": d.case, "max_form": d.max_form }));
    }
    Ok(Outcome {
        name: "dist",
        config,
        pass: value.is_finite(),
        body,
        out,
    })
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverKind>,
    /// Dimension for the isotropic and corrupted covers [default: 2]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Exponent k of the ρ_k cover [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Exponents of the diagonal cover (positive, summing to 1)
    #[arg(long, num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    /// Base seed (required)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Samples for the volume and shape checks [default: 2000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Samples for the engulf and union estimates [default: 300]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engulf_samples: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub region: RegionArgs,
    /// Write the report here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn validate(a: ValidateArgs, file: Option<&Path>) -> Result<Outcome, CliError> {
    let out = a.out.clone();
    let a: ValidateArgs = merge(&a, file)?;
    let kind = a.cover.ok_or_else(|| CliError::Usage("--cover is required".into()))?;
    let seed = seed_required(a.seed)?;
    let n = a.n.unwrap_or(2);
    let k = a.k.unwrap_or(1);
    let samples = positive("samples", a.samples.unwrap_or(2000))?;
    let engulf_samples = positive("engulf-samples", a.engulf_samples.unwrap_or(300))?;
    let region = a.region.resolve()?;
    let cover = select::cover(kind, n, k, a.exponents.as_deref())?;
    let mut config = json!({
        "cover": kind, "n": cover.dim(), "k": k, "exponents": a.exponents, "seed": seed,
        "samples": samples, "engulf-samples": engulf_samples,
    });
    merge_into(&mut config, region_echo(&region));

    let s = Sampler::new(seed);
    let volume = validate_volume(&cover, &s.substream(1), &region, samples)?;
    let norm = validate_shape_norm(&cover, &s.substream(2), &region, samples)?;
    let fitted = (norm.get("a4"), norm.get("a6"));
    let (a4, a6) = match cover.params() {
        Some(p) => (p.a4, p.a6),
        None => (fitted.0.unwrap_or(f64::NAN), fitted.1.unwrap_or(f64::NAN)),
    };
    let supplied = match cover.params() {
        Some(p) => {
            let c = shape_constants_convert(&p)?;
            Some((c.a3_prime, c.a5_prime))
        }
        None => None,
    };
    let geometric = if a4 > 0.0 && a6 > 0.0 && a4.is_finite() && a6.is_finite() {
        Some(validate_shape_geometric(&cover, &s.substream(3), &region, samples, a4, a6, supplied)?)
    } else {
        None
    };
    let engulf = engulf_constant(&cover, &s.substream(4), &region, engulf_samples, EngulfOptions::default())?;
    let hints = UnionHints {
        a4: norm.get("a4"),
        a5: norm.get("a5"),
        c: engulf.get("c"),
    };
    let union = union_engulf(&cover, &s.substream(5), &region, engulf_samples, hints)?;
    let mut all: Vec<&CertReport> = vec![&volume, &norm];
    all.extend(geometric.as_ref());
    all.push(&engulf);
    all.push(&union);
    let cases;
    if kind == CoverKind::Theta0 {
        cases = [
            theta0_case_audit(Theta0Case::Case1, &s.substream(6), &region, samples)?,
            theta0_case_audit(Theta0Case::Case2, &s.substream(7), &region, samples)?,
        ];
        all.extend(cases.iter());
    }
    let pass = all.iter().all(|r| r.pass) && geometric.is_some();
    let mut constants = serde_json::Map::new();
    for r in &all {
        for (key, v) in &r.constants {
            constants.entry(key.clone()).or_insert(json!(v));
        }
    }
    let body = json!({ "constants": constants, "declared": cover.params(), "reports": reports(&all) });
    Ok(Outcome {
        name: "validate",
        config,
        pass,
        body,
        out,
    })
}

// ---------------------------------------------------------------- check

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    QuasiConvex,
    Ahlfors,
    Inner,
    Triangle,
    Symmetry,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AhlforsArgs {
    /// Ball centres for the Ahlfors ladder, the origin first [default: 8]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<usize>,
    /// Radii per centre [default: 19]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rungs: Option<usize>,
    /// log₂ of the smallest and largest radius [default: -12 6]
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log2_r_range: Option<Vec<f64>>,
    /// Monte Carlo points per ball [default: 20000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_points: Option<usize>,
}

impl AhlforsArgs {
    fn resolve(&self) -> Result<AhlforsOptions, CliError> {
        let d = AhlforsOptions::default();
        let range = match &self.log2_r_range {
            None => d.log2_r_range,
            Some(p) if p.len() == 2 && p[0] < p[1] => (p[0], p[1]),
            Some(_) => return Err(CliError::Usage("--log2-r-range needs LO < HI".into())),
        };
        Ok(AhlforsOptions {
            centers: positive("centers", self.centers.unwrap_or(d.centers))?,
            rungs: self.rungs.unwrap_or(d.rungs).max(2),
            log2_r_range: range,
            mc_points: positive("mc-points", self.mc_points.unwrap_or(d.mc_points))?,
        })
    }
}

fn ahlfors_echo(o: &AhlforsOptions) -> Value {
    json!({
        "centers": o.centers, "rungs": o.rungs,
        "log2-r-range": [o.log2_r_range.0, o.log2_r_range.1], "mc-points": o.mc_points,
    })
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<Property>,
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    /// Base seed (required)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Samples [default: 10000 for inner, triangle and symmetry; 200 for quasi-convex]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Directions per inscribed-ellipsoid fit [default: 64 in the plane, 512 in space]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// Inner property: scale a [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Inner property: exponent b [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Inner property: largest λ [default: 1024]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    /// Inner property: take (a, b) from constants measured in this run
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<bool>,
    /// |η| ≤ c2|ξ| in the engulf hypothesis, used with --derived [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ahlfors: AhlforsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub region: RegionArgs,
    /// Write the report here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Measures `(κ̂, Q̂, ĉ₁)` for the metric and returns their reports.
fn measure(
    metric: &dyn QuasiDistance,
    s: &Sampler,
    region: &Region,
    samples: usize,
    qc_samples: usize,
    dirs: Option<usize>,
    ahl: AhlforsOptions,
) -> Result<(CertReport, ellcover::characterize::QuasiConvexityCert, ellcover::distance::AhlforsCert), CliError> {
    let tri = triangle_constant(metric, &s.substream(11), region, samples)?;
    let qc = quasi_convexity_certify(metric, &s.substream(12), region, qc_samples, dirs)?;
    let ah = ahlfors_certify(metric, &s.substream(13), region, ahl)?;
    Ok((tri, qc, ah))
}

pub fn check(a: CheckArgs, file: Option<&Path>) -> Result<Outcome, CliError> {
    let out = a.out.clone();
    let a: CheckArgs = merge(&a, file)?;
    let property = a.property.ok_or_else(|| CliError::Usage("--property is required".into()))?;
    let m = a.metric.resolve()?;
    let seed = seed_required(a.seed)?;
    let region = a.region.resolve()?;
    let default_samples = if property == Property::QuasiConvex { 200 } else { 10000 };
    let samples = positive("samples", a.samples.unwrap_or(default_samples))?;
    let dirs = a.directions.unwrap_or_else(|| default_direction_count(m.n));
    positive("directions", dirs)?;
    let ahl = a.ahlfors.resolve()?;
    let mut config = metric_echo(&m);
    merge_into(
        &mut config,
        json!({ "property": property, "seed": seed, "samples": samples, "directions": dirs }),
    );
    merge_into(&mut config, region_echo(&region));
    let s = Sampler::new(seed);
    let metric = m.metric.as_ref();
    let (pass, body) = match property {
        Property::QuasiConvex => {
            let c = quasi_convexity_certify(metric, &s, &region, samples, Some(dirs))?;
            (c.report.pass, json!({ "constants": { "Q": c.q_hat }, "reports": reports(&[&c.report]) }))
        }
        Property::Ahlfors => {
            merge_into(&mut config, ahlfors_echo(&ahl));
            let c = ahlfors_certify(metric, &s, &region, ahl)?;
            let body = json!({
                "constants": { "c1": c.c1_hat }, "diverging": c.diverging, "reports": reports(&[&c.report]),
            });
            (c.report.pass, body)
        }
        Property::Triangle => {
            let r = triangle_constant(metric, &s, &region, samples)?;
            (r.pass, json!({ "constants": r.constants, "reports": reports(&[&r]) }))
        }
        Property::Symmetry => {
            let r = symmetry_check(metric, &s, &region, samples)?;
            (r.pass, json!({ "constants": r.constants, "reports": reports(&[&r]) }))
        }
        Property::Inner => {
            let lambda_max = a.lambda_max.unwrap_or(1024.0);
            if a.derived.unwrap_or(false) {
                if a.a.is_some() || a.b.is_some() {
                    return Err(CliError::Usage("--derived replaces --a and --b".into()));
                }
                let c2 = a.c2.unwrap_or(1.0);
                merge_into(&mut config, json!({ "derived": true, "c2": c2, "lambda-max": lambda_max }));
                merge_into(&mut config, ahlfors_echo(&ahl));
                let (tri, qc, ah) = measure(metric, &s, &region, samples, 200, Some(dirs), ahl)?;
                let kappa = tri.get("kappa").unwrap_or(f64::NAN);
                let certified = tri.pass && qc.report.pass && ah.report.pass && !ah.diverging;
                if !certified {
                    let body = json!({
                        "constants": { "kappa": kappa, "Q": qc.q_hat, "c1": ah.c1_hat },
                        "reports": reports(&[&tri, &qc.report, &ah.report]),
                    });
                    return Ok(Outcome { name: "check", config, pass: false, body, out });
                }
                let ledger = derive_constants(ah.c1_hat, qc.q_hat, kappa.max(1.0), m.n, c2)?;
                let opts = InnerOptions {
                    a: ledger.a,
                    b: ledger.b,
                    lambda_max,
                };
                let r = inner_property_check(metric, opts, &s.substream(14), &region, samples)?;
                let body = json!({
                    "constants": {
                        "kappa": kappa, "Q": qc.q_hat, "c1": ah.c1_hat,
                        "c": ledger.c, "d": ledger.d, "epsilon": ledger.epsilon, "a": ledger.a, "b": ledger.b,
                    },
                    "ledger": ledger,
                    "reports": reports(&[&tri, &qc.report, &ah.report, &r]),
                });
                (r.pass, body)
            } else {
                let opts = InnerOptions {
                    a: a.a.unwrap_or(1.0),
                    b: a.b.unwrap_or(1.0),
                    lambda_max,
                };
                merge_into(&mut config, json!({ "a": opts.a, "b": opts.b, "lambda-max": lambda_max }));
                let r = inner_property_check(metric, opts, &s, &region, samples).map_err(|e| match e {
                    ellcover::Error::Contract(m) => CliError::Usage(m),
                    e => e.into(),
                })?;
                (r.pass, json!({ "constants": r.constants, "reports": reports(&[&r]) }))
            }
        }
    };
    Ok(Outcome {
        name: "check",
        config,
        pass,
        body,
        out,
    })
}

// ---------------------------------------------------------------- roundtrip

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RoundtripArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    /// Base seed (required)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Pairs (x, y) compared [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    /// log₂|x−y| range of the pairs [default: -8 1]
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log2_gap_range: Option<Vec<f64>>,
    /// Samples for the triangle constant [default: 2000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangle_samples: Option<usize>,
    /// Samples for quasi-convexity [default: 200]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qc_samples: Option<usize>,
    /// Samples for the shape validators on the built cover [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape_samples: Option<usize>,
    /// Samples for the engulf constants [default: 200]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engulf_samples: Option<usize>,
    /// Directions per inscribed-ellipsoid fit [default: 64 in the plane, 512 in space]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// |η| ≤ c2|ξ| in the engulf hypothesis [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub ahlfors: AhlforsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub region: RegionArgs,
    /// Write the report here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn roundtrip(a: RoundtripArgs, file: Option<&Path>) -> Result<Outcome, CliError> {
    let out = a.out.clone();
    let a: RoundtripArgs = merge(&a, file)?;
    let m = a.metric.resolve()?;
    let seed = seed_required(a.seed)?;
    let region = a.region.resolve()?;
    let ahl = a.ahlfors.resolve()?;
    let d = RoundtripOptions::default();
    let gap = match &a.log2_gap_range {
        None => d.log2_gap_range,
        Some(p) if p.len() == 2 && p[0] <= p[1] => (p[0], p[1]),
        Some(_) => return Err(CliError::Usage("--log2-gap-range needs LO <= HI".into())),
    };
    let opts = RoundtripOptions {
        pairs: positive("pairs", a.pairs.unwrap_or(d.pairs))?,
        log2_gap_range: gap,
        engulf_samples: positive("engulf-samples", a.engulf_samples.unwrap_or(d.engulf_samples))?,
    };
    let tri_n = positive("triangle-samples", a.triangle_samples.unwrap_or(2000))?;
    let qc_n = positive("qc-samples", a.qc_samples.unwrap_or(200))?;
    let shape_n = positive("shape-samples", a.shape_samples.unwrap_or(1000))?;
    let dirs = positive("directions", a.directions.unwrap_or_else(|| default_direction_count(m.n)))?;
    let c2 = a.c2.unwrap_or(1.0);
    if !(c2 > 0.0) {
        return Err(CliError::Usage("--c2 must be positive".into()));
    }
    let mut config = metric_echo(&m);
    merge_into(
        &mut config,
        json!({
            "seed": seed, "pairs": opts.pairs, "log2-gap-range": [gap.0, gap.1],
            "triangle-samples": tri_n, "qc-samples": qc_n, "shape-samples": shape_n,
            "engulf-samples": opts.engulf_samples, "directions": dirs, "c2": c2,
        }),
    );
    merge_into(&mut config, ahlfors_echo(&ahl));
    merge_into(&mut config, region_echo(&region));

    let s = Sampler::new(seed);
    let (tri, qc, ah) = measure(m.metric.as_ref(), &s, &region, tri_n, qc_n, Some(dirs), ahl)?;
    let kappa = tri.get("kappa").unwrap_or(f64::NAN);
    let measured = json!({ "kappa": kappa, "Q": qc.q_hat, "c1": ah.c1_hat });
    if !(tri.pass && qc.report.pass && ah.report.pass && !ah.diverging) {
        let body = json!({
            "constants": measured,
            "stage": "certification",
            "reports": reports(&[&tri, &qc.report, &ah.report]),
        });
        return Ok(Outcome {
            name: "roundtrip",
            config,
            pass: false,
            body,
            out,
        });
    }
    let n = m.n;
    let xi = build_xi_cover(m.metric, &qc, &ah)?;
    let norm = validate_shape_norm(&xi, &s.substream(21), &region, shape_n)?;
    let (a4, a6) = (norm.get("a4").unwrap_or(f64::NAN), norm.get("a6").unwrap_or(f64::NAN));
    let geometric = if a4 > 0.0 && a6 > 0.0 && a4.is_finite() && a6.is_finite() {
        Some(validate_shape_geometric(&xi, &s.substream(22), &region, shape_n, a4, a6, None)?)
    } else {
        None
    };
    let volume = validate_volume(&xi, &s.substream(23), &region, shape_n)?;
    let ledger = derive_constants(ah.c1_hat, qc.q_hat, kappa.max(1.0), n, c2)?;
    let engulf = engulf_check(&xi, &ledger, &s.substream(24), &region, opts.engulf_samples)?;
    let rt = roundtrip_equivalence(&xi, kappa, &s.substream(25), &region, opts)?;
    let mut all: Vec<&CertReport> = vec![&tri, &qc.report, &ah.report, &volume, &norm];
    all.extend(geometric.as_ref());
    all.push(&engulf);
    all.push(&rt);
    let pass = all.iter().all(|r| r.pass) && geometric.is_some();
    let (a1, a2) = xi.volume_bounds().unwrap_or((f64::NAN, f64::NAN));
    let body = json!({
        "constants": {
            "kappa": kappa, "Q": qc.q_hat, "c1": ah.c1_hat,
            "a1": a1, "a2": a2,
            "a3": norm.get("a3"), "a4": a4, "a5": norm.get("a5"), "a6": a6,
            "c": rt.get("c"),
        },
        "ratio": {
            "min": rt.get("ratio_min"), "p5": rt.get("ratio_p5"), "p50": rt.get("ratio_p50"),
            "p95": rt.get("ratio_p95"), "max": rt.get("ratio_max"),
            "interval": [rt.get("interval_lo"), rt.get("interval_hi")],
        },
        "bounds": {
            "lower": rt.get("lower_bound"), "lower_expression": "1/(4 c1 kappa Q^n)",
            "upper": rt.get("upper_bound"), "upper_expression": "a2 2^(c Q - 1)",
        },
        "ledger": ledger,
        "reports": reports(&all),
    });
    Ok(Outcome {
        name: "roundtrip",
        config,
        pass,
        body,
        out,
    })
}

// ---------------------------------------------------------------- ball

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BallArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    /// Ball centre
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    /// Ball radius
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Number of directions [default: 64 in the plane, 512 in space]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// CSV destination
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Write the summary here instead of stdout
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn ball(a: BallArgs, file: Option<&Path>) -> Result<Outcome, CliError> {
    let out = a.out.clone();
    let a: BallArgs = merge(&a, file)?;
    let m = a.metric.resolve()?;
    let x = point(&a.x, "x", m.n)?;
    let r = a.r.ok_or_else(|| CliError::Usage("--r is required".into()))?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(CliError::Usage("--r must be positive".into()));
    }
    let count = positive("points", a.points.unwrap_or_else(|| default_direction_count(m.n)))?;
    let csv_path = a.csv.clone().ok_or_else(|| CliError::Usage("--csv is required".into()))?;
    let mut config = metric_echo(&m);
    merge_into(&mut config, json!({ "x": x, "r": r, "points": count, "csv": csv_path }));

    let n = m.n;
    let dirs = directions(n, count);
    let mut w = csv::Writer::from_path(&csv_path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    let axis = |i: usize| -> String {
        if n <= 3 {
            ["x", "y", "z"][i].to_string()
        } else {
            (i + 1).to_string()
        }
    };
    let mut header: Vec<String> = (0..n).map(|i| format!("u{}", axis(i))).collect();
    header.push("R".into());
    header.extend((0..n).map(|i| format!("p{}", axis(i))));
    let csv_err = |e: csv::Error| CliError::Runtime(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for u in &dirs {
        let big = m.metric.directional_radius(&x, u, r)?;
        lo = lo.min(big);
        hi = hi.max(big);
        let mut row: Vec<String> = u.iter().map(|v| v.to_string()).collect();
        row.push(big.to_string());
        row.extend(x.iter().zip(u).map(|(c, v)| (c + big * v).to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(Outcome {
        name: "ball",
        config,
        pass: true,
        body: json!({ "points": dirs.len(), "min_radius": lo, "max_radius": hi }),
        out,
    })
}
