//! Quasi-convexity, the inner property, derived constants, and the round
//! trip from a quasi-distance to its family of inscribed ellipsoids and back.

mod fit;

use serde::{Deserialize, Serialize};

use crate::cover::{engulf_constant, Cover, EngulfOptions};
use crate::distance::{rho_induced, AhlforsCert, QuasiDistance};
use crate::ellipsoid::Ellipsoid;
use crate::error::{contract, Result};
use crate::numeric::axpy;
use crate::report::{CertReport, Witness};
use crate::sampling::{percentile, Region, Sampler};

pub use fit::{default_direction_count, directions, inscribed_centered_ellipsoid, InscribedFit};

/// Boundary points are pulled inward by this factor before membership tests.
/// Forming `y − x` for `|x| ≈ 4` and `|y − x| ≈ 10⁻⁸` loses about `10⁻⁷`
/// relative accuracy, so the margin must exceed that at the smallest radii.
const INWARD: f64 = 1.0 - 1e-6;
/// Relative slack on the radius in `ρ(x, p) < λr`.
const RADIUS_SLACK: f64 = 1e-12;

fn radius_at(t: f64) -> f64 {
    (-t).exp2()
}

/// Outcome of [`quasi_convexity_certify`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiConvexityCert {
    pub q_hat: f64,
    /// Directions per sample used by the fit.
    pub directions: usize,
    pub report: CertReport,
}

/// Samples `(x, r)` from `region` (`r = 2^{-t}`), fits `ξ_x^r`, and measures
/// `Q̂ = max R(u)/r_ξ(u)`. Boundary points of `ξ`, pulled inward by `1e-6`,
/// must lie in `B(x, r)`.
pub fn quasi_convexity_certify<D: QuasiDistance + ?Sized>(
    metric: &D,
    sampler: &Sampler,
    region: &Region,
    count: usize,
    direction_count: Option<usize>,
) -> Result<QuasiConvexityCert> {
    let n = metric.dim();
    let dcount = direction_count.unwrap_or_else(|| default_direction_count(n));
    let dirs = directions(n, dcount);
    let draws: Vec<Result<(Vec<f64>, f64, f64, usize, Option<Vec<f64>>)>> = sampler.map(count, |_, rng| {
        let x = region.point(rng, n);
        let r = radius_at(region.scale(rng));
        let fit = inscribed_centered_ellipsoid(metric, &x, r, &dirs)?;
        let mut bad = 0;
        let mut first = None;
        for u in dirs.iter().chain(&metric.critical_directions(&x, r)) {
            let p = fit.ellipsoid.boundary_point(u);
            let p = axpy(&x, INWARD, &crate::numeric::sub(&p, &x));
            if metric.eval(&x, &p)? >= r {
                bad += 1;
                first.get_or_insert(p);
            }
        }
        Ok((x, r, fit.q_hat, bad, first))
    });
    let mut report = CertReport::new("quasi_convexity", &metric.name(), sampler.seed, count);
    let mut q_hat = 1.0f64;
    let mut worst = None;
    let mut outside = 0usize;
    for d in draws {
        let (x, r, q, bad, first) = d?;
        if q > q_hat || worst.is_none() {
            q_hat = q_hat.max(q);
            worst = Some((x.clone(), r));
        }
        if bad > 0 {
            outside += bad;
            let mut w = Witness::new("inscribed ellipsoid leaves the ball").vector("x", &x).scalar("r", r);
            if let Some(p) = first {
                w = w.vector("point", &p);
            }
            report.fail(w);
        }
    }
    report.constant("Q", q_hat).stat("directions", dcount as f64).stat("points_outside", outside as f64);
    if let Some((x, r)) = worst {
        report.witness(Witness::new("largest R(u)/r_xi(u)").vector("x", &x).scalar("r", r).scalar("ratio", q_hat));
    }
    if !q_hat.is_finite() {
        report.fail(Witness::new("quasi-convexity ratio is not finite"));
    }
    Ok(QuasiConvexityCert {
        q_hat,
        directions: dcount,
        report,
    })
}

/// Inputs of [`inner_property_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerOptions {
    pub a: f64,
    pub b: f64,
    /// `λ` is log-uniform in `[1, lambda_max]`; every tenth sample uses `λ = 1`.
    pub lambda_max: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            lambda_max: 1024.0,
        }
    }
}

/// Checks `aλ^b(B(x,r) − x) ⊆ B(x,λr) − x` at boundary points of `B(x, r)`.
///
/// Each sample takes a direction `u` and the point `x + aλ^b R(u)(1−1e-6) u`,
/// which must satisfy `ρ(x, ·) < λr`. When the metric has a closed-form
/// inscribed ellipsoid, the ellipsoid form `aλ^b ξ_x^r ⊆ ξ_x^{λr}` is also
/// tested and its failures counted (`ellipsoid_violations`) without gating.
pub fn inner_property_check<D: QuasiDistance + ?Sized>(
    metric: &D,
    opts: InnerOptions,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<CertReport> {
    if !(opts.a > 0.0 && opts.b > 0.0 && opts.lambda_max >= 1.0) {
        return Err(contract("inner property needs a, b > 0 and lambda_max >= 1"));
    }
    let n = metric.dim();
    let draws: Vec<Result<(Vec<f64>, f64, f64, Vec<f64>, f64, Option<bool>)>> = sampler.map(count, |i, rng| {
        let x = region.point(rng, n);
        let r = radius_at(region.scale(rng));
        let lambda = if i % 10 == 0 {
            1.0
        } else {
            rng.uniform(0.0, opts.lambda_max.log2()).exp2()
        };
        let u = rng.unit_vector(n);
        let big = metric.directional_radius(&x, &u, r)?;
        let factor = opts.a * lambda.powf(opts.b);
        let p = axpy(&x, factor * big * INWARD, &u);
        let value = metric.eval(&x, &p)?;
        let ellipsoid_ok = match (metric.inscribed_ellipsoid(&x, r), metric.inscribed_ellipsoid(&x, lambda * r)) {
            (Some(small), Some(large)) => Some(small?.dilate(factor)?.is_subset_of(&large?)?),
            _ => None,
        };
        Ok((x, r, lambda, p, value, ellipsoid_ok))
    });
    let mut report = CertReport::new("inner_property", &metric.name(), sampler.seed, count);
    report.constant("a", opts.a).constant("b", opts.b).stat("lambda_max", opts.lambda_max);
    let mut worst = 0.0f64;
    let mut ell_bad = 0usize;
    let mut ell_checked = 0usize;
    for d in draws {
        let (x, r, lambda, p, value, ell) = d?;
        let ratio = value / (lambda * r);
        worst = worst.max(ratio);
        if value >= lambda * r * (1.0 + RADIUS_SLACK) {
            report.fail(
                Witness::new("scaled boundary point leaves B(x, lambda r)")
                    .vector("x", &x)
                    .scalar("r", r)
                    .scalar("lambda", lambda)
                    .vector("point", &p)
                    .scalar("rho", value),
            );
        }
        if let Some(ok) = ell {
            ell_checked += 1;
            if !ok {
                ell_bad += 1;
            }
        }
    }
    report.stat("worst_radius_ratio", worst);
    if ell_checked > 0 {
        report.stat("ellipsoid_checked", ell_checked as f64).stat("ellipsoid_violations", ell_bad as f64);
    }
    Ok(report)
}

/// Constants threaded through the proofs that quasi-convex 1-Ahlfors
/// distances engulf and have the inner property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub c1: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub kappa: f64,
    pub n: usize,
    pub c2: f64,
    pub c3: f64,
    pub c: f64,
    pub d: f64,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
}

/// `c₃ = Qⁿc₁²c₂`, `c = Q^{2n}c₁²·3κ²·c₃`, `d = 1 + c^{1−n}c₁⁻²Q⁻²`,
/// `ε = ln d / ln 2κ`, `a = 1/d`, `b = ε`.
pub fn derive_constants(c1: f64, q: f64, kappa: f64, n: usize, c2: f64) -> Result<ConstantLedger> {
    if !(c1 >= 1.0 && q >= 1.0 && kappa >= 1.0 && c2 > 0.0 && n >= 1) {
        return Err(contract(format!(
            "derive_constants needs c1, Q, kappa >= 1, c2 > 0, n >= 1 (got {c1}, {q}, {kappa}, {c2}, {n})"
        )));
    }
    if ![c1, q, kappa, c2].iter().all(|v| v.is_finite()) {
        return Err(contract("derive_constants needs finite inputs"));
    }
    let nf = n as f64;
    let c3 = q.powf(nf) * c1 * c1 * c2;
    let c = q.powf(2.0 * nf) * c1 * c1 * 3.0 * kappa * kappa * c3;
    let d = 1.0 + c.powf(1.0 - nf) / (c1 * c1 * q * q);
    let epsilon = d.ln() / (2.0 * kappa).ln();
    Ok(ConstantLedger {
        c1,
        q,
        kappa,
        n,
        c2,
        c3,
        c,
        d,
        epsilon,
        a: 1.0 / d,
        b: epsilon,
    })
}

/// The cover `θ_{x,t} = ξ_x^{2^{-t}}` of inscribed ellipsoids of a metric.
#[derive(Debug, Clone)]
pub struct XiCover<D> {
    pub metric: D,
    pub c1: f64,
    pub q: f64,
    dirs: Vec<Vec<f64>>,
}

impl<D: QuasiDistance> XiCover<D> {
    /// The ellipsoid `ξ_x^r` itself, skipping the ratio measurement.
    pub fn xi(&self, x: &[f64], r: f64) -> Result<Ellipsoid> {
        match self.metric.inscribed_ellipsoid(x, r) {
            Some(e) => e,
            None => Ok(inscribed_centered_ellipsoid(&self.metric, x, r, &self.dirs)?.ellipsoid),
        }
    }
}

impl<D: QuasiDistance> Cover for XiCover<D> {
    fn dim(&self) -> usize {
        self.metric.dim()
    }
    fn name(&self) -> String {
        format!("xi[{}]", self.metric.name())
    }
    fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid> {
        if x.len() != self.dim() || !t.is_finite() {
            return Err(contract("xi cover: bad centre or scale"));
        }
        self.xi(x, radius_at(t))
    }
    /// `(1/(Qⁿc₁), c₁)`.
    fn volume_bounds(&self) -> Option<(f64, f64)> {
        Some((1.0 / (self.q.powi(self.dim() as i32) * self.c1), self.c1))
    }
}

/// Builds `Ξ_ρ` from passing quasi-convexity and Ahlfors certificates.
pub fn build_xi_cover<D: QuasiDistance>(
    metric: D,
    quasi_convexity: &QuasiConvexityCert,
    ahlfors: &AhlforsCert,
) -> Result<XiCover<D>> {
    if !quasi_convexity.report.pass {
        return Err(contract("the metric is not certified quasi-convex"));
    }
    if ahlfors.diverging || !ahlfors.report.pass {
        return Err(contract("the metric is not certified 1-Ahlfors regular"));
    }
    let n = metric.dim();
    Ok(XiCover {
        metric,
        c1: ahlfors.c1_hat,
        q: quasi_convexity.q_hat,
        dirs: directions(n, quasi_convexity.directions),
    })
}

/// Inputs of [`roundtrip_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundtripOptions {
    pub pairs: usize,
    /// `y = x + ℓu` with `log₂ ℓ` uniform in this range.
    pub log2_gap_range: (f64, f64),
    /// Samples for the engulf constant behind the upper bound.
    pub engulf_samples: usize,
}

impl Default for RoundtripOptions {
    fn default() -> Self {
        Self {
            pairs: 1000,
            log2_gap_range: (-8.0, 1.0),
            engulf_samples: 200,
        }
    }
}

/// Compares `ρ_Ξ = min(ρ₁(x,y), ρ₁(y,x))` on `xi` with the original metric.
///
/// Reports `ρ_Ξ/ρ` as min, max and the 5/50/95 percentiles; the interval is
/// `[p5, p95]`. The theoretical sandwich is
/// `1/(4c₁κQⁿ) ≤ ρ_Ξ/ρ ≤ a₂2^{cQ−1}` with `c` the measured engulf constant
/// of `xi`; the run fails if the lower side is crossed or any ratio is not
/// finite and positive.
pub fn roundtrip_equivalence<D: QuasiDistance>(
    xi: &XiCover<D>,
    kappa: f64,
    sampler: &Sampler,
    region: &Region,
    opts: RoundtripOptions,
) -> Result<CertReport> {
    let n = xi.dim();
    let (g0, g1) = opts.log2_gap_range;
    let draws: Vec<Result<(Vec<f64>, Vec<f64>, f64, f64)>> = sampler.map(opts.pairs, |_, rng| {
        let x = region.point(rng, n);
        let ell = rng.uniform(g0, g1).exp2();
        let y = axpy(&x, ell, &rng.unit_vector(n));
        let rho = xi.metric.eval(&x, &y)?;
        let rho_xi = rho_induced(xi, &x, &y)?;
        Ok((x, y, rho, rho_xi))
    });
    let mut report = CertReport::new("roundtrip", &xi.metric.name(), sampler.seed, opts.pairs);
    let lower = 1.0 / (4.0 * xi.c1 * kappa * xi.q.powi(n as i32));
    let engulf = engulf_constant(
        xi,
        &sampler.substream(9),
        region,
        opts.engulf_samples,
        EngulfOptions::default(),
    )?;
    let c = engulf.get("c").unwrap_or(f64::NAN);
    let a2 = xi.c1;
    let upper = a2 * (c * xi.q - 1.0).exp2();
    let mut ratios = Vec::with_capacity(opts.pairs);
    let mut lowest: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    for d in draws {
        let (x, y, rho, rho_xi) = d?;
        let q = rho_xi / rho;
        if !(q.is_finite() && q > 0.0) {
            report.fail(
                Witness::new("ratio is not finite and positive")
                    .vector("x", &x)
                    .vector("y", &y)
                    .scalar("rho", rho)
                    .scalar("rho_xi", rho_xi),
            );
            continue;
        }
        if lowest.as_ref().is_none_or(|l| q < l.2) {
            lowest = Some((x, y, q));
        }
        ratios.push(q);
    }
    ratios.sort_by(f64::total_cmp);
    let (lo, hi) = (percentile(&ratios, 0.05), percentile(&ratios, 0.95));
    report
        .constant("c1", xi.c1)
        .constant("Q", xi.q)
        .constant("kappa", kappa)
        .constant("c", c)
        .stat("ratio_min", ratios.first().copied().unwrap_or(f64::NAN))
        .stat("ratio_max", ratios.last().copied().unwrap_or(f64::NAN))
        .stat("ratio_p5", lo)
        .stat("ratio_p50", percentile(&ratios, 0.5))
        .stat("ratio_p95", hi)
        .stat("interval_lo", lo)
        .stat("interval_hi", hi)
        .stat("lower_bound", lower)
        .stat("upper_bound", upper);
    if let Some((x, y, q)) = lowest {
        let w = Witness::new("smallest rho_xi/rho").vector("x", &x).vector("y", &y).scalar("ratio", q);
        if q < lower {
            report.fail(w);
        } else {
            report.witness(w);
        }
    }
    if ratios.is_empty() {
        report.fail(Witness::new("no pairs were evaluated"));
    }
    Ok(report)
}

/// Checks `η ⊆ c·ξ` for `ξ = ξ_x^r`, `η = ξ_y^s` with `B(x, r) ∩ η ≠ ∅` and
/// `|η| ≤ c₂|ξ|`, using `c` from a [`ConstantLedger`].
///
/// Pairs are built by picking `z ∈ B(x, r)`, a smaller radius `s`, and a
/// centre `y` with `z ∈ η`; pairs breaking the volume hypothesis are skipped.
pub fn engulf_check<D: QuasiDistance>(
    xi: &XiCover<D>,
    ledger: &ConstantLedger,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<CertReport> {
    let n = xi.dim();
    let metric = &xi.metric;
    let draws: Vec<Result<Option<(Vec<f64>, f64, Vec<f64>, f64, f64)>>> = sampler.map(count, |_, rng| {
        let x = region.point(rng, n);
        let r = radius_at(region.scale(rng));
        let u = rng.unit_vector(n);
        let z = axpy(&x, rng.uniform(0.0, INWARD) * metric.directional_radius(&x, &u, r)?, &u);
        let s = r * rng.uniform(-10.0, ledger.c2.log2().min(10.0)).exp2();
        // Centre y so that z lies in ξ_y^s: step back from z inside ξ_z^s.
        let v = rng.unit_vector(n);
        let back = xi.xi(&z, s)?.radial(&v)? * rng.uniform(0.0, 0.5);
        let y = axpy(&z, -back, &v);
        let xi_x = xi.xi(&x, r)?;
        let eta = xi.xi(&y, s)?;
        if !eta.contains_point(&z) || eta.volume() > ledger.c2 * xi_x.volume() {
            return Ok(None);
        }
        let factor = eta.containment_factor(&xi_x)?;
        Ok(Some((x, r, y, s, factor)))
    });
    let mut report = CertReport::new("engulf", &metric.name(), sampler.seed, count);
    let mut used = 0usize;
    let mut worst = 0.0f64;
    for d in draws {
        let Some((x, r, y, s, factor)) = d? else { continue };
        used += 1;
        worst = worst.max(factor);
        if factor > ledger.c * (1.0 + 1e-9) {
            report.fail(
                Witness::new("eta is not inside c times xi")
                    .vector("x", &x)
                    .scalar("r", r)
                    .vector("y", &y)
                    .scalar("s", s)
                    .scalar("factor", factor),
            );
        }
    }
    report.constant("c", ledger.c).stat("pairs", used as f64).stat("max_factor", worst);
    if used == 0 {
        report.fail(Witness::new("no admissible pairs"));
    }
    Ok(report)
}
