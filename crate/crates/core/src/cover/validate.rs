//! Sampling validators for the volume and shape conditions and the two
//! engulfing properties.

use serde::{Deserialize, Serialize};

use super::{theta0_semi_axes, Cover, CoverParams, Theta0Cover, Theta0Regime};
use crate::ellipsoid::Ellipsoid;
use crate::error::{contract, Error, Result};
use crate::numeric::{add, spectral_norm, SeededRng};
use crate::report::{CertReport, Witness};
use crate::sampling::{Region, Sampler};

/// Relative slack allowed when comparing measured norms against claimed bounds.
const BOUND_SLACK: f64 = 1e-9;
/// Relative slack on the volume condition.
const VOLUME_SLACK: f64 = 1e-12;
/// Attempts per sample before a pair search gives up.
const MAX_ATTEMPTS: usize = 256;
/// Width of the `s` bins used by the envelope fit.
const BIN_WIDTH: f64 = 0.5;

/// An intersecting pair `ξ = θ_{x,t}`, `η = θ_{y,t+s}` with both quotient norms.
#[derive(Debug, Clone)]
pub struct ShapePair {
    pub x: Vec<f64>,
    pub t: f64,
    pub y: Vec<f64>,
    pub s: f64,
    pub xi: Ellipsoid,
    pub eta: Ellipsoid,
    /// `‖M_{x,t}⁻¹ M_{y,t+s}‖`
    pub fwd: f64,
    /// `‖M_{y,t+s}⁻¹ M_{x,t}‖`
    pub rev: f64,
}

impl ShapePair {
    pub fn new(x: Vec<f64>, t: f64, y: Vec<f64>, s: f64, xi: Ellipsoid, eta: Ellipsoid) -> Result<Self> {
        let fwd = spectral_norm(&(&xi.matrix().inverse()? * eta.matrix()))?;
        let rev = spectral_norm(&(&eta.matrix().inverse()? * xi.matrix()))?;
        Ok(Self {
            x,
            t,
            y,
            s,
            xi,
            eta,
            fwd,
            rev,
        })
    }
}

fn subject_seed(sampler: &Sampler) -> u64 {
    sampler.seed
}

/// Draws `count` intersecting pairs: `x`, `t`, `s` from `region`, and `y`
/// uniform in `1.5·θ_{x,t}`, kept when `θ_{y,t+s}` meets `θ_{x,t}`.
pub fn sample_shape_pairs<C: Cover + ?Sized>(
    cover: &C,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<Vec<ShapePair>> {
    let n = cover.dim();
    let draws: Vec<Result<Option<ShapePair>>> = sampler.map(count, |_, rng| {
        for _ in 0..MAX_ATTEMPTS {
            let x = region.point(rng, n);
            let t = region.scale(rng);
            let s = region.gap(rng);
            let xi = cover.eval(&x, t)?;
            let y = add(&x, &xi.matrix().mul_vec(&rng.in_unit_ball(n)).iter().map(|v| 1.5 * v).collect::<Vec<_>>());
            let eta = cover.eval(&y, t + s)?;
            if xi.intersects(&eta)? {
                return ShapePair::new(x, t, y, s, xi, eta).map(Some);
            }
        }
        Ok(None)
    });
    let mut pairs = Vec::with_capacity(count);
    for d in draws {
        if let Some(p) = d? {
            pairs.push(p);
        }
    }
    Ok(pairs)
}

/// Envelope constants fitted to a set of pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeFit {
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    /// Number of non-empty `s` bins.
    pub bins: usize,
}

/// Line `y = slope·s + b` lying above every `(s, y)`: the slope is the least
/// squares slope through the per-bin maxima and `b` is the smallest intercept
/// that still bounds all points.
fn upper_envelope(points: &[(f64, f64)]) -> (f64, f64, usize) {
    let mut bins: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
    for &(s, y) in points {
        let key = (s / BIN_WIDTH).floor() as i64;
        let e = bins.entry(key).or_insert((s, y));
        if y > e.1 {
            *e = (s, y);
        }
    }
    let m = bins.len();
    let slope = if m >= 2 {
        let ms = bins.values().map(|p| p.0).sum::<f64>() / m as f64;
        let my = bins.values().map(|p| p.1).sum::<f64>() / m as f64;
        let sxy: f64 = bins.values().map(|p| (p.0 - ms) * (p.1 - my)).sum();
        let sxx: f64 = bins.values().map(|p| (p.0 - ms).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    let intercept = points
        .iter()
        .map(|&(s, y)| y - slope * s)
        .fold(f64::NEG_INFINITY, f64::max);
    (slope, intercept, m)
}

/// Fits `‖M_x⁻¹M_y‖ ≤ a₅2^{-a₆s}` and `‖M_y⁻¹M_x‖ ≤ a₃⁻¹2^{a₄s}` as upper
/// envelopes of `log₂` norms against `s`.
pub fn fit_shape_envelope(pairs: &[ShapePair]) -> ShapeFit {
    let fwd: Vec<(f64, f64)> = pairs.iter().map(|p| (p.s, p.fwd.log2())).collect();
    let rev: Vec<(f64, f64)> = pairs.iter().map(|p| (p.s, p.rev.log2())).collect();
    let (sf, bf, bins) = upper_envelope(&fwd);
    let (sr, br, _) = upper_envelope(&rev);
    ShapeFit {
        a3: (-br).exp2(),
        a4: sr,
        a5: bf.exp2(),
        a6: -sf,
        bins,
    }
}

/// Norm form of the shape condition on freshly sampled pairs, checked
/// against the cover's declared constants when it has them.
pub fn validate_shape_norm<C: Cover + ?Sized>(
    cover: &C,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<CertReport> {
    let pairs = sample_shape_pairs(cover, sampler, region, count)?;
    let mut r = validate_shape_norm_on(&pairs, cover.params())?;
    r.subject = cover.name();
    r.seed = subject_seed(sampler);
    r.stat("requested", count as f64);
    Ok(r)
}

/// Fits the envelope on `pairs` and checks every pair against `declared`.
///
/// Passes when the declared bounds (if any) hold within `1e-9` relative slack
/// and the fitted exponents are finite and positive.
pub fn validate_shape_norm_on(pairs: &[ShapePair], declared: Option<CoverParams>) -> Result<CertReport> {
    let mut r = CertReport::new("shape_norm", "pairs", 0, pairs.len());
    if pairs.is_empty() {
        r.fail(Witness::new("no intersecting pairs were found"));
        return Ok(r);
    }
    let fit = fit_shape_envelope(pairs);
    r.constant("a3", fit.a3)
        .constant("a4", fit.a4)
        .constant("a5", fit.a5)
        .constant("a6", fit.a6)
        .stat("bins", fit.bins as f64)
        .stat("pairs", pairs.len() as f64);
    let fitted = [fit.a3, fit.a4, fit.a5, fit.a6];
    if fitted.iter().any(|v| !v.is_finite()) || !(fit.a4 > 0.0 && fit.a6 > 0.0) {
        r.fail(
            Witness::new("fitted envelope is degenerate")
                .scalar("a4", fit.a4)
                .scalar("a6", fit.a6),
        );
    }
    if let Some(p) = declared {
        let mut worst_fwd = 0.0f64;
        let mut worst_rev = 0.0f64;
        for q in pairs {
            let fb = p.a5 * (-p.a6 * q.s).exp2();
            let rb = (p.a4 * q.s).exp2() / p.a3;
            worst_fwd = worst_fwd.max(q.fwd / fb);
            worst_rev = worst_rev.max(q.rev / rb);
            if q.fwd > fb * (1.0 + BOUND_SLACK) || q.rev > rb * (1.0 + BOUND_SLACK) {
                r.fail(
                    Witness::new("declared shape bound exceeded")
                        .vector("x", &q.x)
                        .scalar("t", q.t)
                        .vector("y", &q.y)
                        .scalar("s", q.s)
                        .scalar("fwd", q.fwd)
                        .scalar("fwd_bound", fb)
                        .scalar("rev", q.rev)
                        .scalar("rev_bound", rb),
                );
            }
        }
        r.stat("worst_fwd_ratio", worst_fwd)
            .stat("worst_rev_ratio", worst_rev);
    }
    Ok(r)
}

/// Geometric (dilation sandwich) form of the shape condition on fresh pairs.
pub fn validate_shape_geometric<C: Cover + ?Sized>(
    cover: &C,
    sampler: &Sampler,
    region: &Region,
    count: usize,
    a4: f64,
    a6: f64,
    supplied: Option<(f64, f64)>,
) -> Result<CertReport> {
    let pairs = sample_shape_pairs(cover, sampler, region, count)?;
    let mut r = validate_shape_geometric_on(&pairs, a4, a6, supplied)?;
    r.subject = cover.name();
    r.seed = subject_seed(sampler);
    Ok(r)
}

/// For pairs with `|η| ≤ |ξ|` and `v = |η|/|ξ|`, measures the tightest
/// `a₃′, a₅′` in `a₃′v^{a₄}(ξ−c_ξ) ⊆ η−c_η ⊆ a₅′v^{a₆}(ξ−c_ξ)`.
///
/// With `supplied = Some((a₃′, a₅′))` both inclusions are also checked
/// directly by the containment predicate.
pub fn validate_shape_geometric_on(
    pairs: &[ShapePair],
    a4: f64,
    a6: f64,
    supplied: Option<(f64, f64)>,
) -> Result<CertReport> {
    if !(a4 > 0.0 && a6 > 0.0 && a4.is_finite() && a6.is_finite()) {
        return Err(contract("shape exponents must be positive"));
    }
    let mut r = CertReport::new("shape_geometric", "pairs", 0, pairs.len());
    r.stat("a4", a4).stat("a6", a6);
    let mut a3p = f64::INFINITY;
    let mut a5p = 0.0f64;
    let mut used = 0usize;
    for q in pairs {
        let v = q.eta.volume() / q.xi.volume();
        if v > 1.0 {
            continue;
        }
        used += 1;
        let xi0 = q.xi.at_origin();
        let eta0 = q.eta.at_origin();
        let inner = 1.0 / (xi0.containment_factor(&eta0)? * v.powf(a4));
        let outer = eta0.containment_factor(&xi0)? / v.powf(a6);
        a3p = a3p.min(inner);
        a5p = a5p.max(outer);
        if let Some((s3, s5)) = supplied {
            let lo = xi0.dilate(s3 * v.powf(a4))?;
            let hi = xi0.dilate(s5 * v.powf(a6))?;
            let ok_lo = lo.is_subset_of_tol(&eta0, BOUND_SLACK)?;
            let ok_hi = eta0.is_subset_of_tol(&hi, BOUND_SLACK)?;
            if !(ok_lo && ok_hi) {
                r.fail(
                    Witness::new(if ok_lo {
                        "eta not inside the outer dilate"
                    } else {
                        "inner dilate not inside eta"
                    })
                    .vector("x", &q.x)
                    .scalar("t", q.t)
                    .vector("y", &q.y)
                    .scalar("s", q.s)
                    .scalar("volume_ratio", v)
                    .scalar("needed_a3_prime", inner)
                    .scalar("needed_a5_prime", outer),
                );
            }
        }
    }
    r.samples = used;
    if used == 0 {
        r.fail(Witness::new("no pairs with |eta| <= |xi|"));
        return Ok(r);
    }
    r.constant("a3_prime", a3p).constant("a5_prime", a5p);
    if let Some((s3, s5)) = supplied {
        r.stat("supplied_a3_prime", s3).stat("supplied_a5_prime", s5);
    }
    Ok(r)
}

/// Volume condition `a₁2^{-t} ≤ |θ_{x,t}| ≤ a₂2^{-t}` on sampled `(x, t)`.
///
/// Reports `a1`, `a2` as the extreme normalised volumes; fails against the
/// cover's declared bounds, if any, with `1e-12` relative slack.
pub fn validate_volume<C: Cover + ?Sized>(
    cover: &C,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<CertReport> {
    if count == 0 {
        return Err(contract("validate_volume needs at least one sample"));
    }
    let n = cover.dim();
    let draws: Vec<Result<(Vec<f64>, f64, f64)>> = sampler.map(count, |_, rng| {
        let x = region.point(rng, n);
        let t = region.scale(rng);
        let v = cover.eval(&x, t)?.volume() * t.exp2();
        Ok((x, t, v))
    });
    let mut r = CertReport::new("volume", &cover.name(), sampler.seed, count);
    let bounds = cover.volume_bounds();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for d in draws {
        let (x, t, v) = d?;
        lo = lo.min(v);
        hi = hi.max(v);
        if let Some((a1, a2)) = bounds {
            if v < a1 * (1.0 - VOLUME_SLACK) || v > a2 * (1.0 + VOLUME_SLACK) {
                r.fail(
                    Witness::new("normalised volume outside [a1, a2]")
                        .vector("x", &x)
                        .scalar("t", t)
                        .scalar("volume_times_2^t", v)
                        .scalar("a1", a1)
                        .scalar("a2", a2),
                );
            }
        }
    }
    r.constant("a1", lo).constant("a2", hi);
    if let Some((a1, a2)) = bounds {
        r.stat("declared_a1", a1).stat("declared_a2", a2);
    }
    Ok(r)
}

/// Smallest `u ∈ [0, 512]` with `pred(u)`, for a predicate that is monotone
/// (false then true), to absolute tolerance `1e-9·max(1, u)`.
fn smallest_drop(pred: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    if pred(0.0)? {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !pred(hi)? {
        hi *= 2.0;
        if hi > 512.0 {
            return Err(Error::OutOfRange("no scale drop up to 512 gives containment".into()));
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > 1e-9 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Options for [`engulf_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngulfOptions {
    /// `λ` is log-uniform in this range.
    pub lambda_range: (f64, f64),
    /// A candidate `c` to check `λθ_{x,t} ⊆ θ_{x,t−cλ}` against.
    pub c: Option<f64>,
}

impl Default for EngulfOptions {
    fn default() -> Self {
        Self {
            lambda_range: (1.0, 32.0),
            c: None,
        }
    }
}

/// Estimates the smallest `c` with `λθ_{x,t} ⊆ θ_{x,t−cλ}`.
///
/// Each sample finds the smallest scale drop `u` with `λθ_{x,t} ⊆ θ_{x,t−u}`
/// and records `u/λ`; `c` is the maximum. Samples with `λ = 1` need `u = 0`.
pub fn engulf_constant<C: Cover + ?Sized>(
    cover: &C,
    sampler: &Sampler,
    region: &Region,
    count: usize,
    opts: EngulfOptions,
) -> Result<CertReport> {
    let (l0, l1) = opts.lambda_range;
    if !(l0 >= 1.0 && l1 >= l0 && l1.is_finite()) {
        return Err(contract("lambda range must satisfy 1 <= lo <= hi"));
    }
    let n = cover.dim();
    let draws: Vec<Result<(Vec<f64>, f64, f64, f64, bool)>> = sampler.map(count, |_, rng| {
        let x = region.point(rng, n);
        let t = region.scale(rng);
        let lambda = rng.uniform(l0.log2(), l1.log2()).exp2();
        let big = cover.eval(&x, t)?.dilate(lambda)?;
        let u = smallest_drop(|u| big.is_subset_of(&cover.eval(&x, t - u)?))?;
        let ok = match opts.c {
            Some(c) => big.is_subset_of(&cover.eval(&x, t - c * lambda)?)?,
            None => true,
        };
        Ok((x, t, lambda, u, ok))
    });
    let mut r = CertReport::new("engulf", &cover.name(), sampler.seed, count);
    let mut c_hat = 0.0f64;
    let mut u_max = 0.0f64;
    let mut worst: Option<Witness> = None;
    for d in draws {
        let (x, t, lambda, u, ok) = d?;
        let ci = u / lambda;
        u_max = u_max.max(u);
        if ci > c_hat || worst.is_none() {
            c_hat = c_hat.max(ci);
            worst = Some(
                Witness::new("largest u/lambda")
                    .vector("x", &x)
                    .scalar("t", t)
                    .scalar("lambda", lambda)
                    .scalar("u", u),
            );
        }
        if !ok {
            r.fail(
                Witness::new("dilate not engulfed at the supplied c")
                    .vector("x", &x)
                    .scalar("t", t)
                    .scalar("lambda", lambda)
                    .scalar("needed_u", u),
            );
        }
    }
    r.constant("c", c_hat).stat("max_scale_drop", u_max);
    if let Some(c) = opts.c {
        r.stat("supplied_c", c);
    }
    if let Some(w) = worst {
        r.witness(w);
    }
    Ok(r)
}

/// Constants used to evaluate the two candidate formulas for `s*`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnionHints {
    pub a4: Option<f64>,
    pub a5: Option<f64>,
    pub c: Option<f64>,
}

/// Smallest `ℓ ≥ 0` with `θ_{x,t} ∪ η ⊆ θ_{x,t−ℓ}`.
pub fn union_engulf_scale<C: Cover + ?Sized>(cover: &C, x: &[f64], t: f64, eta: &Ellipsoid) -> Result<f64> {
    let xi = cover.eval(x, t)?;
    smallest_drop(|l| {
        let big = cover.eval(x, t - l)?;
        Ok(xi.is_subset_of(&big)? && eta.is_subset_of(&big)?)
    })
}

/// Estimates `s*` in `θ_{x,t} ∪ θ_{y,t+s} ⊆ θ_{x,t−ℓ}` for `ℓ ≥ s*`, over
/// sampled intersecting pairs.
///
/// Also measures the dilation route: the smallest `λ` with
/// `θ_{y,t+s} ⊆ λθ_{x,t}`, compared against `1 + 2a₅` when `a₅` is known.
/// Both candidate closed forms `(1+2a₅)c` and `(1+a₄)c` are reported when
/// their inputs are available; neither is treated as the reference.
pub fn union_engulf<C: Cover + ?Sized>(
    cover: &C,
    sampler: &Sampler,
    region: &Region,
    count: usize,
    hints: UnionHints,
) -> Result<CertReport> {
    let pairs = sample_shape_pairs(cover, sampler, region, count)?;
    let results: Vec<Result<(f64, f64)>> = Sampler::new(sampler.seed).map(pairs.len(), |i, _| {
        let p = &pairs[i];
        let l = union_engulf_scale(cover, &p.x, p.t, &p.eta)?;
        let lam = p.eta.containment_factor(&p.xi)?.max(1.0);
        Ok((l, lam))
    });
    let mut r = CertReport::new("union_engulf", &cover.name(), sampler.seed, pairs.len());
    let a5 = hints.a5.or_else(|| cover.params().map(|p| p.a5));
    let a4 = hints.a4.or_else(|| cover.params().map(|p| p.a4));
    let mut s_star = 0.0f64;
    let mut lam_max = 1.0f64;
    let mut worst = None;
    for (p, res) in pairs.iter().zip(results) {
        let (l, lam) = res?;
        if l > s_star || worst.is_none() {
            s_star = s_star.max(l);
            worst = Some(
                Witness::new("largest union scale drop")
                    .vector("x", &p.x)
                    .scalar("t", p.t)
                    .vector("y", &p.y)
                    .scalar("s", p.s)
                    .scalar("ell", l),
            );
        }
        lam_max = lam_max.max(lam);
        if let Some(a5) = a5 {
            if lam > (1.0 + 2.0 * a5) * (1.0 + BOUND_SLACK) {
                r.fail(
                    Witness::new("dilation needed exceeds 1 + 2 a5")
                        .vector("x", &p.x)
                        .scalar("t", p.t)
                        .vector("y", &p.y)
                        .scalar("s", p.s)
                        .scalar("dilation", lam),
                );
            }
        }
    }
    if pairs.is_empty() {
        r.fail(Witness::new("no intersecting pairs were found"));
    }
    r.constant("s_star", s_star).stat("max_dilation", lam_max);
    if let Some(a5) = a5 {
        r.stat("dilation_bound", 1.0 + 2.0 * a5);
    }
    if let Some(c) = hints.c {
        if let Some(a5) = a5 {
            r.stat("s_star_candidate_a5", (1.0 + 2.0 * a5) * c);
        }
        if let Some(a4) = a4 {
            r.stat("s_star_candidate_a4", (1.0 + a4) * c);
        }
    }
    if let Some(w) = worst {
        r.witness(w);
    }
    Ok(r)
}

/// The two regime combinations with explicit Θ₀ shape bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theta0Case {
    /// `x` in the middle regime at `t`, `y` in the flat regime at `t+s`.
    Case1,
    /// `x` in the flat regime at `t`, `y` in the middle regime at `t+s`.
    Case2,
}

impl Theta0Case {
    /// `(p, q)` in `fwd ≤ 3·2^{-ps}` and `rev ≤ 3·2^{qs}`.
    pub fn exponents(self) -> (f64, f64) {
        match self {
            Self::Case1 => (1.0 / 3.0, 2.0 / 3.0),
            Self::Case2 => (1.0 / 6.0, 5.0 / 6.0),
        }
    }

    fn regimes(self) -> (Theta0Regime, Theta0Regime) {
        match self {
            Self::Case1 => (Theta0Regime::Middle, Theta0Regime::Flat),
            Self::Case2 => (Theta0Regime::Flat, Theta0Regime::Middle),
        }
    }
}

/// Height drawn so that `theta0_semi_axes(·, t)` lands in `regime`.
///
/// Middle heights are log-uniform in `(2^{-t/2}, min(2^{-t/3}, 4·2^{-t/2})]`;
/// larger heights cannot meet a flat ellipse at a finer scale.
fn theta0_height(rng: &mut SeededRng, regime: Theta0Regime, t: f64) -> f64 {
    let sign = if rng.coin(0.5) { 1.0 } else { -1.0 };
    match regime {
        Theta0Regime::Middle => {
            let lo = -t / 2.0;
            let hi = (-t / 3.0).min(2.0 - t / 2.0);
            sign * rng.uniform(lo, hi).exp2()
        }
        _ => sign * rng.uniform(0.0, (-t / 2.0).exp2()),
    }
}

/// Intersecting Θ₀ pairs in the regime combination `case`, with
/// `t ∈ (0, t_max]` and `s ∈ [0, s_max]` taken from `region`.
pub fn theta0_case_pairs(
    case: Theta0Case,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<Vec<ShapePair>> {
    let cover = Theta0Cover;
    let (rx, ry) = case.regimes();
    let t_max = region.t_range.1.max(1.0);
    let s_max = region.s_range.1.max(0.0);
    let draws: Vec<Result<Option<ShapePair>>> = sampler.map(count, |_, rng| {
        for _ in 0..4 * MAX_ATTEMPTS {
            let t = rng.uniform(0.0, t_max);
            if t <= 0.0 {
                continue;
            }
            // Bias towards small gaps, where most intersecting pairs live.
            let s = s_max * rng.uniform(0.0, 1.0).powi(2);
            let x2 = theta0_height(rng, rx, t);
            let y2 = theta0_height(rng, ry, t + s);
            let x1 = rng.uniform(-region.half_width, region.half_width);
            let (sx, _, gx) = theta0_semi_axes(x2, t);
            let (sy, _, gy) = theta0_semi_axes(y2, t + s);
            if gx != rx || gy != ry {
                continue;
            }
            let y1 = x1 + rng.uniform(-1.0, 1.0) * (sx + sy);
            let x = vec![x1, x2];
            let y = vec![y1, y2];
            let xi = cover.eval(&x, t)?;
            let eta = cover.eval(&y, t + s)?;
            if xi.intersects(&eta)? {
                return ShapePair::new(x, t, y, s, xi, eta).map(Some);
            }
        }
        Ok(None)
    });
    let mut pairs = Vec::with_capacity(count);
    for d in draws {
        if let Some(p) = d? {
            pairs.push(p);
        }
    }
    Ok(pairs)
}

/// Checks the explicit bounds `fwd ≤ 3·2^{-ps}`, `rev ≤ 3·2^{qs}` of `case`
/// on targeted pairs, with `1e-9` relative slack.
pub fn theta0_case_audit(case: Theta0Case, sampler: &Sampler, region: &Region, count: usize) -> Result<CertReport> {
    let pairs = theta0_case_pairs(case, sampler, region, count)?;
    let (p, q) = case.exponents();
    let name = match case {
        Theta0Case::Case1 => "theta0_case1",
        Theta0Case::Case2 => "theta0_case2",
    };
    let mut r = CertReport::new(name, "theta0", sampler.seed, pairs.len());
    let mut worst_fwd = 0.0f64;
    let mut worst_rev = 0.0f64;
    for pr in &pairs {
        let fb = 3.0 * (-p * pr.s).exp2();
        let rb = 3.0 * (q * pr.s).exp2();
        worst_fwd = worst_fwd.max(pr.fwd / fb);
        worst_rev = worst_rev.max(pr.rev / rb);
        if pr.fwd > fb * (1.0 + BOUND_SLACK) || pr.rev > rb * (1.0 + BOUND_SLACK) {
            r.fail(
                Witness::new("explicit case bound exceeded")
                    .vector("x", &pr.x)
                    .scalar("t", pr.t)
                    .vector("y", &pr.y)
                    .scalar("s", pr.s)
                    .scalar("fwd", pr.fwd)
                    .scalar("fwd_bound", fb)
                    .scalar("rev", pr.rev)
                    .scalar("rev_bound", rb),
            );
        }
    }
    if pairs.is_empty() {
        r.fail(Witness::new("no pairs in the requested regimes"));
    }
    r.stat("pairs", pairs.len() as f64)
        .stat("requested", count as f64)
        .stat("worst_fwd_ratio", worst_fwd)
        .stat("worst_rev_ratio", worst_rev)
        .stat("max_s", pairs.iter().map(|p| p.s).fold(0.0, f64::max));
    Ok(r)
}
