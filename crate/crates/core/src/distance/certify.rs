//! Directional radii, Monte Carlo ball volumes and the sampling certifiers
//! for symmetry, the triangle constant and Ahlfors regularity.

use serde::{Deserialize, Serialize};

use super::{BoundingBox, QuasiDistance, Symmetry};
use crate::error::{contract, numeric, Error, Result};
use crate::numeric::{add, axpy, scale, sub, SeededRng};
use crate::report::{CertReport, Witness};
use crate::sampling::{Region, Sampler};

/// Relative bisection tolerance for directional radii.
const RADIUS_TOL: f64 = 1e-10;
/// Points per RNG block in Monte Carlo volume estimates.
const MC_BLOCK: usize = 4096;
/// Two-sided 99% normal quantile.
const Z99: f64 = 2.576;

/// `sup{τ : ρ(x, x + τu) < r}` by bracketing and bisection; assumes the ball
/// is star-shaped about `x`.
pub fn bisect_directional_radius<D: QuasiDistance + ?Sized>(
    metric: &D,
    x: &[f64],
    u: &[f64],
    r: f64,
) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(contract("ball radius must be positive"));
    }
    let inside = |tau: f64| -> Result<bool> { Ok(metric.eval(x, &axpy(x, tau, u))? < r) };
    let (mut lo, mut hi);
    if inside(1.0)? {
        hi = 2.0;
        while inside(hi)? {
            hi *= 2.0;
            if hi > 1e30 {
                return Err(Error::Config(format!("{}: ball is unbounded along u", metric.name())));
            }
        }
        lo = hi / 2.0;
    } else {
        lo = 0.5;
        while !inside(lo)? {
            lo *= 0.5;
            if lo < 1e-280 {
                return Err(numeric("directional radius below floating range"));
            }
        }
        hi = lo * 2.0;
    }
    while hi - lo > RADIUS_TOL * lo {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Hit-or-miss estimate of `|B(x, r)|` with a 99% binomial half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub hits: usize,
    pub samples: usize,
    pub box_volume: f64,
}

/// Samples `points` uniform points in the metric's bounding box for
/// `B(x, r)` and counts the hits.
///
/// The half-width uses `p = (hits+1)/(N+2)` in the variance so that empty or
/// full boxes still get a non-zero interval.
pub fn ball_volume_mc<D: QuasiDistance + ?Sized>(
    metric: &D,
    x: &[f64],
    r: f64,
    sampler: &Sampler,
    points: usize,
) -> Result<VolumeEstimate> {
    if points == 0 {
        return Err(contract("Monte Carlo volume needs at least one point"));
    }
    ball_volume_mc_in(metric, x, r, &metric.ball_box(x, r)?, sampler, points)
}

/// [`ball_volume_mc`] over a caller-supplied box, which must contain the ball.
///
/// With a fixed box and seed the sample points do not depend on `r`, so the
/// estimate is nondecreasing in `r`.
pub fn ball_volume_mc_in<D: QuasiDistance + ?Sized>(
    metric: &D,
    x: &[f64],
    r: f64,
    bbox: &BoundingBox,
    sampler: &Sampler,
    points: usize,
) -> Result<VolumeEstimate> {
    if points == 0 {
        return Err(contract("Monte Carlo volume needs at least one point"));
    }
    let exact = metric.exact_ball(x, r).transpose()?;
    let blocks = points.div_ceil(MC_BLOCK);
    let counts: Vec<Result<usize>> = sampler.map(blocks, |b, rng| {
        let m = MC_BLOCK.min(points - b * MC_BLOCK);
        let mut hits = 0;
        for _ in 0..m {
            let y: Vec<f64> = bbox
                .lo
                .iter()
                .zip(&bbox.hi)
                .map(|(l, h)| rng.uniform(*l, *h))
                .collect();
            let inside = match &exact {
                Some(e) => e.gauge(&y)? < 1.0,
                None => metric.eval(x, &y)? < r,
            };
            if inside {
                hits += 1;
            }
        }
        Ok(hits)
    });
    let mut hits = 0;
    for c in counts {
        hits += c?;
    }
    let vol = bbox.volume();
    let nf = points as f64;
    let p = (hits as f64 + 1.0) / (nf + 2.0);
    Ok(VolumeEstimate {
        estimate: vol * hits as f64 / nf,
        half_width: Z99 * (p * (1.0 - p) / nf).sqrt() * vol,
        hits,
        samples: points,
        box_volume: vol,
    })
}

/// `x`, `z = x + ℓv` with `log₂ℓ ∈ [−10, 2]`, and `y` either uniform in the
/// ball of radius `2ℓ` about `x` (even samples) or near the segment `[x, z]`.
fn sample_triple(rng: &mut SeededRng, region: &Region, n: usize, near_segment: bool) -> [Vec<f64>; 3] {
    let x = region.point(rng, n);
    let ell = rng.uniform(-10.0, 2.0).exp2();
    let z = axpy(&x, ell, &rng.unit_vector(n));
    let y = if near_segment {
        let tau = rng.uniform(0.0, 1.0);
        let on = axpy(&x, tau, &sub(&z, &x));
        add(&on, &scale(&rng.in_unit_ball(n), 0.05 * ell))
    } else {
        add(&x, &scale(&rng.in_unit_ball(n), 2.0 * ell))
    };
    [x, y, z]
}

/// `κ̂ = max ρ(x,z)/(ρ(x,y) + ρ(y,z))` over sampled triples.
///
/// Fails only when the metric declares a closed-form `κ` that a sample
/// exceeds by more than `1e-9` relative, or when `κ̂` is not finite.
pub fn triangle_constant<D: QuasiDistance + ?Sized>(
    metric: &D,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<CertReport> {
    let n = metric.dim();
    let draws: Vec<Result<(f64, [Vec<f64>; 3])>> = sampler.map(count, |i, rng| {
        let [x, y, z] = sample_triple(rng, region, n, i % 2 == 1);
        let den = metric.eval(&x, &y)? + metric.eval(&y, &z)?;
        let num = metric.eval(&x, &z)?;
        let ratio = if den > 0.0 { num / den } else { 0.0 };
        Ok((ratio, [x, y, z]))
    });
    let mut r = CertReport::new("triangle", &metric.name(), sampler.seed, count);
    let mut best = 0.0f64;
    let mut arg = None;
    for d in draws {
        let (ratio, t) = d?;
        if ratio > best || arg.is_none() {
            best = best.max(ratio);
            arg = Some(t);
        }
    }
    r.constant("kappa", best);
    if let Some([x, y, z]) = arg {
        let w = Witness::new("largest triangle ratio")
            .vector("x", &x)
            .vector("y", &y)
            .vector("z", &z)
            .scalar("ratio", best);
        match metric.known_kappa() {
            Some(k) if best > k * (1.0 + 1e-9) => {
                r.fail(w);
            }
            _ => {
                r.witness(w);
            }
        }
    }
    if let Some(k) = metric.known_kappa() {
        r.stat("known_kappa", k);
    }
    if !best.is_finite() {
        r.fail(Witness::new("triangle ratio is not finite"));
    }
    Ok(r)
}

/// Checks `ρ(x, x) = 0`, `ρ(x, y) > 0` for `x ≠ y`, and the declared
/// symmetry mode on sampled pairs; reports the largest `ρ(x,y)/ρ(y,x)`.
pub fn symmetry_check<D: QuasiDistance + ?Sized>(
    metric: &D,
    sampler: &Sampler,
    region: &Region,
    count: usize,
) -> Result<CertReport> {
    let n = metric.dim();
    let draws: Vec<Result<(Vec<f64>, Vec<f64>, f64, f64, f64)>> = sampler.map(count, |_, rng| {
        let x = region.point(rng, n);
        let ell = rng.uniform(-10.0, 2.0).exp2();
        let y = axpy(&x, ell, &rng.unit_vector(n));
        Ok((x.clone(), y.clone(), metric.eval(&x, &y)?, metric.eval(&y, &x)?, metric.eval(&x, &x)?))
    });
    let mut r = CertReport::new("symmetry", &metric.name(), sampler.seed, count);
    let mode = metric.symmetry();
    let mut worst = 1.0f64;
    for d in draws {
        let (x, y, a, b, zero) = d?;
        let w = || Witness::new("").vector("x", &x).vector("y", &y).scalar("rho_xy", a).scalar("rho_yx", b);
        if zero != 0.0 {
            r.fail(Witness { description: "rho(x, x) is not zero".into(), ..w() });
            continue;
        }
        if !(a > 0.0 && b > 0.0) {
            r.fail(Witness { description: "rho vanishes off the diagonal".into(), ..w() });
            continue;
        }
        let ratio = (a / b).max(b / a);
        worst = worst.max(ratio);
        let bad = match mode {
            Symmetry::Exact => (a - b).abs() > 1e-12 * a.max(b),
            Symmetry::Quasi(Some(c)) => ratio > c * (1.0 + 1e-9),
            Symmetry::Quasi(None) => !ratio.is_finite(),
        };
        if bad {
            r.fail(Witness { description: "declared symmetry violated".into(), ..w() });
        }
    }
    r.constant("symmetry_ratio", worst);
    Ok(r)
}

/// Options for [`ahlfors_certify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AhlforsOptions {
    /// Number of centres; the first is the origin.
    pub centers: usize,
    /// Radii per centre, log-spaced over `log2_r_range`.
    pub rungs: usize,
    pub log2_r_range: (f64, f64),
    /// Monte Carlo points per ball.
    pub mc_points: usize,
}

impl Default for AhlforsOptions {
    fn default() -> Self {
        Self {
            centers: 8,
            rungs: 19,
            log2_r_range: (-12.0, 6.0),
            mc_points: 20_000,
        }
    }
}

/// Outcome of [`ahlfors_certify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhlforsCert {
    /// `max(|B|/r, r/|B|)` over all measured balls.
    pub c1_hat: f64,
    pub diverging: bool,
    pub report: CertReport,
}

/// Ratios drifting by at least this factor over the ladder count as divergence …
const DIVERGENCE_SPREAD: f64 = 100.0;
/// … when the fitted log-log slope is at least this steep.
const DIVERGENCE_SLOPE: f64 = 0.5;

/// Measures `|B(x, r)|/r` on a ladder of radii at sampled centres.
///
/// A centre whose ratios spread by `≥ 100×` with a log-log slope of
/// magnitude `≥ 1/2` is reported as divergent (the measure is not `∼ r`);
/// otherwise `c1` is the largest of `|B|/r` and `r/|B|`.
pub fn ahlfors_certify<D: QuasiDistance + ?Sized>(
    metric: &D,
    sampler: &Sampler,
    region: &Region,
    opts: AhlforsOptions,
) -> Result<AhlforsCert> {
    if opts.centers == 0 || opts.rungs < 2 || opts.mc_points == 0 {
        return Err(contract("Ahlfors check needs centres, two or more rungs and MC points"));
    }
    let n = metric.dim();
    let centers: Vec<Vec<f64>> = (0..opts.centers)
        .map(|j| {
            if j == 0 {
                vec![0.0; n]
            } else {
                region.point(&mut sampler.substream(1).rng(j), n)
            }
        })
        .collect();
    let (l0, l1) = opts.log2_r_range;
    let radii: Vec<f64> = (0..opts.rungs)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (opts.rungs - 1) as f64).exp2())
        .collect();
    let jobs = opts.centers * opts.rungs;
    let mc = sampler.substream(2);
    let est: Vec<Result<VolumeEstimate>> = Sampler::new(sampler.seed).map(jobs, |k, _| {
        let (j, i) = (k / opts.rungs, k % opts.rungs);
        ball_volume_mc(metric, &centers[j], radii[i], &mc.substream(k as u64), opts.mc_points)
    });
    let mut ratios = vec![vec![0.0; opts.rungs]; opts.centers];
    for (k, e) in est.into_iter().enumerate() {
        let e = e?;
        ratios[k / opts.rungs][k % opts.rungs] = e.estimate / radii[k % opts.rungs];
    }

    let mut r = CertReport::new("ahlfors", &metric.name(), sampler.seed, jobs);
    let mut c1 = 1.0f64;
    let mut diverging = false;
    let mut steepest = 0.0f64;
    let lr: Vec<f64> = radii.iter().map(|r| r.log10()).collect();
    for (j, q) in ratios.iter().enumerate() {
        if q.iter().any(|v| *v <= 0.0) {
            diverging = true;
            r.fail(
                Witness::new("empty ball estimate")
                    .vector("x", &centers[j])
                    .vector("ratios", q),
            );
            continue;
        }
        for v in q {
            c1 = c1.max(*v).max(1.0 / v);
        }
        let lq: Vec<f64> = q.iter().map(|v| v.log10()).collect();
        let slope = ls_slope(&lr, &lq);
        let spread = q.iter().cloned().fold(0.0, f64::max) / q.iter().cloned().fold(f64::INFINITY, f64::min);
        steepest = steepest.max(slope.abs());
        if spread >= DIVERGENCE_SPREAD && slope.abs() >= DIVERGENCE_SLOPE {
            diverging = true;
            r.fail(
                Witness::new("|B|/r drifts with r")
                    .vector("x", &centers[j])
                    .scalar("loglog_slope", slope)
                    .scalar("per_decade_factor", 10f64.powf(slope.abs()))
                    .scalar("spread", spread)
                    .scalar("r_first", radii[0])
                    .scalar("ratio_first", q[0])
                    .scalar("r_last", radii[opts.rungs - 1])
                    .scalar("ratio_last", q[opts.rungs - 1]),
            );
        }
    }
    r.constant("c1", c1).stat("max_loglog_slope", steepest);
    Ok(AhlforsCert {
        c1_hat: c1,
        diverging,
        report: r,
    })
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{Euclidean, IsotropicMetric, NswMetric, SupNorm, Theta0Metric};

    #[test]
    fn generic_bisection_matches_closed_form() {
        let m = NswMetric::new(1);
        let x = [0.5, 0.1];
        let u = [0.8, -0.6];
        let exact = m.directional_radius(&x, &u, 0.2).unwrap();
        let b = bisect_directional_radius(&m, &x, &u, 0.2).unwrap();
        assert!((b / exact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sup_norm_square_volume() {
        let m = SupNorm::new(2).unwrap();
        let e = ball_volume_mc(&m, &[0.3, 0.3], 0.5, &Sampler::new(1), 100_000).unwrap();
        assert!((e.estimate - 1.0).abs() <= 3.0 * e.half_width, "{e:?}");
    }

    #[test]
    fn mc_monotone_in_radius() {
        let m = Theta0Metric;
        let s = Sampler::new(2);
        let bbox = m.ball_box(&[0.0, 0.0], 0.05).unwrap();
        let mut prev = 0.0;
        for r in [0.005, 0.01, 0.02, 0.04, 0.05] {
            let e = ball_volume_mc_in(&m, &[0.0, 0.0], r, &bbox, &s, 20_000).unwrap();
            assert!(e.estimate >= prev);
            prev = e.estimate;
        }
    }

    #[test]
    fn euclidean_triangle_constant_at_most_one() {
        let m = Euclidean::new(2).unwrap();
        let r = triangle_constant(&m, &Sampler::new(3), &Region::default(), 2000).unwrap();
        assert!(r.pass);
        assert!(r.get("kappa").unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn isotropic_triangle_constant_near_two() {
        let m = IsotropicMetric::new(2).unwrap();
        let r = triangle_constant(&m, &Sampler::new(4), &Region::default(), 4000).unwrap();
        assert!(r.pass);
        let k = r.get("kappa").unwrap();
        assert!(k > 1.8 && k <= 2.0 + 1e-9, "{k}");
    }

    #[test]
    fn sup_norm_is_not_ahlfors() {
        let m = SupNorm::new(2).unwrap();
        let opts = AhlforsOptions {
            centers: 2,
            rungs: 8,
            mc_points: 4000,
            ..Default::default()
        };
        let c = ahlfors_certify(&m, &Sampler::new(5), &Region::default(), opts).unwrap();
        assert!(c.diverging && !c.report.pass);
    }

    #[test]
    fn theta0_is_ahlfors() {
        let opts = AhlforsOptions {
            centers: 3,
            rungs: 8,
            mc_points: 4000,
            ..Default::default()
        };
        let c = ahlfors_certify(&Theta0Metric, &Sampler::new(6), &Region::default(), opts).unwrap();
        assert!(c.report.pass, "{:?}", c.report);
        assert!(c.c1_hat < 1.2);
    }

    #[test]
    fn declared_symmetry_holds() {
        let s = Sampler::new(7);
        let reg = Region::default();
        assert!(symmetry_check(&Euclidean::new(3).unwrap(), &s, &reg, 500).unwrap().pass);
        assert!(symmetry_check(&NswMetric::new(2), &s, &reg, 500).unwrap().pass);
        assert!(symmetry_check(&Theta0Metric, &s, &reg, 500).unwrap().pass);
    }
}
