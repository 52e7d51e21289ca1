//! Direction sets and the centred inscribed-ellipsoid fit.

use std::f64::consts::PI;

use crate::distance::QuasiDistance;
use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};
use crate::numeric::{nelder_mead, norm, sym_eig, Matrix, SeededRng};

/// Default number of sampled directions in dimension `n`.
pub fn default_direction_count(n: usize) -> usize {
    match n {
        0..=2 => 64,
        3 => 512,
        _ => 256 * n,
    }
}

/// Quasi-uniform unit vectors: golden-angle steps on the circle, a
/// Fibonacci lattice on the sphere, and fixed-seed Gaussian directions in
/// higher dimensions.
pub fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|j| {
                let a = j as f64 * golden;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => (0..count)
            .map(|j| {
                let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let a = j as f64 * golden;
                vec![rho * a.cos(), rho * a.sin(), z]
            })
            .collect(),
        _ => {
            let mut rng = SeededRng::new(0x00d1_2ec7, n as u64);
            (0..count).map(|_| rng.unit_vector(n)).collect()
        }
    }
}

/// A centred ellipsoid inside `B(x, r)` with its measured quasi-convexity ratio.
#[derive(Debug, Clone)]
pub struct InscribedFit {
    pub ellipsoid: Ellipsoid,
    /// `max_u R(u)/r_ξ(u)` over the directions used.
    pub q_hat: f64,
    /// Whether the metric supplied the ellipsoid in closed form.
    pub closed_form: bool,
}

/// Largest centred ellipsoid with `r_ξ(u) ≤ R(u)` on `dirs` (plus the
/// metric's critical directions).
///
/// Metrics with a closed-form inscribed ellipsoid return it directly.
/// Otherwise the ellipsoid is `s·exp(S)(𝔹ⁿ) + x` with `S` symmetric and
/// traceless; for fixed `S` the best scale is `s = min_j R_j/r_S(u_j)`, and
/// `S` is found by Nelder–Mead started from the covariance of the sampled
/// boundary points.
pub fn inscribed_centered_ellipsoid<D: QuasiDistance + ?Sized>(
    metric: &D,
    x: &[f64],
    r: f64,
    dirs: &[Vec<f64>],
) -> Result<InscribedFit> {
    let n = metric.dim();
    let mut all: Vec<Vec<f64>> = dirs.to_vec();
    all.extend(metric.critical_directions(x, r));
    let radii: Vec<f64> = all
        .iter()
        .map(|u| metric.directional_radius(x, u, r))
        .collect::<Result<_>>()?;
    if radii.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{}: unbounded directional radius", metric.name())));
    }
    let (ellipsoid, closed_form) = match metric.inscribed_ellipsoid(x, r) {
        Some(e) => (e?, true),
        None => (fit(n, x, &all, &radii)?, false),
    };
    let mut q_hat = 1.0f64;
    for (u, big) in all.iter().zip(&radii) {
        q_hat = q_hat.max(big / ellipsoid.radial(u)?);
    }
    Ok(InscribedFit {
        ellipsoid,
        q_hat,
        closed_form,
    })
}

/// Indices `(i, j)` of the free entries of a traceless symmetric matrix:
/// every off-diagonal pair and all diagonal entries but the last.
fn free_entries(n: usize) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

fn assemble(n: usize, idx: &[(usize, usize)], p: &[f64]) -> Matrix {
    let mut s = Matrix::zeros(n);
    let mut trace = 0.0;
    for (&(i, j), &v) in idx.iter().zip(p) {
        s[(i, j)] = v;
        s[(j, i)] = v;
        if i == j {
            trace += v;
        }
    }
    s[(n - 1, n - 1)] = -trace;
    s
}

/// `exp(σ S)` for symmetric `S`.
fn sym_exp(s: &Matrix, sigma: f64) -> Result<Matrix> {
    let e = sym_eig(s)?;
    let d: Vec<f64> = e.eigenvalues.iter().map(|l| (sigma * l).exp()).collect();
    Ok(&(&e.basis * &Matrix::from_diag(&d)) * &e.basis.transpose())
}

/// `log s(S) = min_j log(R_j |exp(−S) u_j|)`; the volume is `ωₙ sⁿ`.
fn log_scale(s: &Matrix, dirs: &[Vec<f64>], radii: &[f64]) -> Result<f64> {
    let inv = sym_exp(s, -1.0)?;
    Ok(dirs
        .iter()
        .zip(radii)
        .map(|(u, r)| (r * norm(&inv.mul_vec(u))).ln())
        .fold(f64::INFINITY, f64::min))
}

fn fit(n: usize, x: &[f64], dirs: &[Vec<f64>], radii: &[f64]) -> Result<Ellipsoid> {
    let idx = free_entries(n);

    // Start from the boundary-point covariance C: S₀ = ½ log C, made traceless.
    let mut cov = Matrix::zeros(n);
    for (u, r) in dirs.iter().zip(radii) {
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] += r * r * u[i] * u[j];
            }
        }
    }
    let e = sym_eig(&cov)?;
    let logs: Vec<f64> = e.eigenvalues.iter().map(|l| 0.5 * l.max(1e-300).ln()).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = logs.iter().map(|l| l - mean).collect();
    let s0 = &(&e.basis * &Matrix::from_diag(&d)) * &e.basis.transpose();
    let mut p: Vec<f64> = idx.iter().map(|&(i, j)| s0[(i, j)]).collect();

    // log s(S) is a minimum over directions and so has kinks; climb a
    // soft-min with growing sharpness, then polish on the exact value.
    let exact = |p: &[f64]| -> f64 { -log_scale(&assemble(n, &idx, p), dirs, radii).unwrap_or(f64::NEG_INFINITY) };
    let mut step = 0.25;
    for beta in [10.0, 100.0, 1000.0, 1e4] {
        let soft = |p: &[f64]| -> f64 {
            let Ok(inv) = sym_exp(&assemble(n, &idx, p), -1.0) else {
                return f64::INFINITY;
            };
            let l: Vec<f64> = dirs.iter().zip(radii).map(|(u, r)| (r * norm(&inv.mul_vec(u))).ln()).collect();
            let lo = l.iter().copied().fold(f64::INFINITY, f64::min);
            let sum: f64 = l.iter().map(|v| (-beta * (v - lo)).exp()).sum();
            -(lo - sum.ln() / beta)
        };
        p = nelder_mead(soft, &p, step, 1e-13, 400 * (p.len() + 1)).0;
        step *= 0.3;
    }
    let (polished, _) = nelder_mead(exact, &p, 1e-3, 1e-15, 400 * (p.len() + 1));
    if exact(&polished) <= exact(&p) {
        p = polished;
    }
    let s = assemble(n, &idx, &p);
    let scale = log_scale(&s, dirs, radii)?.exp();
    Ellipsoid::new(sym_exp(&s, 1.0)?.scaled(scale), x.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{Euclidean, SupNorm, Theta0Metric};

    /// Hides a metric's closed forms so the generic fit is exercised.
    struct Opaque<D>(D);

    impl<D: QuasiDistance> QuasiDistance for Opaque<D> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn name(&self) -> String {
            format!("opaque[{}]", self.0.name())
        }
        fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
            self.0.eval(x, y)
        }
        fn critical_directions(&self, x: &[f64], r: f64) -> Vec<Vec<f64>> {
            self.0.critical_directions(x, r)
        }
    }

    #[test]
    fn directions_are_unit() {
        for n in 2..=4 {
            for u in directions(n, 50) {
                assert!((norm(&u) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_ball_is_its_own_fit() {
        let m = Opaque(Euclidean::new(2).unwrap());
        let f = inscribed_centered_ellipsoid(&m, &[0.5, 0.5], 0.3, &directions(2, 64)).unwrap();
        assert!(!f.closed_form);
        assert!((f.q_hat - 1.0).abs() < 1e-6, "{}", f.q_hat);
        assert!((f.ellipsoid.volume() / (PI * 0.09) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn square_gets_inscribed_disk() {
        let m = Opaque(SupNorm::new(2).unwrap());
        let f = inscribed_centered_ellipsoid(&m, &[0.0, 0.0], 1.0, &directions(2, 64)).unwrap();
        // With finitely many rays the fit may bulge slightly between them, so
        // q̂ sits just above the continuum value √2.
        assert!(f.q_hat >= 2f64.sqrt() - 1e-9 && f.q_hat < 1.01 * 2f64.sqrt(), "{}", f.q_hat);
        assert!((f.ellipsoid.volume() / PI - 1.0).abs() < 2e-3);
    }

    #[test]
    fn theta0_flat_ball_is_recovered() {
        // x₂ = 0 and small r: the ball is the flat ellipse (2^{-t/3}, 2^{-2t/3}).
        let m = Opaque(Theta0Metric);
        let r = PI * 2f64.powi(-9);
        let f = inscribed_centered_ellipsoid(&m, &[0.2, 0.0], r, &directions(2, 64)).unwrap();
        assert!(f.q_hat < 1.01, "{}", f.q_hat);
        assert!(f.ellipsoid.volume() / r > 0.98);
    }

    #[test]
    fn sphere_ball_in_three_dimensions() {
        let m = Opaque(Euclidean::new(3).unwrap());
        let f = inscribed_centered_ellipsoid(&m, &[0.0; 3], 2.0, &directions(3, 128)).unwrap();
        assert!((f.q_hat - 1.0).abs() < 1e-6);
    }
}
