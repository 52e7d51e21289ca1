//! Extremes of `|Au + d|` over the closed unit ball.
//!
//! With `S = AᵀA = V diag(λ) Vᵀ` and `g = Vᵀ Aᵀ d`, stationary points on the
//! sphere satisfy `(νI − S)u = Aᵀd` (maximum, `ν ≥ λ_max`) or
//! `(S + νI)u = −Aᵀd` (minimum, `ν ≥ 0`). Both reduce to the secular equation
//! `Σ gᵢ² / wᵢ(ν)² = 1`, solved by safeguarded Newton on `1/‖u(ν)‖ − 1`.

use super::{eigen::sym_eig, matrix::norm, Matrix};
use crate::error::{numeric, Result};

const MAX_ITER: usize = 200;

/// Minimum and maximum of `|Au + d|` over `|u| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallExtrema {
    pub lo: f64,
    pub hi: f64,
}

pub fn norm_extrema_on_ball(a: &Matrix, d: &[f64]) -> Result<BallExtrema> {
    Ok(BallExtrema {
        lo: min_on_ball(a, d)?,
        hi: max_on_ball(a, d)?,
    })
}

/// `max_{|u|≤1} |Au + d|`
pub fn max_on_ball(a: &Matrix, d: &[f64]) -> Result<f64> {
    let n = a.dim();
    let eig = sym_eig(&a.gram())?;
    let lam = &eig.eigenvalues;
    let g = eig.basis.tr_mul_vec(&a.tr_mul_vec(d));
    let gnorm = norm(&g);
    let lmax = lam[0];
    let scale = lmax.abs().max(gnorm).max(f64::MIN_POSITIVE);

    if gnorm == 0.0 {
        // d ⟂ range(Aᵀ): the top eigenvector is a maximiser.
        return Ok(eval(a, d, &eig.basis.column(0)));
    }

    // Components in the (numerically) top eigenspace.
    let top_tol = 1e-13 * scale;
    let top: Vec<usize> = (0..n).filter(|&i| lmax - lam[i] <= top_tol).collect();
    let g_top = top.iter().map(|&i| g[i] * g[i]).sum::<f64>().sqrt();
    if g_top <= 1e-12 * gnorm {
        let rest: f64 = (0..n)
            .filter(|i| !top.contains(i))
            .map(|i| (g[i] / (lmax - lam[i])).powi(2))
            .sum();
        if rest <= 1.0 {
            // Hard case: ν = λ_max, fill the remaining length along the top eigenvector.
            let mut c = vec![0.0; n];
            for i in 0..n {
                if !top.contains(&i) {
                    c[i] = g[i] / (lmax - lam[i]);
                }
            }
            let i0 = top[0];
            let sign = if g[i0] < 0.0 { -1.0 } else { 1.0 };
            c[i0] = sign * (1.0 - rest).max(0.0).sqrt();
            let u = eig.basis.mul_vec(&c);
            return Ok(eval(a, d, &u));
        }
    }

    let nu = solve_secular(lam, &g, lmax, lmax + gnorm, |l, nu| nu - l)?;
    let c: Vec<f64> = (0..n).map(|i| g[i] / (nu - lam[i])).collect();
    let u = normalize(eig.basis.mul_vec(&c));
    Ok(eval(a, d, &u))
}

/// `min_{|u|≤1} |Au + d|`
pub fn min_on_ball(a: &Matrix, d: &[f64]) -> Result<f64> {
    let n = a.dim();
    let eig = sym_eig(&a.gram())?;
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let g = eig.basis.tr_mul_vec(&a.tr_mul_vec(d));
    let gnorm = norm(&g);
    if gnorm == 0.0 {
        return Ok(norm(d));
    }
    let scale = lam[0].max(gnorm);
    let null_tol = 1e-13 * scale;

    // Interior minimiser u = −S⁺g when it has length ≤ 1 and g has no null-space part.
    let g_null: f64 = (0..n)
        .filter(|&i| lam[i] <= null_tol)
        .map(|i| g[i] * g[i])
        .sum::<f64>()
        .sqrt();
    if g_null <= 1e-12 * gnorm {
        let c: Vec<f64> = (0..n)
            .map(|i| if lam[i] > null_tol { -g[i] / lam[i] } else { 0.0 })
            .collect();
        if norm(&c) <= 1.0 {
            let u = eig.basis.mul_vec(&c);
            return Ok(eval(a, d, &u));
        }
    }

    let nu = solve_secular(&lam, &g, 0.0, gnorm, |l, nu| l + nu)?;
    let c: Vec<f64> = (0..n).map(|i| -g[i] / (lam[i] + nu)).collect();
    let u = normalize(eig.basis.mul_vec(&c));
    Ok(eval(a, d, &u))
}

fn eval(a: &Matrix, d: &[f64], u: &[f64]) -> f64 {
    let au = a.mul_vec(u);
    norm(&au.iter().zip(d).map(|(x, y)| x + y).collect::<Vec<_>>())
}

fn normalize(u: Vec<f64>) -> Vec<f64> {
    let l = norm(&u);
    if l == 0.0 {
        u
    } else {
        u.into_iter().map(|v| v / l).collect()
    }
}

/// Root of `ψ(ν) = 1/‖u(ν)‖ − 1` on `[lo, hi]`, where `‖u(ν)‖² = Σ gᵢ²/w(λᵢ,ν)²`.
/// `ψ` is increasing on the bracket, negative (or −1) at `lo` and ≥ 0 at `hi`.
fn solve_secular(
    lam: &[f64],
    g: &[f64],
    lo: f64,
    hi: f64,
    w: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let psi = |nu: f64| -> (f64, f64) {
        let mut phi = 0.0;
        let mut dphi = 0.0;
        for (l, gi) in lam.iter().zip(g) {
            if *gi == 0.0 {
                continue;
            }
            let wi = w(*l, nu);
            if wi <= 0.0 {
                return (-1.0, f64::INFINITY);
            }
            phi += gi * gi / (wi * wi);
            dphi += -2.0 * gi * gi / (wi * wi * wi);
        }
        if phi == 0.0 {
            return (f64::INFINITY, 0.0);
        }
        let r = phi.sqrt();
        // d/dν (φ^{-1/2}) = −½ φ^{-3/2} φ'
        (1.0 / r - 1.0, -0.5 * dphi / (phi * r))
    };

    let (mut lo, mut hi) = (lo, hi);
    let mut nu = hi;
    for _ in 0..MAX_ITER {
        let (f, df) = psi(nu);
        if !f.is_finite() && f > 0.0 {
            hi = nu;
        } else if f.abs() <= 4.0 * f64::EPSILON {
            return Ok(nu);
        } else if f > 0.0 {
            hi = nu;
        } else {
            lo = nu;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            return Ok(hi);
        }
        let newton = if df.is_finite() && df > 0.0 && f.is_finite() {
            nu - f / df
        } else {
            f64::NAN
        };
        nu = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(numeric("secular equation: iteration cap exceeded"))
}
