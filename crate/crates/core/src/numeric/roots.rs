use crate::error::{contract, numeric, Result};

const MAX_BISECTIONS: usize = 2000;

/// Locates the sign change of a monotone `f` on `[lo, hi]` to within `tol`.
///
/// Returns the midpoint of the final bracket. Fails when `f(lo)` and `f(hi)`
/// have the same strict sign.
pub fn bisect_monotone(f: impl Fn(f64) -> f64, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(tol > 0.0) {
        return Err(contract(format!("bisect: invalid bracket ({lo}, {hi}) / tol {tol}")));
    }
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || flo.signum() == fhi.signum() {
        return Err(contract(format!(
            "bisect: f does not change sign on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    let rising = fhi > 0.0;
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(numeric("bisect: iteration cap exceeded"))
}

/// Positive root of `Σ aᵢ x^{βᵢ} = 1` for positive coefficients and exponents.
///
/// The root lies strictly inside `(min_i d^{-1/βᵢ} b, b)` with
/// `b = min_i aᵢ^{-1/βᵢ}`; the solve is Newton safeguarded by that bracket.
pub fn solve_power_sum(a: &[f64], beta: &[f64]) -> Result<f64> {
    let d = a.len();
    if d < 2 || beta.len() != d {
        return Err(contract("power sum needs at least two terms and matching exponents"));
    }
    if a.iter().chain(beta).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(contract("power sum coefficients and exponents must be positive"));
    }
    let (lower, upper) = power_sum_bounds(a, beta);
    let f = |x: f64| -> (f64, f64) {
        let mut v = -1.0;
        let mut dv = 0.0;
        for (ai, bi) in a.iter().zip(beta) {
            let p = ai * x.powf(*bi);
            v += p;
            dv += bi * p / x;
        }
        (v, dv)
    };

    let (mut lo, mut hi) = (lower, upper);
    let mut x = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, x);
    for _ in 0..200 {
        let (v, dv) = f(x);
        if v.abs() < best.0 {
            best = (v.abs(), x);
        }
        if v == 0.0 {
            return Ok(x);
        }
        if v > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        let newton = x - v / dv;
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(best.1)
}

/// `(min_i d^{-1/βᵢ} b, b)` with `b = min_i aᵢ^{-1/βᵢ}`.
pub fn power_sum_bounds(a: &[f64], beta: &[f64]) -> (f64, f64) {
    let d = a.len() as f64;
    let b = a
        .iter()
        .zip(beta)
        .map(|(ai, bi)| ai.powf(-1.0 / bi))
        .fold(f64::INFINITY, f64::min);
    let shrink = beta
        .iter()
        .map(|bi| d.powf(-1.0 / bi))
        .fold(f64::INFINITY, f64::min);
    (shrink * b, b)
}
