//! Dense numeric kernels shared by every other module.

mod eigen;
mod extrema;
mod matrix;
mod rng;
mod roots;
mod simplex;

pub use eigen::{spectral_norm, sym_eig, EigenDecomposition};
pub use extrema::{max_on_ball, min_on_ball, norm_extrema_on_ball, BallExtrema};
pub use matrix::{add, axpy, dot, norm, scale, sub, Matrix, DET_FLOOR, MAX_DIM};
pub use rng::SeededRng;
pub use roots::{bisect_monotone, power_sum_bounds, solve_power_sum};
pub use simplex::nelder_mead;

/// Volume of the Euclidean unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    // ω₀ = 1, ω₁ = 2, ωₙ = 2π/n · ωₙ₋₂
    let mut w = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        w *= 2.0 * PI / k as f64;
        k += 2;
    }
    w
}

/// Random orthogonal matrix (Gram–Schmidt on Gaussian columns).
pub fn random_orthogonal(rng: &mut SeededRng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        for _ in 0..2 {
            for c in &cols {
                let p = dot(&v, c);
                v = axpy(&v, -p, c);
            }
        }
        let l = norm(&v);
        if l > 1e-8 {
            cols.push(scale(&v, 1.0 / l));
        }
    }
    Matrix::from_columns(&cols).expect("square by construction")
}
