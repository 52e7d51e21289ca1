//! Ellipsoids `M(𝔹ⁿ) + c` and the predicates between them.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::numeric::{
    max_on_ball, min_on_ball, norm, random_orthogonal, sub, sym_eig, unit_ball_volume, Matrix,
    SeededRng, MAX_DIM,
};
use crate::report::{CertReport, Witness};

/// Normalised tolerance for containment and intersection predicates.
pub const CONTAINMENT_TOL: f64 = 1e-10;
/// Tolerance for point membership.
pub const POINT_TOL: f64 = 1e-12;
/// Centres closer than this are treated as coincident.
pub const SAME_CENTER_TOL: f64 = 1e-12;

/// The image of the closed unit ball under `u ↦ M u + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    m: Matrix,
    c: Vec<f64>,
}

impl Ellipsoid {
    /// Checks dimensions and the nonsingularity floor.
    pub fn new(m: Matrix, c: Vec<f64>) -> Result<Self> {
        let n = m.dim();
        if n == 0 || n > MAX_DIM {
            return Err(contract(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if c.len() != n {
            return Err(contract("centre and matrix dimensions differ"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(contract("centre has non-finite coordinates"));
        }
        m.check_nonsingular()?;
        Ok(Self { m, c })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        Self::new(Matrix::identity(n).scaled(radius), center)
    }

    pub fn axis_aligned(center: Vec<f64>, semi_axes: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diag(semi_axes), center)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn center(&self) -> &[f64] {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Lebesgue measure `|det M| · ωₙ`.
    pub fn volume(&self) -> f64 {
        self.m.det().abs() * unit_ball_volume(self.dim())
    }

    /// `λ·ξ = λ M(𝔹ⁿ) + c`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(contract(format!("dilation factor must be positive, got {lambda}")));
        }
        Ok(Self {
            m: self.m.scaled(lambda),
            c: self.c.clone(),
        })
    }

    /// Same shape, new centre.
    pub fn recentered(&self, c: Vec<f64>) -> Result<Self> {
        if c.len() != self.dim() {
            return Err(contract("centre dimension mismatch"));
        }
        Ok(Self { m: self.m.clone(), c })
    }

    /// Same shape centred at the origin (`ξ − c_ξ`).
    pub fn at_origin(&self) -> Self {
        Self {
            m: self.m.clone(),
            c: vec![0.0; self.dim()],
        }
    }

    /// `|M⁻¹(p − c)|`: 1 on the boundary.
    pub fn gauge(&self, p: &[f64]) -> Result<f64> {
        Ok(norm(&self.m.solve(&sub(p, &self.c))?))
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.gauge(p).map(|g| g <= 1.0 + POINT_TOL).unwrap_or(false)
    }

    /// `c + M u` for a unit vector `u`.
    pub fn boundary_point(&self, u: &[f64]) -> Vec<f64> {
        let l = norm(u);
        let mu = self.m.mul_vec(u);
        self.c.iter().zip(mu).map(|(c, v)| c + v / l).collect()
    }

    /// Distance from the centre to the boundary along unit direction `u`.
    pub fn radial(&self, u: &[f64]) -> Result<f64> {
        Ok(1.0 / norm(&self.m.solve(u)?))
    }

    /// `(M_o⁻¹ M_s, M_o⁻¹(c_s − c_o))`, mapping `self` into the frame where `outer` is the unit ball.
    fn relative_to(&self, outer: &Self) -> Result<(Matrix, Vec<f64>)> {
        check_dims(self, outer)?;
        let inv = outer.m.inverse()?;
        Ok((&inv * &self.m, inv.mul_vec(&sub(&self.c, &outer.c))))
    }

    /// Smallest `λ` with `self ⊆ λ·outer`.
    pub fn containment_factor(&self, outer: &Self) -> Result<f64> {
        let (a, d) = self.relative_to(outer)?;
        max_on_ball(&a, &d)
    }

    /// `self ⊆ outer` up to [`CONTAINMENT_TOL`].
    pub fn is_subset_of(&self, outer: &Self) -> Result<bool> {
        self.is_subset_of_tol(outer, CONTAINMENT_TOL)
    }

    pub fn is_subset_of_tol(&self, outer: &Self, tol: f64) -> Result<bool> {
        Ok(self.containment_factor(outer)? <= 1.0 + tol)
    }

    /// `min_{p ∈ self} |M_o⁻¹(p − c_o)|`: at most 1 exactly when the two meet.
    pub fn separation(&self, other: &Self) -> Result<f64> {
        let (a, d) = self.relative_to(other)?;
        min_on_ball(&a, &d)
    }

    pub fn intersects(&self, other: &Self) -> Result<bool> {
        Ok(self.separation(other)? <= 1.0 + CONTAINMENT_TOL)
    }
}

fn check_dims(a: &Ellipsoid, b: &Ellipsoid) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(contract(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Orthogonal `U` and diagonal `D` with `U A(𝔹ⁿ) = D(𝔹ⁿ)`.
///
/// `D` holds the square roots of the eigenvalues of `AAᵀ` in descending order.
pub fn diag_reduce(a: &Matrix) -> Result<(Matrix, Matrix)> {
    a.check_nonsingular()?;
    let eig = sym_eig(&a.outer_gram())?;
    let d: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok((eig.basis.transpose(), Matrix::from_diag(&d)))
}

/// Checks `ξ ⊆ 2(|ξ|/|η|)·η` for nested `η ⊆ ξ`, or the factor-free version
/// when the centres coincide.
///
/// The tightest passing factor is reported as `factor`; it is the smallest
/// `λ` with `ξ ⊆ λ·η`, computed exactly from the norm extremes.
pub fn check_reverse_inclusion(eta: &Ellipsoid, xi: &Ellipsoid) -> Result<CertReport> {
    check_reverse_inclusion_tol(eta, xi, CONTAINMENT_TOL)
}

pub fn check_reverse_inclusion_tol(eta: &Ellipsoid, xi: &Ellipsoid, tol: f64) -> Result<CertReport> {
    if !eta.is_subset_of_tol(xi, tol)? {
        return Err(contract("reverse inclusion needs eta ⊆ xi"));
    }
    let ratio = xi.volume() / eta.volume();
    let same_center = norm(&sub(eta.center(), xi.center())) <= SAME_CENTER_TOL;
    let bound = if same_center { ratio } else { 2.0 * ratio };
    let factor = xi.containment_factor(eta)?;

    let mut report = CertReport::new("reverse_inclusion", "ellipsoid pair", 0, 1);
    report
        .constant("factor", factor)
        .stat("volume_ratio", ratio)
        .stat("bound", bound)
        .stat("same_center", if same_center { 1.0 } else { 0.0 });
    if !xi.is_subset_of_tol(&eta.dilate(bound)?, tol)? {
        report.fail(
            Witness::new("xi not inside the dilated eta")
                .scalar("factor", factor)
                .scalar("bound", bound)
                .vector("eta_center", eta.center())
                .vector("xi_center", xi.center()),
        );
    }
    Ok(report)
}

/// `R diag(σ) R′ (𝔹ⁿ) + c` with `log₂ σᵢ` uniform in `log_axis_range` and the
/// centre uniform in `[-center_half_width, center_half_width]ⁿ`.
pub fn random_ellipsoid(
    rng: &mut SeededRng,
    n: usize,
    log_axis_range: (f64, f64),
    center_half_width: f64,
) -> Result<Ellipsoid> {
    let (lo, hi) = log_axis_range;
    if lo > hi {
        return Err(contract("log-axis range must satisfy lo <= hi"));
    }
    let sigma: Vec<f64> = (0..n).map(|_| rng.uniform(lo, hi).exp2()).collect();
    let r = random_orthogonal(rng, n);
    let r2 = random_orthogonal(rng, n);
    let m = &(&r * &Matrix::from_diag(&sigma)) * &r2;
    let c = (0..n)
        .map(|_| rng.uniform(-center_half_width, center_half_width))
        .collect();
    Ellipsoid::new(m, c)
}

/// A random pair `η ⊆ ξ`: `η` is a rotated, shrunk copy of `ξ` (factors in
/// `[0.1, 0.9]`), shifted inside `ξ`; with `same_center` the shift is zero.
pub fn random_nested_pair(
    rng: &mut SeededRng,
    n: usize,
    log_axis_range: (f64, f64),
    same_center: bool,
) -> Result<(Ellipsoid, Ellipsoid)> {
    let xi = random_ellipsoid(rng, n, log_axis_range, 1.0)?;
    loop {
        let f: Vec<f64> = (0..n).map(|_| rng.uniform(0.1, 0.9)).collect();
        let fmax = f.iter().cloned().fold(0.0, f64::max);
        let fmin = f.iter().cloned().fold(1.0, f64::min);
        let rot = random_orthogonal(rng, n);
        let m = &(xi.matrix() * &rot) * &Matrix::from_diag(&f);
        let c = if same_center {
            xi.center().to_vec()
        } else {
            // Shifts up to 1 - fmin are allowed; the predicate rejects the ones that leave ξ.
            let v: Vec<f64> = rng
                .in_unit_ball(n)
                .into_iter()
                .map(|x| x * (1.0 - fmin))
                .collect();
            let v = if rng.coin(0.5) {
                // push towards the tight regime |v| = 1 - fmax
                let l = norm(&v).max(1e-300);
                v.iter().map(|x| x / l * (1.0 - fmax)).collect()
            } else {
                v
            };
            crate::numeric::add(xi.center(), &xi.matrix().mul_vec(&v))
        };
        let eta = Ellipsoid::new(m, c)?;
        if eta.is_subset_of(&xi)? {
            return Ok((eta, xi));
        }
    }
}
