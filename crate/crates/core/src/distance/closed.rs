//! Quasi-distances with closed-form values and balls.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_pair, BoundingBox, QuasiDistance, Symmetry};
use crate::cover::{nsw_height, Cover, Theta0Cover};
use crate::ellipsoid::Ellipsoid;
use crate::error::{contract, Result};
use crate::numeric::{norm, solve_power_sum, sub, unit_ball_volume, MAX_DIM};

/// Value of the Θ₀ one-sided distance with the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta0Dist {
    pub value: f64,
    /// 0 when `x = y`, otherwise 1, 2 or 3.
    pub case: u8,
    /// `π max{|Δ₁|^{6/5}|x₂|^{6/5}, Δ₂⁶|x₂|⁻⁶}` in case 3; within a factor 8
    /// of `value`.
    pub max_form: Option<f64>,
}

/// `φ(x, y) = 2^{-3/4}[Δ₁² + √(Δ₁⁴ + 4Δ₂²)]^{3/4}`
fn phi(d1: f64, d2: f64) -> f64 {
    let d1s = d1 * d1;
    (-0.75f64).exp2() * (d1s + (d1s * d1s + 4.0 * d2 * d2).sqrt()).powf(0.75)
}

/// Smallest area of a Θ₀ ellipse centred at `x` that contains `y`.
///
/// Case 1 (`|x−y| ≥ 1` or `|x−y|^{2/3} < |x₂|`): `π|x−y|²`.
/// Case 2 (`|x₂| ≤ φ`): `πφ²`.
/// Case 3: `πz⁻³` with `z` the root of `a z⁵ + b z = 1`,
/// `a = Δ₁²x₂²`, `b = Δ₂²/x₂²`.
/// Boundary ties resolve to the earlier case.
pub fn theta0_case(x: &[f64], y: &[f64]) -> Result<Theta0Dist> {
    check_pair(2, x, y)?;
    let d1 = y[0] - x[0];
    let d2 = y[1] - x[1];
    let h = x[1].abs();
    let dist = d1.hypot(d2);
    if dist == 0.0 {
        return Ok(Theta0Dist {
            value: 0.0,
            case: 0,
            max_form: None,
        });
    }
    if dist >= 1.0 || dist.powf(2.0 / 3.0) < h {
        return Ok(Theta0Dist {
            value: PI * dist * dist,
            case: 1,
            max_form: None,
        });
    }
    let f = phi(d1, d2);
    if h <= f {
        return Ok(Theta0Dist {
            value: PI * f * f,
            case: 2,
            max_form: None,
        });
    }
    let a = d1 * d1 * h * h;
    let b = d2 * d2 / (h * h);
    let z = if a == 0.0 {
        1.0 / b
    } else if b == 0.0 {
        a.powf(-0.2)
    } else {
        solve_power_sum(&[a, b], &[5.0, 1.0])?
    };
    let max_form = PI * (d1.abs() * h).powf(1.2).max(d2.powi(6) / h.powi(6));
    Ok(Theta0Dist {
        value: PI * z.powi(-3),
        case: 3,
        max_form: Some(max_form),
    })
}

pub fn rho_theta0(x: &[f64], y: &[f64]) -> Result<f64> {
    theta0_case(x, y).map(|d| d.value)
}

/// `max{|Δ₁|, min{|Δ₂|^{1/(k+1)}, |Δ₂|/|x₁|^k}}`, the `x₁ = 0` branch dropping
/// the second term; `x` is the ball centre.
pub fn rho_nsw(k: u32, x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(2, x, y)?;
    let d1 = (y[0] - x[0]).abs();
    let d2 = (y[1] - x[1]).abs();
    let root = d2.powf(1.0 / (k as f64 + 1.0));
    let second = if x[0] == 0.0 || k == 0 {
        root
    } else {
        root.min(d2 / x[0].abs().powi(k as i32))
    };
    Ok(d1.max(second))
}

/// The one-sided Θ₀ distance in closed form. Its balls are exactly the Θ₀
/// ellipses: `B(x, π2^{-t}) = int θ_{x,t}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Theta0Metric;

impl Theta0Metric {
    fn ellipse(&self, x: &[f64], r: f64) -> Result<Ellipsoid> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(contract("ball radius must be positive"));
        }
        Theta0Cover.eval(x, -(r / PI).log2())
    }
}

impl QuasiDistance for Theta0Metric {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        "theta0".into()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        rho_theta0(x, y)
    }
    fn symmetry(&self) -> Symmetry {
        Symmetry::Quasi(None)
    }
    fn ball_box(&self, x: &[f64], r: f64) -> Result<BoundingBox> {
        Ok(BoundingBox::of_ellipsoid(&self.ellipse(x, r)?).scaled(1.0 + 1e-9))
    }
    fn directional_radius(&self, x: &[f64], u: &[f64], r: f64) -> Result<f64> {
        self.ellipse(x, r)?.radial(u)
    }
    fn inscribed_ellipsoid(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
        Some(self.ellipse(x, r))
    }
}

/// The planar metric `ρ_k` whose balls are rectangles with half-widths
/// `(δ, max(δ^{k+1}, |x₁|^k δ))`.
#[derive(Debug, Clone, Copy)]
pub struct NswMetric {
    pub k: u32,
}

impl NswMetric {
    pub fn new(k: u32) -> Self {
        Self { k }
    }

    /// Half-widths of `B(x, δ)`.
    pub fn half_widths(&self, x: &[f64], delta: f64) -> (f64, f64) {
        (delta, nsw_height(self.k, x[0], delta))
    }

    /// `|B(x, δ)| = 4δ² max(δ^k, |x₁|^k)`.
    pub fn ball_volume(&self, x: &[f64], delta: f64) -> f64 {
        let k = self.k as i32;
        4.0 * delta * delta * delta.powi(k).max(x[0].abs().powi(k))
    }
}

impl QuasiDistance for NswMetric {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        format!("nsw(k={})", self.k)
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        rho_nsw(self.k, x, y)
    }
    fn symmetry(&self) -> Symmetry {
        if self.k == 0 {
            Symmetry::Exact
        } else {
            Symmetry::Quasi(None)
        }
    }
    fn known_kappa(&self) -> Option<f64> {
        (self.k == 0).then_some(1.0)
    }
    fn ball_box(&self, x: &[f64], r: f64) -> Result<BoundingBox> {
        let (w, h) = self.half_widths(x, r);
        Ok(BoundingBox::centered(x, &[1.25 * w, 1.25 * h]))
    }
    fn directional_radius(&self, x: &[f64], u: &[f64], r: f64) -> Result<f64> {
        let (w, h) = self.half_widths(x, r);
        let a = if u[0] == 0.0 { f64::INFINITY } else { w / u[0].abs() };
        let b = if u[1] == 0.0 { f64::INFINITY } else { h / u[1].abs() };
        Ok(a.min(b))
    }
    fn inscribed_ellipsoid(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
        let (w, h) = self.half_widths(x, r);
        Some(Ellipsoid::axis_aligned(x.to_vec(), &[w, h]))
    }
    fn critical_directions(&self, x: &[f64], r: f64) -> Vec<Vec<f64>> {
        let (w, h) = self.half_widths(x, r);
        rectangle_corners(&[w, h])
    }
}

/// Unit vectors towards the corners of the box with half-widths `half`.
fn rectangle_corners(half: &[f64]) -> Vec<Vec<f64>> {
    let n = half.len();
    (0..1usize << n)
        .map(|mask| {
            let v: Vec<f64> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { -half[i] } else { half[i] })
                .collect();
            let l = norm(&v);
            v.into_iter().map(|c| c / l).collect()
        })
        .collect()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(contract(format!("dimension {n} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

/// `|x − y|`
#[derive(Debug, Clone, Copy)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n })
    }
}

impl QuasiDistance for Euclidean {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        "euclidean".into()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.n, x, y)?;
        Ok(norm(&sub(y, x)))
    }
    fn known_kappa(&self) -> Option<f64> {
        Some(1.0)
    }
    fn ball_box(&self, x: &[f64], r: f64) -> Result<BoundingBox> {
        Ok(BoundingBox::centered(x, &vec![r; self.n]))
    }
    fn directional_radius(&self, _x: &[f64], _u: &[f64], r: f64) -> Result<f64> {
        Ok(r)
    }
    fn inscribed_ellipsoid(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
        Some(Ellipsoid::ball(x.to_vec(), r))
    }
}

/// `max_i |xᵢ − yᵢ|`
#[derive(Debug, Clone, Copy)]
pub struct SupNorm {
    n: usize,
}

impl SupNorm {
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n })
    }
}

impl QuasiDistance for SupNorm {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        "supnorm".into()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.n, x, y)?;
        Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
    fn known_kappa(&self) -> Option<f64> {
        Some(1.0)
    }
    fn ball_box(&self, x: &[f64], r: f64) -> Result<BoundingBox> {
        Ok(BoundingBox::centered(x, &vec![1.25 * r; self.n]))
    }
    fn directional_radius(&self, _x: &[f64], u: &[f64], r: f64) -> Result<f64> {
        Ok(r / u.iter().map(|c| c.abs()).fold(0.0, f64::max))
    }
    fn inscribed_ellipsoid(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
        Some(Ellipsoid::ball(x.to_vec(), r))
    }
    fn critical_directions(&self, _x: &[f64], r: f64) -> Vec<Vec<f64>> {
        rectangle_corners(&vec![r; self.n])
    }
}

/// `ωₙ|x − y|ⁿ`, the distance induced by the isotropic cover.
#[derive(Debug, Clone, Copy)]
pub struct IsotropicMetric {
    n: usize,
}

impl IsotropicMetric {
    pub fn new(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n })
    }

    fn radius(&self, r: f64) -> f64 {
        (r / unit_ball_volume(self.n)).powf(1.0 / self.n as f64)
    }
}

impl QuasiDistance for IsotropicMetric {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        "isotropic".into()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(self.n, x, y)?;
        Ok(unit_ball_volume(self.n) * norm(&sub(y, x)).powi(self.n as i32))
    }
    /// `|x−z|ⁿ ≤ 2^{n−1}(|x−y|ⁿ + |y−z|ⁿ)` by convexity of `sⁿ`.
    fn known_kappa(&self) -> Option<f64> {
        Some((self.n as f64 - 1.0).exp2())
    }
    fn ball_box(&self, x: &[f64], r: f64) -> Result<BoundingBox> {
        Ok(BoundingBox::centered(x, &vec![self.radius(r); self.n]))
    }
    fn directional_radius(&self, _x: &[f64], _u: &[f64], r: f64) -> Result<f64> {
        Ok(self.radius(r))
    }
    fn inscribed_ellipsoid(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
        Some(Ellipsoid::ball(x.to_vec(), self.radius(r)))
    }
}
