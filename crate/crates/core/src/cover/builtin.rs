use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Cover, CoverParams};
use crate::ellipsoid::Ellipsoid;
use crate::error::{contract, Result};
use crate::numeric::{bisect_monotone, unit_ball_volume, MAX_DIM};

fn check_point(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(contract(format!("expected a point in dimension {n}, got {}", x.len())));
    }
    Ok(())
}

/// Euclidean balls with `|θ_{x,t}| = 2^{-t}`.
#[derive(Debug, Clone, Copy)]
pub struct IsotropicCover {
    n: usize,
}

impl IsotropicCover {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(contract(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        Ok(Self { n })
    }

    /// `(2^{-t}/ωₙ)^{1/n}`
    pub fn radius(&self, t: f64) -> f64 {
        ((-t).exp2() / unit_ball_volume(self.n)).powf(1.0 / self.n as f64)
    }
}

impl Cover for IsotropicCover {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> String {
        "isotropic".into()
    }
    fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid> {
        check_point(x, self.n)?;
        Ellipsoid::ball(x.to_vec(), self.radius(t))
    }
    fn params(&self) -> Option<CoverParams> {
        let e = 1.0 / self.n as f64;
        Some(CoverParams {
            dim: self.n,
            a1: 1.0,
            a2: 1.0,
            a3: 1.0,
            a4: e,
            a5: 1.0,
            a6: e,
        })
    }
}

/// `θ_{x,t} = diag(2^{-e₁t}, …, 2^{-eₙt})(𝔹ⁿ) + x` with `Σ eᵢ = 1`, so
/// `|θ_{x,t}| = ωₙ 2^{-t}`.
#[derive(Debug, Clone)]
pub struct DiagonalCover {
    exponents: Vec<f64>,
}

impl DiagonalCover {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        let n = exponents.len();
        if n == 0 || n > MAX_DIM {
            return Err(contract(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if exponents.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(contract("diagonal cover exponents must be positive"));
        }
        let sum: f64 = exponents.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(contract(format!("diagonal cover exponents must sum to 1, got {sum}")));
        }
        Ok(Self { exponents })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }
}

impl Cover for DiagonalCover {
    fn dim(&self) -> usize {
        self.exponents.len()
    }
    fn name(&self) -> String {
        let e: Vec<String> = self.exponents.iter().map(|e| format!("{e}")).collect();
        format!("diagonal({})", e.join(","))
    }
    fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid> {
        check_point(x, self.dim())?;
        let axes: Vec<f64> = self.exponents.iter().map(|e| (-e * t).exp2()).collect();
        Ellipsoid::axis_aligned(x.to_vec(), &axes)
    }
    fn params(&self) -> Option<CoverParams> {
        let w = unit_ball_volume(self.dim());
        let emax = self.exponents.iter().cloned().fold(0.0, f64::max);
        let emin = self.exponents.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(CoverParams {
            dim: self.dim(),
            a1: w,
            a2: w,
            a3: 1.0,
            a4: emax,
            a5: 1.0,
            a6: emin,
        })
    }
}

/// Which row of the Θ₀ semi-axis table applies at `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theta0Regime {
    /// `t ≤ 0`: disk of radius `2^{-t/2}`.
    Coarse,
    /// `t > 0`, `|x₂| > 2^{-t/3}`: disk of radius `2^{-t/2}`.
    Round,
    /// `t > 0`, `2^{-t/2} < |x₂| ≤ 2^{-t/3}`: `(2^{-5t/6}/|x₂|, 2^{-t/6}|x₂|)`.
    Middle,
    /// `t > 0`, `|x₂| ≤ 2^{-t/2}`: `(2^{-t/3}, 2^{-2t/3})`.
    Flat,
}

/// Semi-axes `(σ₁, σ₂)` of the Θ₀ ellipse at height `x₂` and scale `t`.
pub fn theta0_semi_axes(x2: f64, t: f64) -> (f64, f64, Theta0Regime) {
    let h = x2.abs();
    if t <= 0.0 {
        let r = (-t / 2.0).exp2();
        (r, r, Theta0Regime::Coarse)
    } else if h > (-t / 3.0).exp2() {
        let r = (-t / 2.0).exp2();
        (r, r, Theta0Regime::Round)
    } else if h > (-t / 2.0).exp2() {
        (
            (-5.0 * t / 6.0).exp2() / h,
            (-t / 6.0).exp2() * h,
            Theta0Regime::Middle,
        )
    } else {
        ((-t / 3.0).exp2(), (-2.0 * t / 3.0).exp2(), Theta0Regime::Flat)
    }
}

/// The planar cover of axis-aligned ellipses given by the four-regime
/// semi-axis table; every member has area `π2^{-t}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Theta0Cover;

impl Theta0Cover {
    /// Shape constants read off the case analysis: `‖M_x⁻¹M_y‖ ≤ 3·2^{-s/6}`
    /// and `‖M_y⁻¹M_x‖ ≤ 3·2^{5s/6}`.
    pub const DECLARED: CoverParams = CoverParams {
        dim: 2,
        a1: PI,
        a2: PI,
        a3: 1.0 / 3.0,
        a4: 5.0 / 6.0,
        a5: 3.0,
        a6: 1.0 / 6.0,
    };
}

impl Cover for Theta0Cover {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        "theta0".into()
    }
    fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid> {
        check_point(x, 2)?;
        let (s1, s2, _) = theta0_semi_axes(x[1], t);
        Ellipsoid::axis_aligned(x.to_vec(), &[s1, s2])
    }
    fn params(&self) -> Option<CoverParams> {
        Some(Self::DECLARED)
    }
}

/// Cover built from the ellipses inscribed in the rectangles
/// `B_k(x, δ) = {|y₁−x₁| < δ, |y₂−x₂| < max(δ^{k+1}, |x₁|^k δ)}`, with `δ = r(t)`
/// the largest radius whose inscribed ellipse has area at most `2^{-t}`.
#[derive(Debug, Clone, Copy)]
pub struct NswCover {
    k: u32,
}

impl NswCover {
    pub fn new(k: u32) -> Self {
        Self { k }
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// Vertical half-width of `B_k(x, δ)`.
pub(crate) fn nsw_height(k: u32, x1: f64, delta: f64) -> f64 {
    delta.powi(k as i32 + 1).max(x1.abs().powi(k as i32) * delta)
}

/// `r(t)`: the `δ` with `π δ · max(δ^{k+1}, |x₁|^k δ) = 2^{-t}`.
///
/// Closed form on whichever branch (`δ ≥ |x₁|` or `δ ≤ |x₁|`) validates;
/// bisection on the monotone area map otherwise.
pub fn nsw_radius(k: u32, x1: f64, t: f64) -> Result<f64> {
    let target = (-t).exp2();
    let h = x1.abs();
    let kf = k as f64;
    let wide = (target / PI).powf(1.0 / (kf + 2.0));
    if wide >= h {
        return Ok(wide);
    }
    if h > 0.0 {
        let narrow = (target / (PI * h.powi(k as i32))).sqrt();
        if narrow <= h {
            return Ok(narrow);
        }
    }
    let area = |log_delta: f64| {
        let d = log_delta.exp2();
        (PI * d * nsw_height(k, x1, d)).log2() + t
    };
    let log_d = bisect_monotone(area, (-200.0, 200.0), 1e-13)?;
    Ok(log_d.exp2())
}

impl Cover for NswCover {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> String {
        format!("nsw(k={})", self.k)
    }
    fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid> {
        check_point(x, 2)?;
        let delta = nsw_radius(self.k, x[0], t)?;
        Ellipsoid::axis_aligned(x.to_vec(), &[delta, nsw_height(self.k, x[0], delta)])
    }
    fn volume_bounds(&self) -> Option<(f64, f64)> {
        Some((1.0, 1.0))
    }
}

/// Fault-injection fixture: an isotropic cover whose volume is halved on the
/// half-space `x₁ > 0` while still claiming the isotropic constants.
#[derive(Debug, Clone, Copy)]
pub struct CorruptedCover {
    inner: IsotropicCover,
}

impl CorruptedCover {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            inner: IsotropicCover::new(n)?,
        })
    }
}

impl Cover for CorruptedCover {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        "corrupted".into()
    }
    fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid> {
        let e = self.inner.eval(x, t)?;
        if x[0] > 0.0 {
            let shrink = 0.5f64.powf(1.0 / self.dim() as f64);
            Ellipsoid::new(e.matrix().scaled(shrink), x.to_vec())
        } else {
            Ok(e)
        }
    }
    fn params(&self) -> Option<CoverParams> {
        self.inner.params()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_volume_is_exact() {
        let c = IsotropicCover::new(3).unwrap();
        for t in [-5.0, 0.0, 2.5, 17.0] {
            let v = c.eval(&[0.1, 0.2, 0.3], t).unwrap().volume();
            assert!((v / (-t).exp2() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn theta0_table_rows() {
        // t = 9, x₂ = 0: flat regime.
        let (s1, s2, r) = theta0_semi_axes(0.0, 9.0);
        assert_eq!(r, Theta0Regime::Flat);
        assert_eq!((s1, s2), (0.125, 1.0 / 64.0));
        // t ≤ 0: disk of radius 2^{-t/2}.
        let (s1, s2, r) = theta0_semi_axes(0.3, -4.0);
        assert_eq!(r, Theta0Regime::Coarse);
        assert_eq!((s1, s2), (4.0, 4.0));
        // t = 6, |x₂| = 0.5 > 2^{-2}: round.
        let (s1, s2, r) = theta0_semi_axes(-0.5, 6.0);
        assert_eq!(r, Theta0Regime::Round);
        assert_eq!((s1, s2), (0.125, 0.125));
        // t = 6, |x₂| = 0.2 ∈ (2^{-3}, 2^{-2}]: middle.
        let (s1, s2, r) = theta0_semi_axes(0.2, 6.0);
        assert_eq!(r, Theta0Regime::Middle);
        assert!((s1 - (-5.0f64).exp2() / 0.2).abs() < 1e-15);
        assert!((s2 - 0.5 * 0.2).abs() < 1e-15);
    }

    #[test]
    fn theta0_area_in_every_regime() {
        for (x2, t) in [(0.0, 9.0), (0.3, -4.0), (0.5, 6.0), (0.2, 6.0)] {
            let (s1, s2, _) = theta0_semi_axes(x2, t);
            assert!((PI * s1 * s2 / (PI * (-t).exp2()) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nsw_k0_is_isotropic() {
        let c = NswCover::new(0);
        let e = c.eval(&[1.5, -0.3], 3.0).unwrap();
        let d = e.matrix().diagonal();
        assert!((d[0] - d[1]).abs() < 1e-15);
    }

    #[test]
    fn nsw_radius_branches() {
        // x₁ = 0: r(t) = (2^{-t}/π)^{1/(k+2)}
        for k in 0..4 {
            let r = nsw_radius(k, 0.0, 5.0).unwrap();
            assert!((r - (1.0 / 32.0 / PI).powf(1.0 / (k as f64 + 2.0))).abs() < 1e-15);
        }
        // |x₁| = 2, t = 6: narrow branch (2^{-6}/(π·2))^{1/2} ≈ 0.0705 ≤ 2
        let r = nsw_radius(1, 2.0, 6.0).unwrap();
        assert!((r - (1.0 / 64.0 / (2.0 * PI)).sqrt()).abs() < 1e-15);
        assert!(r <= 2.0);
    }

    #[test]
    fn diagonal_cover_checks_exponents() {
        assert!(DiagonalCover::new(vec![0.5, 0.6]).is_err());
        assert!(DiagonalCover::new(vec![1.0, 0.0]).is_err());
        let c = DiagonalCover::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let p = c.params().unwrap();
        assert_eq!((p.a4, p.a6), (2.0 / 3.0, 1.0 / 3.0));
        let v = c.eval(&[0.0, 0.0], 3.0).unwrap().volume();
        assert!((v - PI / 8.0).abs() < 1e-15);
    }
}
