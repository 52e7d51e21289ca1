//! Quasi-distances induced by a cover through scale bisection.

use super::{check_pair, BoundingBox, QuasiDistance, Symmetry};
use crate::cover::Cover;
use crate::ellipsoid::Ellipsoid;
use crate::error::{contract, Error, Result};
use crate::numeric::{norm, sub};

/// Scales searched by the bisections in this module.
pub const RHO_SCALE_RANGE: (f64, f64) = (-60.0, 80.0);

/// Scale tolerance; `2^{-t}` then carries a relative error below `1e-10`.
const SCALE_TOL: f64 = 1e-11;

/// Brackets the switch of a predicate that is true for small `t` and false
/// for large `t`, starting from `t0`, then bisects it to [`SCALE_TOL`].
fn bisect_scale(t0: f64, inside: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    let (min_t, max_t) = RHO_SCALE_RANGE;
    let t0 = t0.clamp(min_t, max_t);
    let (mut lo, mut hi);
    let mut step = 1.0;
    if inside(t0)? {
        lo = t0;
        loop {
            hi = (lo + step).min(max_t);
            if !inside(hi)? {
                break;
            }
            if hi >= max_t {
                return Err(Error::OutOfRange(format!("scale search passed t = {max_t}")));
            }
            lo = hi;
            step *= 2.0;
        }
    } else {
        hi = t0;
        loop {
            lo = (hi - step).max(min_t);
            if inside(lo)? {
                break;
            }
            if lo <= min_t {
                return Err(Error::OutOfRange(format!("scale search passed t = {min_t}")));
            }
            hi = lo;
            step *= 2.0;
        }
    }
    while hi - lo > SCALE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ρ₁(x, y) = inf{|θ_{x,t}| : y ∈ θ_{x,t}}`, with `ρ₁(x, x) = 0`.
///
/// Bisects the membership `y ∈ θ_{x,t}` in `t`, starting from the isotropic
/// guess `t = −n log₂|x−y|`, and returns the volume at the crossing.
pub fn rho_one_sided<C: Cover + ?Sized>(cover: &C, x: &[f64], y: &[f64]) -> Result<f64> {
    let n = cover.dim();
    check_pair(n, x, y)?;
    if !cover.is_nested() {
        return Err(contract("one-sided distance needs a cover nested in t"));
    }
    let d = norm(&sub(y, x));
    if d == 0.0 {
        return Ok(0.0);
    }
    let t0 = -(n as f64) * d.log2();
    let t = bisect_scale(t0, |t| Ok(cover.eval(x, t)?.gauge(y)? <= 1.0))?;
    Ok(cover.eval(x, t)?.volume())
}

/// `min{ρ₁(x, y), ρ₁(y, x)}`; symmetric by construction.
pub fn rho_induced<C: Cover + ?Sized>(cover: &C, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(rho_one_sided(cover, x, y)?.min(rho_one_sided(cover, y, x)?))
}

/// Scale `t` with `|θ_{x,t}| = r`.
fn scale_for_volume<C: Cover + ?Sized>(cover: &C, x: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(contract("ball radius must be positive"));
    }
    bisect_scale(-r.log2(), |t| Ok(cover.eval(x, t)?.volume() >= r))
}

/// The distance induced by a cover, one-sided (`ρ₁`) or symmetrised.
///
/// The one-sided balls are exactly the cover's ellipsoids, so they come with
/// boxes, directional radii and inscribed ellipsoids in closed form.
#[derive(Debug, Clone)]
pub struct InducedDistance<C> {
    pub cover: C,
    pub symmetric: bool,
}

impl<C: Cover> InducedDistance<C> {
    pub fn one_sided(cover: C) -> Self {
        Self {
            cover,
            symmetric: false,
        }
    }

    pub fn symmetric(cover: C) -> Self {
        Self {
            cover,
            symmetric: true,
        }
    }

    /// The closed ellipsoid whose interior is the one-sided ball `B(x, r)`.
    pub fn ball_ellipsoid(&self, x: &[f64], r: f64) -> Result<Ellipsoid> {
        if self.symmetric {
            return Err(Error::Config("symmetrised balls are not ellipsoids".into()));
        }
        let t = scale_for_volume(&self.cover, x, r)?;
        self.cover.eval(x, t)
    }
}

impl<C: Cover> QuasiDistance for InducedDistance<C> {
    fn dim(&self) -> usize {
        self.cover.dim()
    }
    fn name(&self) -> String {
        let side = if self.symmetric { "symmetric" } else { "one-sided" };
        format!("induced[{}, {side}]", self.cover.name())
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if self.symmetric {
            rho_induced(&self.cover, x, y)
        } else {
            rho_one_sided(&self.cover, x, y)
        }
    }
    fn symmetry(&self) -> Symmetry {
        if self.symmetric {
            Symmetry::Exact
        } else {
            Symmetry::Quasi(None)
        }
    }
    fn ball_box(&self, x: &[f64], r: f64) -> Result<BoundingBox> {
        Ok(BoundingBox::of_ellipsoid(&self.ball_ellipsoid(x, r)?).scaled(1.0 + 1e-9))
    }
    fn directional_radius(&self, x: &[f64], u: &[f64], r: f64) -> Result<f64> {
        if self.symmetric {
            super::bisect_directional_radius(self, x, u, r)
        } else {
            self.ball_ellipsoid(x, r)?.radial(u)
        }
    }
    fn inscribed_ellipsoid(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
        (!self.symmetric).then(|| self.ball_ellipsoid(x, r))
    }
    fn exact_ball(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
        (!self.symmetric).then(|| self.ball_ellipsoid(x, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{IsotropicCover, Theta0Cover};
    use crate::numeric::unit_ball_volume;
    use std::f64::consts::PI;

    #[test]
    fn isotropic_one_sided_is_volume_of_ball() {
        let c = IsotropicCover::new(3).unwrap();
        let x = [0.1, -0.4, 2.0];
        let y = [0.5, 0.3, 1.0];
        let d = norm(&sub(&y, &x));
        let v = rho_one_sided(&c, &x, &y).unwrap();
        let expected = unit_ball_volume(3) * d.powi(3);
        assert!((v / expected - 1.0).abs() < 1e-8);
    }

    #[test]
    fn theta0_far_pair() {
        let v = rho_one_sided(&Theta0Cover, &[0.0, 2.0], &[0.0, 5.0]).unwrap();
        assert!((v / (9.0 * PI) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_on_diagonal_and_symmetric() {
        let c = Theta0Cover;
        assert_eq!(rho_one_sided(&c, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        let a = rho_induced(&c, &[0.0, 0.01], &[0.03, 0.2]).unwrap();
        let b = rho_induced(&c, &[0.03, 0.2], &[0.0, 0.01]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn far_points_leave_scale_range() {
        let c = IsotropicCover::new(2).unwrap();
        assert!(matches!(
            rho_one_sided(&c, &[0.0, 0.0], &[1e20, 0.0]),
            Err(Error::OutOfRange(_))
        ));
    }

    #[test]
    fn one_sided_ball_is_the_cover_ellipse() {
        let m = InducedDistance::one_sided(Theta0Cover);
        let e = m.ball_ellipsoid(&[0.3, 0.0], PI * 2f64.powi(-9)).unwrap();
        let d = e.matrix().diagonal();
        assert!((d[0] - 0.125).abs() < 1e-9 && (d[1] - 1.0 / 64.0).abs() < 1e-9);
    }
}
