//! Quasi-distances, their balls, and certifiers for the triangle constant and
//! Ahlfors regularity.
//!
//! Throughout, the first argument of [`QuasiDistance::eval`] is the ball
//! centre: `B(x, r) = {y : ρ(x, y) < r}`.

mod certify;
mod closed;
mod induced;

use serde::{Deserialize, Serialize};

use crate::ellipsoid::Ellipsoid;
use crate::error::{contract, Error, Result};

pub use certify::{
    ahlfors_certify, ball_volume_mc, ball_volume_mc_in, bisect_directional_radius, symmetry_check, triangle_constant,
    AhlforsCert, AhlforsOptions, VolumeEstimate,
};
pub use closed::{
    rho_nsw, rho_theta0, theta0_case, Euclidean, IsotropicMetric, NswMetric, SupNorm, Theta0Dist,
    Theta0Metric,
};
pub use induced::{rho_induced, rho_one_sided, InducedDistance, RHO_SCALE_RANGE};

/// How `ρ(x, y)` relates to `ρ(y, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Symmetry {
    Exact,
    /// `ρ(x, y) ≤ C ρ(y, x)`, with `C` when it is known.
    Quasi(Option<f64>),
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    /// The box `c ± h`.
    pub fn centered(c: &[f64], half: &[f64]) -> Self {
        Self {
            lo: c.iter().zip(half).map(|(c, h)| c - h).collect(),
            hi: c.iter().zip(half).map(|(c, h)| c + h).collect(),
        }
    }

    /// Smallest box holding `e`.
    pub fn of_ellipsoid(e: &Ellipsoid) -> Self {
        // Half-width along axis i is the norm of row i of M.
        let m = e.matrix();
        let n = e.dim();
        let half: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].powi(2)).sum::<f64>().sqrt())
            .collect();
        Self::centered(e.center(), &half)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let c: Vec<f64> = self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect();
        let half: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (h - l) * factor)
            .collect();
        Self::centered(&c, &half)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// A distance oracle on ℝⁿ.
pub trait QuasiDistance: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    fn symmetry(&self) -> Symmetry {
        Symmetry::Exact
    }

    /// Triangle constant when known in closed form.
    fn known_kappa(&self) -> Option<f64> {
        None
    }

    /// A box containing `B(x, r)`, needed for Monte Carlo volumes.
    fn ball_box(&self, _x: &[f64], _r: f64) -> Result<BoundingBox> {
        Err(Error::Config(format!("{}: no bounding box for balls", self.name())))
    }

    /// `sup{τ : ρ(x, x + τu) < r}` for a unit vector `u`.
    fn directional_radius(&self, x: &[f64], u: &[f64], r: f64) -> Result<f64> {
        bisect_directional_radius(self, x, u, r)
    }

    /// Exact maximal centred ellipsoid inside `B(x, r)`, when available.
    fn inscribed_ellipsoid(&self, _x: &[f64], _r: f64) -> Option<Result<Ellipsoid>> {
        None
    }

    /// An ellipsoid whose interior is exactly `B(x, r)`, when the balls are
    /// ellipsoids; Monte Carlo volumes then test membership by its gauge.
    fn exact_ball(&self, _x: &[f64], _r: f64) -> Option<Result<Ellipsoid>> {
        None
    }

    /// Directions where `R(u)/r_ξ(u)` is extremal for the inscribed ellipsoid
    /// (rectangle corners and the like); added to every sampled direction set.
    fn critical_directions(&self, _x: &[f64], _r: f64) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

macro_rules! forward_quasi_distance {
    ($($ty:ty),*) => {$(
        impl<D: QuasiDistance + ?Sized> QuasiDistance for $ty {
            fn dim(&self) -> usize { (**self).dim() }
            fn name(&self) -> String { (**self).name() }
            fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> { (**self).eval(x, y) }
            fn symmetry(&self) -> Symmetry { (**self).symmetry() }
            fn known_kappa(&self) -> Option<f64> { (**self).known_kappa() }
            fn ball_box(&self, x: &[f64], r: f64) -> Result<BoundingBox> { (**self).ball_box(x, r) }
            fn directional_radius(&self, x: &[f64], u: &[f64], r: f64) -> Result<f64> {
                (**self).directional_radius(x, u, r)
            }
            fn inscribed_ellipsoid(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
                (**self).inscribed_ellipsoid(x, r)
            }
            fn exact_ball(&self, x: &[f64], r: f64) -> Option<Result<Ellipsoid>> {
                (**self).exact_ball(x, r)
            }
            fn critical_directions(&self, x: &[f64], r: f64) -> Vec<Vec<f64>> {
                (**self).critical_directions(x, r)
            }
        }
    )*};
}

forward_quasi_distance!(&D, Box<D>, std::sync::Arc<D>);

/// `B_ρ(x, r)` as a membership oracle.
pub struct Ball<'a, D: QuasiDistance + ?Sized> {
    pub metric: &'a D,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl<'a, D: QuasiDistance + ?Sized> Ball<'a, D> {
    pub fn new(metric: &'a D, center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() != metric.dim() {
            return Err(contract("ball centre has the wrong dimension"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(contract("ball radius must be positive"));
        }
        Ok(Self {
            metric,
            center,
            radius,
        })
    }

    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        Ok(self.metric.eval(&self.center, y)? < self.radius)
    }
}

pub(crate) fn check_pair(n: usize, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != n || y.len() != n {
        return Err(contract(format!("expected points in dimension {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(contract("points must have finite coordinates"));
    }
    Ok(())
}
