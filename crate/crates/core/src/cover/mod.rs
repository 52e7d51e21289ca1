//! Continuous ellipsoid covers `{θ_{x,t}}` and their validators.
//!
//! A cover assigns to every centre `x` and scale `t` an ellipsoid
//! `θ_{x,t} = M_{x,t}(𝔹ⁿ) + x` with `a₁2^{-t} ≤ |θ_{x,t}| ≤ a₂2^{-t}`, such
//! that intersecting members at scales `t` and `t+s` satisfy
//! `a₃2^{-a₄s} ≤ 1/‖M_{y,t+s}⁻¹M_{x,t}‖ ≤ ‖M_{x,t}⁻¹M_{y,t+s}‖ ≤ a₅2^{-a₆s}`.

mod builtin;
mod validate;

use serde::{Deserialize, Serialize};

use crate::ellipsoid::Ellipsoid;
use crate::error::{contract, Result};

pub use builtin::{
    nsw_radius, theta0_semi_axes, CorruptedCover, DiagonalCover, IsotropicCover, NswCover,
    Theta0Cover, Theta0Regime,
};
pub(crate) use builtin::nsw_height;
pub use validate::{
    engulf_constant, fit_shape_envelope, sample_shape_pairs, theta0_case_audit,
    theta0_case_pairs, union_engulf, union_engulf_scale, validate_shape_geometric, validate_shape_geometric_on,
    validate_shape_norm, validate_shape_norm_on, validate_volume, EngulfOptions, ShapeFit,
    ShapePair, Theta0Case, UnionHints,
};

/// The six cover constants `a₁..a₆` in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    pub dim: usize,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
}

impl CoverParams {
    /// Rejects non-positive constants, `a₁ > a₂` and `a₆ > a₄`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.a1, self.a2, self.a3, self.a4, self.a5, self.a6];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(contract("cover constants must be positive and finite"));
        }
        if self.a1 > self.a2 {
            return Err(contract("cover constants need a1 <= a2"));
        }
        if self.a6 > self.a4 {
            return Err(contract("cover constants need a6 <= a4"));
        }
        Ok(())
    }
}

/// Constants of the geometric form of the shape condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeConstants {
    /// `log₂(a₂/a₁)`
    pub s0: f64,
    pub a3_tilde: f64,
    pub a5_tilde: f64,
    pub a3_prime: f64,
    pub a5_prime: f64,
}

/// Converts norm-form constants into the constants of the dilation sandwich
/// `a₃′ (|η|/|ξ|)^{a₄} (ξ − c_ξ) ⊆ η − c_η ⊆ a₅′ (|η|/|ξ|)^{a₆} (ξ − c_ξ)`.
pub fn shape_constants_convert(p: &CoverParams) -> Result<ShapeConstants> {
    p.validate()?;
    let s0 = (p.a2 / p.a1).log2();
    let a3_tilde = p.a3.min(1.0 / p.a5);
    let a5_tilde = p.a5.max((1.0 / p.a3) * ((p.a6 - p.a4) * s0).exp2());
    Ok(ShapeConstants {
        s0,
        a3_tilde,
        a5_tilde,
        a3_prime: a3_tilde * (p.a1 / p.a2).powf(p.a4),
        a5_prime: a5_tilde * (p.a2 / p.a1).powf(p.a6),
    })
}

/// A total map `(x, t) ↦ θ_{x,t}` centred at `x`.
pub trait Cover: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid>;

    /// Constants the cover claims to satisfy, when known.
    fn params(&self) -> Option<CoverParams> {
        None
    }

    /// Claimed `(a₁, a₂)`; defaults to those of [`Cover::params`].
    fn volume_bounds(&self) -> Option<(f64, f64)> {
        self.params().map(|p| (p.a1, p.a2))
    }

    /// `θ_{x,t₁} ⊆ θ_{x,t₂}` whenever `t₁ > t₂`.
    fn is_nested(&self) -> bool {
        true
    }
}

macro_rules! forward_cover {
    ($($ty:ty),*) => {$(
        impl<C: Cover + ?Sized> Cover for $ty {
            fn dim(&self) -> usize { (**self).dim() }
            fn name(&self) -> String { (**self).name() }
            fn eval(&self, x: &[f64], t: f64) -> Result<Ellipsoid> { (**self).eval(x, t) }
            fn params(&self) -> Option<CoverParams> { (**self).params() }
            fn volume_bounds(&self) -> Option<(f64, f64)> { (**self).volume_bounds() }
            fn is_nested(&self) -> bool { (**self).is_nested() }
        }
    )*};
}

forward_cover!(&C, Box<C>, std::sync::Arc<C>);
