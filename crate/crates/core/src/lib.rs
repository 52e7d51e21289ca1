//! Continuous ellipsoid covers of ℝⁿ and the quasi-distances they induce.
//!
//! The crate is organised bottom-up:
//!
//! * [`numeric`] – small dense kernels (Jacobi eigensolver, spectral norms,
//!   extremes of `|Au + d|` over the unit ball, monotone root finding) and the
//!   counter-based RNG used by every sampler.
//! * [`ellipsoid`] – the [`Ellipsoid`] value type with containment,
//!   intersection and the reverse-inclusion check.
//! * [`cover`] – the [`Cover`] abstraction, built-in covers and validators for
//!   the volume and shape conditions.
//! * [`distance`] – quasi-distances (induced by covers or in closed form), ball
//!   volumes and triangle / Ahlfors certification.
//! * [`characterize`] – quasi-convexity, the inner property, derived constants
//!   and the cover ↔ quasi-distance round trip.
//!
//! Every stochastic routine takes a [`Sampler`] and draws sample `i` from its
//! own RNG stream, so results do not depend on the number of worker threads.

pub mod characterize;
pub mod cover;
pub mod distance;
pub mod ellipsoid;
mod error;
pub mod numeric;
pub mod report;
pub mod sampling;

pub use cover::{Cover, CoverParams};
pub use distance::QuasiDistance;
pub use ellipsoid::Ellipsoid;
pub use error::{Error, Result};
pub use numeric::{Matrix, SeededRng};
pub use report::CertReport;
pub use sampling::Sampler;
