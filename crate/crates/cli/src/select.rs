//! Metric and cover selectors.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use ellcover::cover::{CorruptedCover, DiagonalCover, IsotropicCover, NswCover, Theta0Cover};
use ellcover::distance::{Euclidean, InducedDistance, IsotropicMetric, NswMetric, SupNorm, Theta0Metric};
use ellcover::{Cover, QuasiDistance};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Closed-form Θ₀ distance (plane).
    Theta0,
    /// Θ₀ distance induced from the cover by scale bisection (plane).
    InducedTheta0,
    /// Nagel–Stein–Wainger ρ_k (plane, uses --k).
    Nsw,
    /// Euclidean norm (uses --n).
    Euclidean,
    /// Sup norm (uses --n).
    Sup,
    /// ωₙ|x−y|ⁿ (uses --n).
    Isotropic,
    /// Distance induced by the isotropic ball cover (uses --n).
    InducedIsotropic,
}

impl MetricKind {
    pub fn is_planar(self) -> bool {
        matches!(self, Self::Theta0 | Self::InducedTheta0 | Self::Nsw)
    }
}

pub fn metric(kind: MetricKind, n: usize, k: u32) -> Result<Box<dyn QuasiDistance>, CliError> {
    let usage = |e: ellcover::Error| CliError::Usage(e.to_string());
    Ok(match kind {
        MetricKind::Theta0 => Box::new(Theta0Metric),
        MetricKind::InducedTheta0 => Box::new(InducedDistance::one_sided(Theta0Cover)),
        MetricKind::Nsw => Box::new(NswMetric::new(k)),
        MetricKind::Euclidean => Box::new(Euclidean::new(n).map_err(usage)?),
        MetricKind::Sup => Box::new(SupNorm::new(n).map_err(usage)?),
        MetricKind::Isotropic => Box::new(IsotropicMetric::new(n).map_err(usage)?),
        MetricKind::InducedIsotropic => Box::new(InducedDistance::one_sided(IsotropicCover::new(n).map_err(usage)?)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverKind {
    /// The Θ₀ table (plane).
    Theta0,
    /// Euclidean balls (uses --n).
    Isotropic,
    /// Axis-aligned diagonal dilations (uses --exponents).
    Diagonal,
    /// Rectangle-inscribed ellipses of ρ_k (plane, uses --k).
    Nsw,
    /// A deliberately broken cover for fault injection (uses --n).
    Corrupted,
}

pub fn cover(kind: CoverKind, n: usize, k: u32, exponents: Option<&[f64]>) -> Result<Box<dyn Cover>, CliError> {
    let usage = |e: ellcover::Error| CliError::Usage(e.to_string());
    Ok(match kind {
        CoverKind::Theta0 => Box::new(Theta0Cover),
        CoverKind::Isotropic => Box::new(IsotropicCover::new(n).map_err(usage)?),
        CoverKind::Diagonal => {
            let e = exponents.ok_or_else(|| CliError::Usage("the diagonal cover needs --exponents".into()))?;
            Box::new(DiagonalCover::new(e.to_vec()).map_err(usage)?)
        }
        CoverKind::Nsw => Box::new(NswCover::new(k)),
        CoverKind::Corrupted => Box::new(CorruptedCover::new(n).map_err(usage)?),
    })
}
