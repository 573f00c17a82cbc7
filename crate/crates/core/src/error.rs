use thiserror::Error;

use crate::model::SectorTag;

/// Errors produced by the gaussian and Fock-space routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Δ = 0 with ω ≠ 0: the quadratic form has a Jordan block and no
    /// separable normal-mode representation exists.
    #[error("degenerate canonical transformation (Δ = 0, ω = {omega})")]
    DegenerateTransform { omega: f64 },

    #[error("unstable spectrum: {0}")]
    UnstableSpectrum(String),

    /// A normal mode with λ = 0 whose vacuum is not normalizable.
    #[error("zero-frequency mode without a fixed vacuum convention")]
    ZeroMode,

    #[error("thermal state undefined outside the positive definite sector (got {0:?})")]
    ThermalUndefined(SectorTag),

    #[error("non-physical covariance: {0}")]
    NonPhysical(String),

    #[error("point lies outside the supported sectors ({0:?})")]
    OutOfSector(SectorTag),

    #[error("no stability boundary is defined for this view and sign pattern")]
    NoBoundary,

    #[error("vacuum is not entangled; no limit temperature exists")]
    NotEntangledAtZero,

    #[error("invalid sweep specification: {0}")]
    SpecInvalid(String),

    #[error("Fock cutoffs {low} and {high} disagree by {diff:e} on {observable}")]
    ConvergenceFailure { observable: &'static str, low: usize, high: usize, diff: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
