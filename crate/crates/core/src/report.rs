//! All single-point observables in one record.

use crate::covariance::{build_covariance, mean_angular_momentum, thermal_occupations, ThermalOccupations};
use crate::discord::gaussian_discord;
use crate::error::{Error, Result};
use crate::measures::{
    entropy_unchecked, is_entangled, local_symplectic_eigenvalue, negativity, omega_bars, ppt_from_occupations,
    vacuum_f_closed, Mode,
};
use crate::model::{classify_sector, ModelParams, SectorClass};
use crate::spectral::diagonalize;

/// Relative distance to a critical frequency below which a point is flagged.
pub const NEAR_BOUNDARY_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    pub params: ModelParams,
    pub sector: SectorClass,
    pub near_boundary: bool,
    /// Signed normal-mode frequencies (λ₊, λ₋).
    pub lambdas: (f64, f64),
    pub occupations: ThermalOccupations,
    /// (f_x, f_y)
    pub f_local: (f64, f64),
    /// (f̃₊, f̃₋)
    pub f_tilde: (f64, f64),
    /// (S_x, S_y) = (h(f_x), h(f_y)), natural log.
    pub entropy: (f64, f64),
    pub negativity: f64,
    pub entangled: bool,
    /// (D^x, D^y), the subscript naming the measured mode.
    pub discord: (f64, f64),
    pub mean_lz: f64,
    /// (ω̄, ω̄g)
    pub omega_bars: (f64, f64),
}

impl EntanglementReport {
    /// Entropy of the reduced state of mode x.
    pub fn entanglement_entropy(&self) -> f64 {
        self.entropy.0
    }
}

/// Whether |ω| lies within [`NEAR_BOUNDARY_RTOL`] of a critical frequency.
pub fn is_near_boundary(params: &ModelParams, sector: &SectorClass) -> bool {
    if sector.on_boundary {
        return true;
    }
    let w = params.omega.abs();
    sector.boundaries.frequencies().into_iter().any(|b| (w - b).abs() <= NEAR_BOUNDARY_RTOL * b.max(1.0))
}

/// Evaluate every observable at `params`.
///
/// Unstable, degenerate and Landau points give [`Error::OutOfSector`];
/// T > 0 outside sector A gives [`Error::ThermalUndefined`].
pub fn compute_report(params: &ModelParams) -> Result<EntanglementReport> {
    let sector = classify_sector(params);
    if !sector.tag.is_stable() {
        return Err(Error::OutOfSector(sector.tag));
    }
    let modes = diagonalize(params)?;
    let t = params.temperature;
    let occ = thermal_occupations(&modes, t)?;
    let cov = build_covariance(&modes, &occ)?;

    let f_local = if t == 0.0 {
        let f = vacuum_f_closed(params)?;
        (f, f)
    } else {
        (local_symplectic_eigenvalue(&cov, Mode::X)?, local_symplectic_eigenvalue(&cov, Mode::Y)?)
    };
    let f_tilde = ppt_from_occupations(f_local, &occ)?;

    Ok(EntanglementReport {
        params: *params,
        sector,
        near_boundary: is_near_boundary(params, &sector),
        lambdas: (modes.lambda_plus, modes.lambda_minus),
        occupations: occ,
        f_local,
        f_tilde,
        entropy: (entropy_unchecked(f_local.0), entropy_unchecked(f_local.1)),
        negativity: negativity(f_tilde.1),
        entangled: is_entangled(f_local, &occ),
        discord: (gaussian_discord(f_local, &occ, Mode::X), gaussian_discord(f_local, &occ, Mode::Y)),
        mean_lz: mean_angular_momentum(&cov),
        omega_bars: omega_bars(params),
    })
}
