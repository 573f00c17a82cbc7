//! Entanglement, discord and stability of two harmonic modes coupled by an
//! angular momentum term, in closed gaussian form and by truncated Fock
//! space diagonalization.

pub mod covariance;
pub mod discord;
pub mod error;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod report;
pub mod spectral;
pub mod thermo;

pub use covariance::{
    bose_occupation, build_covariance, mean_angular_momentum, symplectic_spectrum, thermal_occupations,
    CovarianceMatrix, ThermalOccupations,
};
pub use discord::{
    discord_high_t_asymptote, discord_minimization_oracle, gaussian_discord, DiscordGrid, DiscordInvariants,
    OracleDiscord,
};
pub use error::{Error, Result};
pub use measures::{
    bosonic_entropy, is_entangled, local_symplectic_eigenvalue, negativity, ppt_eigenvalues, vacuum_f_closed, Mode,
};
pub use model::{classify_sector, stability_boundaries, Boundaries, ModelParams, SectorClass, SectorTag, View};
pub use oracle::{
    build_hamiltonian_fock, compare_panel, entropy_negativity_fock, ground_state_fock, standard_panel,
    thermal_state_fock, FockConfig, FockMeasures, FockState,
};
pub use report::{compute_report, EntanglementReport};
pub use spectral::{diagonalize, mode_frequencies, NormalModeData};
pub use thermo::{
    limit_temperature, phase_grid, run_sweep, te_large_omega_asymptote, LimitTemperature, Output, PhaseCell, PhaseSpec,
    SweepAxis, SweepRow, SweepSpec,
};
