//! Occupations, second-moment matrices and symplectic spectra.

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::model::SectorTag;
use crate::spectral::{swap_permutation, symplectic_form, NormalModeData};

/// Mean occupations f'± of the normal modes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermalOccupations {
    pub f_plus: f64,
    pub f_minus: f64,
}

impl ThermalOccupations {
    pub const VACUUM: Self = Self { f_plus: 0.0, f_minus: 0.0 };

    pub fn new(f_plus: f64, f_minus: f64) -> Self {
        Self { f_plus, f_minus }
    }
}

/// 1/(e^{λ/T} − 1), with 0 at T = 0.
pub fn bose_occupation(lambda: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = lambda / temperature;
    if x > 700.0 {
        0.0
    } else if x < 1e-8 {
        1.0 / x - 0.5
    } else {
        1.0 / x.exp_m1()
    }
}

/// Normal-mode occupations at temperature `temperature`.
///
/// Thermal states exist only in sector A; at T = 0 any stable point
/// returns the vacuum.
pub fn thermal_occupations(modes: &NormalModeData, temperature: f64) -> Result<ThermalOccupations> {
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::InvalidParams(format!("temperature {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(ThermalOccupations::VACUUM);
    }
    if modes.sector != SectorTag::A {
        return Err(Error::ThermalUndefined(modes.sector));
    }
    Ok(ThermalOccupations {
        f_plus: bose_occupation(modes.lambda_plus, temperature),
        f_minus: bose_occupation(modes.lambda_minus, temperature),
    })
}

/// Symmetrized second moments of R = (Qx, Qy, Px, Py).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub second_moments: Matrix4<f64>,
    /// Real form J of the commutator metric; the complex metric is iJ.
    pub symplectic_metric: Matrix4<f64>,
}

impl CovarianceMatrix {
    pub fn from_second_moments(second_moments: Matrix4<f64>) -> Self {
        Self { second_moments, symplectic_metric: symplectic_form() }
    }

    /// Uncorrelated modes with ⟨Q²⟩ = ⟨P²⟩ = f + ½.
    pub fn product_thermal(fx: f64, fy: f64) -> Self {
        let v = nalgebra::Vector4::new(fx + 0.5, fy + 0.5, fx + 0.5, fy + 0.5);
        Self::from_second_moments(Matrix4::from_diagonal(&v))
    }

    pub fn q2(&self, mode: usize) -> f64 {
        self.second_moments[(mode, mode)]
    }

    pub fn p2(&self, mode: usize) -> f64 {
        self.second_moments[(mode + 2, mode + 2)]
    }

    /// Local 2×2 block in (Q_μ, P_μ) for mode 0 = x, 1 = y.
    pub fn local_block(&self, mode: usize) -> Matrix2<f64> {
        let s = &self.second_moments;
        Matrix2::new(s[(mode, mode)], s[(mode, mode + 2)], s[(mode + 2, mode)], s[(mode + 2, mode + 2)])
    }

    /// Off-diagonal block ⟨R_x R_yᵀ⟩ with R_x = (Qx, Px), R_y = (Qy, Py).
    pub fn cross_block(&self) -> Matrix2<f64> {
        let s = &self.second_moments;
        Matrix2::new(s[(0, 1)], s[(0, 3)], s[(2, 1)], s[(2, 3)])
    }

    /// Covariance of the partially transposed state (Py → −Py).
    pub fn partial_transpose_y(&self) -> Self {
        let mut m = self.second_moments;
        for k in 0..4 {
            if k != 3 {
                m[(3, k)] = -m[(3, k)];
                m[(k, 3)] = -m[(k, 3)];
            }
        }
        Self::from_second_moments(m)
    }

    /// Same state with the x and y labels exchanged.
    pub fn swapped(&self) -> Self {
        let p = swap_permutation();
        Self::from_second_moments(p * self.second_moments * p)
    }
}

/// Second moments of the vacuum or thermal state of the normal modes.
pub fn build_covariance(modes: &NormalModeData, occ: &ThermalOccupations) -> Result<CovarianceMatrix> {
    let [(qsp, psp), (qsm, psm)] = modes.quadrature_scales()?;
    let (np, nm) = (occ.f_plus + 0.5, occ.f_minus + 0.5);
    let (qp, pp, qm, pm) = (np * qsp, np * psp, nm * qsm, nm * psm);
    let (a, b, g) = (modes.a, modes.b, modes.gamma);

    let qx2 = qp + b * b * pm;
    let py2 = g * g * qp + a * a * pm;
    let qxpy = -g * qp + a * b * pm;
    let qy2 = qm + b * b * pp;
    let px2 = g * g * qm + a * a * pp;
    let qypx = -g * qm + a * b * pp;

    #[rustfmt::skip]
    let m = Matrix4::new(
        qx2,  0.0,  0.0,  qxpy,
        0.0,  qy2,  qypx, 0.0,
        0.0,  qypx, px2,  0.0,
        qxpy, 0.0,  0.0,  py2,
    );
    let cov = CovarianceMatrix::from_second_moments(m);
    Ok(if modes.swapped { cov.swapped() } else { cov })
}

/// Symplectic eigenvalues ν₊ ≥ ν₋ of a 4×4 covariance matrix, without any
/// physicality check.
///
/// Uses the eigenvalues ±iν of σJ, i.e. the spectrum of the metric-weighted
/// covariance iσJ − ½.
pub fn symplectic_nu(cov: &CovarianceMatrix) -> (f64, f64) {
    let k = cov.second_moments * cov.symplectic_metric;
    let eig = k.complex_eigenvalues();
    let mut nu: Vec<f64> = eig.iter().map(|z| z.im.abs()).collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    // eigenvalues come in ± pairs; average each pair
    ((nu[0] + nu[1]) / 2.0, (nu[2] + nu[3]) / 2.0)
}

/// Symplectic eigenvalues as occupations (ν − ½), smaller first.
///
/// In sector A the smaller occupation belongs to the higher frequency, so
/// the pair lines up with (f'₊, f'₋).
pub fn symplectic_spectrum(cov: &CovarianceMatrix) -> Result<(f64, f64)> {
    let (hi, lo) = symplectic_nu(cov);
    let (small, large) = (lo - 0.5, hi - 0.5);
    if small < -1e-10 {
        return Err(Error::NonPhysical(format!("symplectic eigenvalue {small:e} < 0")));
    }
    Ok((small.max(0.0), large.max(0.0)))
}

/// ⟨Lz⟩ = ⟨Qx Py⟩ − ⟨Qy Px⟩.
pub fn mean_angular_momentum(cov: &CovarianceMatrix) -> f64 {
    let s = &cov.second_moments;
    s[(0, 3)] - s[(1, 2)]
}
