//! Local eigenvalues, entropy, PPT eigenvalues and negativity.

use crate::covariance::{symplectic_nu, CovarianceMatrix, ThermalOccupations};
use crate::error::{Error, Result};
use crate::model::{classify_sector, ModelParams};

/// One of the two physical modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    X,
    Y,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::X => 0,
            Mode::Y => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Mode::X => Mode::Y,
            Mode::Y => Mode::X,
        }
    }
}

/// f_μ = √det(local block) − ½.
pub fn local_symplectic_eigenvalue(cov: &CovarianceMatrix, mode: Mode) -> Result<f64> {
    let det = cov.local_block(mode.index()).determinant();
    if det < 0.25 - 1e-12 {
        return Err(Error::NonPhysical(format!("local uncertainty product {det} < 1/4")));
    }
    Ok((det.max(0.25).sqrt() - 0.5).max(0.0))
}

/// h(f) = −f ln f + (1 + f) ln(1 + f).
pub fn bosonic_entropy(f: f64) -> Result<f64> {
    if f < 0.0 || f.is_nan() {
        return Err(Error::Domain(format!("occupation {f} < 0")));
    }
    Ok(entropy_unchecked(f))
}

pub(crate) fn entropy_unchecked(f: f64) -> f64 {
    if f <= 0.0 {
        0.0
    } else {
        f * (1.0 / f).ln_1p() + f.ln_1p()
    }
}

/// Arithmetic and geometric means (ω̄, ω̄g) of ωμ = √|kμ|.
pub fn omega_bars(params: &ModelParams) -> (f64, f64) {
    let (kx, ky) = params.k();
    let (wx, wy) = (kx.abs().sqrt(), ky.abs().sqrt());
    ((wx + wy) / 2.0, (wx * wy).sqrt())
}

/// Vacuum local occupation from the frequency averages.
///
/// Both kμ > 0 uses ω̄, ω̄g directly; both kμ < 0 uses their moduli with
/// ω² − |·|² denominators. Written as f = ½(r − 1)/(√r + 1), with every
/// difference in factored form, so that small anisotropy, small ω and
/// |kμ| ≈ ω² do not cancel.
pub fn vacuum_f_closed(params: &ModelParams) -> Result<f64> {
    let tag = classify_sector(params).tag;
    if !tag.is_stable() {
        return Err(Error::OutOfSector(tag));
    }
    // kx − ky is the same in both views
    let kdiff = params.kx - params.ky;
    if kdiff == 0.0 {
        return Ok(0.0);
    }
    let (kx, ky) = params.k();
    let (kpx, kpy) = params.kprime();
    let w = params.omega.abs();
    let w2 = w * w;
    let (rx, ry) = (kx.abs().sqrt(), ky.abs().sqrt());
    let g2 = rx * ry;
    let spread = (kdiff / (rx + ry)).powi(2) / 4.0;
    let r_minus_1 = if kx > 0.0 && ky > 0.0 {
        let m2 = ((rx + ry) / 2.0).powi(2);
        w2 * spread / (g2 * (m2 + w2))
    } else if kx < 0.0 && ky < 0.0 {
        // ω − √|kμ| = k'μ/(ω + √|kμ|)
        let gap = 0.5 * (kpx / (w + rx) + kpy / (w + ry));
        let w2_minus_m2 = gap * (w + (rx + ry) / 2.0);
        w2 * spread / (g2 * w2_minus_m2)
    } else {
        return Err(Error::OutOfSector(tag));
    };
    let r = 1.0 + r_minus_1;
    Ok(0.5 * r_minus_1 / (r.sqrt() + 1.0))
}

/// Σ fμ(1 + fμ) − Σ f'μ(1 + f'μ) − 2 Π f'μ(1 + f'μ); positive iff the state
/// is entangled.
pub fn entanglement_margin(f_local: (f64, f64), occ: &ThermalOccupations) -> f64 {
    let g = |x: f64| x * (1.0 + x);
    let (gp, gm) = (g(occ.f_plus), g(occ.f_minus));
    g(f_local.0) + g(f_local.1) - (gp + gm + 2.0 * gp * gm)
}

/// PPT symplectic eigenvalues (f̃₊, f̃₋) from the local and global
/// occupations.
pub fn ppt_eigenvalues(cov: &CovarianceMatrix, occ: &ThermalOccupations) -> Result<(f64, f64)> {
    let fx = local_symplectic_eigenvalue(cov, Mode::X)?;
    let fy = local_symplectic_eigenvalue(cov, Mode::Y)?;
    ppt_from_occupations((fx, fy), occ)
}

/// Same as [`ppt_eigenvalues`] with the local occupations already known.
///
/// With α̃ = Σ(fμ+½)² − ½Σ(f'μ+½)² and β = Π(f'μ+½),
/// f̃± + ½ = √(α̃ ± √(α̃² − β²)). The sign of f̃₋ is carried by the
/// entanglement margin m = α̃ − 2β² − ⅛, so f̃₋ < 0 exactly when
/// [`is_entangled`] holds.
pub fn ppt_from_occupations(f_local: (f64, f64), occ: &ThermalOccupations) -> Result<(f64, f64)> {
    let margin = entanglement_margin(f_local, occ);
    let beta = (occ.f_plus + 0.5) * (occ.f_minus + 0.5);
    let beta_excess = occ.f_plus * occ.f_minus + 0.5 * (occ.f_plus + occ.f_minus);
    // α̃ − β = m + 2(β − ¼)²
    let alpha_minus_beta = margin + 2.0 * beta_excess * beta_excess;
    if alpha_minus_beta < -1e-10 * beta {
        return Err(Error::NonPhysical(format!("α̃ − β = {alpha_minus_beta:e} < 0")));
    }
    let alpha_minus_beta = alpha_minus_beta.max(0.0);
    let alpha = beta + alpha_minus_beta;
    let root = (alpha_minus_beta * (alpha + beta)).sqrt();
    let upper = (alpha + root).sqrt();

    // 4β² − upper² = X − √(α̃² − β²) with X = 4β² − α̃; when X > 0 (or the
    // state is separable) rewrite as −8β² m/(X + √(α̃² − β²))
    let x = 4.0 * beta * beta - alpha;
    let gap = if x > 0.0 || margin <= 0.0 {
        let denom = x + root;
        if denom > 0.0 {
            -8.0 * beta * beta * margin / denom
        } else {
            0.0
        }
    } else {
        x - root
    };
    let two_beta_minus_upper = gap / (2.0 * beta + upper);
    Ok((upper - 0.5, two_beta_minus_upper / (2.0 * upper)))
}

/// Symplectic spectrum of the Py-flipped covariance, as occupations.
pub fn ppt_eigenvalues_direct(cov: &CovarianceMatrix) -> (f64, f64) {
    let (hi, lo) = symplectic_nu(&cov.partial_transpose_y());
    (hi - 0.5, lo - 0.5)
}

/// N = −f̃₋/(1 + 2f̃₋) when f̃₋ < 0, else exactly zero.
pub fn negativity(f_tilde_minus: f64) -> f64 {
    if f_tilde_minus < 0.0 {
        -f_tilde_minus / (1.0 + 2.0 * f_tilde_minus)
    } else {
        0.0
    }
}

/// Σ fμ(1 + fμ) > Σ f'μ(1 + f'μ) + 2 Π f'μ(1 + f'μ).
pub fn is_entangled(f_local: (f64, f64), occ: &ThermalOccupations) -> bool {
    entanglement_margin(f_local, occ) > 0.0
}
