//! Canonical transformation to normal modes.
//!
//! All work is done in a canonical frame with k'x ≥ k'y. When the input has
//! k'x < k'y the labels are exchanged first, which maps ω → −ω, and the
//! result carries `swapped = true` so callers can permute indices back.
//!
//! In that frame, with d = k'x − k'y ≥ 0 and s = k'x + k'y,
//!
//! ```text
//! Q'+ = a Qx − b Py      P'+ = Px + γ Qy
//! Q'− = a Qy − b Px      P'− = Py + γ Qx
//! a = (2Δ + d)/(4Δ),  b = ω/Δ,  γ = 2ωs/(2Δ + d),  η = 4ω/(2Δ + d)
//! ```
//!
//! and H = ½ Σ± (α± P'±² + β± Q'±²).

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::model::{classify_sector, ModelParams, SectorTag, View, BOUNDARY_RTOL};

/// Scalars of the canonical frame, shared by the classifier and
/// [`diagonalize`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct CanonicalFrame {
    pub swapped: bool,
    pub omega: f64,
    /// Bare constants in canonical order.
    pub kx: f64,
    pub ky: f64,
    pub d: f64,
    pub s: f64,
    pub delta: f64,
    pub lambda_plus_sq: f64,
    pub lambda_minus_sq: f64,
}

impl CanonicalFrame {
    /// Build from rotating-frame constants and |ω| (or signed ω).
    pub fn new(kpx: f64, kpy: f64, omega: f64) -> Result<Self> {
        let w2 = omega * omega;
        Self::with_bare(kpx, kpy, snap_zero(kpx - w2, kpx, w2), snap_zero(kpy - w2, kpy, w2), omega)
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        match params.view {
            View::FixedK => {
                let w2 = params.omega * params.omega;
                Self::with_bare(params.kx + w2, params.ky + w2, params.kx, params.ky, params.omega)
            }
            View::FixedKPrime => Self::new(params.kx, params.ky, params.omega),
        }
    }

    fn with_bare(kpx: f64, kpy: f64, kx: f64, ky: f64, omega: f64) -> Result<Self> {
        let (swapped, kpx, kpy, kx, ky, omega) =
            if kpx < kpy { (true, kpy, kpx, ky, kx, -omega) } else { (false, kpx, kpy, kx, ky, omega) };
        let d = kpx - kpy;
        let s = kpx + kpy;
        let w2 = omega * omega;
        let delta_sq = d * d / 4.0 + 2.0 * w2 * s;
        let scale = d * d / 4.0 + 2.0 * w2 * s.abs();
        if omega != 0.0 && delta_sq.abs() <= BOUNDARY_RTOL * scale {
            return Err(Error::DegenerateTransform { omega });
        }
        if delta_sq < 0.0 {
            return Err(Error::UnstableSpectrum(format!("Δ² = {delta_sq:e} < 0")));
        }
        let delta = delta_sq.sqrt();
        let c = s / 2.0 + w2;
        let lambda_plus_sq = c + delta;
        // (c − Δ)(c + Δ) = kx ky, which avoids cancellation near λ₋ = 0
        let lambda_minus_sq = if lambda_plus_sq > 0.0 { kx * ky / lambda_plus_sq } else { c - delta };
        Ok(Self { swapped, omega, kx, ky, d, s, delta, lambda_plus_sq, lambda_minus_sq })
    }

    pub fn lambda_minus_sq_is_zero(&self) -> bool {
        self.lambda_minus_sq == 0.0
    }

    pub fn alpha_plus(&self) -> f64 {
        if self.omega == 0.0 {
            return 1.0;
        }
        0.5 + self.d / (4.0 * self.delta) + self.omega * self.omega / self.delta
    }

    pub fn alpha_minus(&self) -> f64 {
        if self.omega == 0.0 {
            return 1.0;
        }
        let (w2, d, delta) = (self.omega * self.omega, self.d, self.delta);
        if 4.0 * w2 >= d {
            4.0 * w2 * self.kx / (delta * (2.0 * delta - d + 4.0 * w2))
        } else {
            (2.0 * delta + d - 4.0 * w2) / (4.0 * delta)
        }
    }

    pub fn beta_plus(&self) -> f64 {
        if self.omega == 0.0 {
            return self.kx;
        }
        let (s, d, delta) = (self.s, self.d, self.delta);
        if 2.0 * s + d >= 0.0 {
            delta * (2.0 * s + 2.0 * delta + d) / (2.0 * delta + d)
        } else {
            delta * 8.0 * s * self.kx / ((2.0 * delta + d) * (2.0 * delta - 2.0 * s - d))
        }
    }

    pub fn beta_minus(&self) -> f64 {
        if self.omega == 0.0 {
            return self.ky;
        }
        let (s, d, delta) = (self.s, self.d, self.delta);
        if 2.0 * s - d >= 0.0 {
            delta * 8.0 * s * self.ky / ((2.0 * delta + d) * (2.0 * s - d + 2.0 * delta))
        } else {
            delta * (2.0 * s - 2.0 * delta - d) / (2.0 * delta + d)
        }
    }
}

fn snap_zero(k: f64, kp: f64, w2: f64) -> f64 {
    if k.abs() <= BOUNDARY_RTOL * kp.abs().max(w2) {
        0.0
    } else {
        k
    }
}

/// Normal-mode data of a stable (or marginal) parameter point.
///
/// Coefficients refer to the canonical frame; `swapped` records whether
/// that frame exchanged the x and y labels of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeData {
    pub delta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Position coefficient a = 1/(1 + ηγ) of the transformation.
    pub a: f64,
    /// Cross coefficient b = η/(1 + ηγ) of the transformation.
    pub b: f64,
    /// Coupling in the canonical frame (sign flipped when swapped).
    pub omega: f64,
    pub swapped: bool,
    pub sector: SectorTag,
}

impl NormalModeData {
    /// λ₋ = 0 with both α₋ and β₋ zero (free particle in a field).
    pub fn is_landau(&self) -> bool {
        self.lambda_minus == 0.0 && self.alpha_minus == 0.0 && self.beta_minus == 0.0
    }

    /// ⟨Q'²⟩/(f' + ½) and ⟨P'²⟩/(f' + ½) for the ± modes, i.e. λ/β and λ/α.
    ///
    /// The Landau mode uses b'₋ = √|ω| Q'₋ + i P'₋/√(4|ω|).
    pub(crate) fn quadrature_scales(&self) -> Result<[(f64, f64); 2]> {
        let plus = (self.lambda_plus / self.beta_plus, self.lambda_plus / self.alpha_plus);
        let minus = if self.is_landau() {
            let w = self.omega.abs();
            (1.0 / (2.0 * w), 2.0 * w)
        } else if self.alpha_minus == 0.0 || self.beta_minus == 0.0 {
            return Err(Error::ZeroMode);
        } else {
            (self.lambda_minus / self.beta_minus, self.lambda_minus / self.alpha_minus)
        };
        if !(plus.0 > 0.0 && plus.1 > 0.0) {
            return Err(Error::ZeroMode);
        }
        Ok([plus, minus])
    }

    /// Matrix S with R' = S R in the input's (Qx, Qy, Px, Py) ordering;
    /// R' = (Q'+, Q'−, P'+, P'−).
    pub fn transformation(&self) -> Matrix4<f64> {
        let (a, b, g) = (self.a, self.b, self.gamma);
        #[rustfmt::skip]
        let s = Matrix4::new(
            a,   0.0, 0.0, -b,
            0.0, a,   -b,  0.0,
            0.0, g,   1.0, 0.0,
            g,   0.0, 0.0, 1.0,
        );
        if self.swapped {
            let p = swap_permutation();
            s * p
        } else {
            s
        }
    }
}

/// Permutation exchanging x and y in (Qx, Qy, Px, Py).
pub fn swap_permutation() -> Matrix4<f64> {
    #[rustfmt::skip]
    let p = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, 0.0, 1.0, 0.0,
    );
    p
}

/// The symplectic form J with R^T J R encoding [Q_μ, P_ν] = i δ_μν.
pub fn symplectic_form() -> Matrix4<f64> {
    #[rustfmt::skip]
    let j = Matrix4::new(
        0.0,  0.0,  1.0, 0.0,
        0.0,  0.0,  0.0, 1.0,
        -1.0, 0.0,  0.0, 0.0,
        0.0,  -1.0, 0.0, 0.0,
    );
    j
}

/// Coefficient matrix M of H = ½ Rᵀ M R for the input point.
pub fn hamiltonian_matrix(params: &ModelParams) -> Matrix4<f64> {
    let (kpx, kpy) = params.kprime();
    let w = params.omega;
    #[rustfmt::skip]
    let m = Matrix4::new(
        kpx, 0.0, 0.0, -w,
        0.0, kpy, w,   0.0,
        0.0, w,   1.0, 0.0,
        -w,  0.0, 0.0, 1.0,
    );
    m
}

/// Full normal-mode data.
///
/// Fails with [`Error::DegenerateTransform`] when Δ = 0 at ω ≠ 0 and with
/// [`Error::UnstableSpectrum`] when Δ² < 0 or either λ² < 0.
pub fn diagonalize(params: &ModelParams) -> Result<NormalModeData> {
    let fr = CanonicalFrame::from_params(params)?;
    if fr.lambda_plus_sq < 0.0 || fr.lambda_minus_sq < 0.0 {
        return Err(Error::UnstableSpectrum(format!("λ₊² = {:e}, λ₋² = {:e}", fr.lambda_plus_sq, fr.lambda_minus_sq)));
    }
    let (ap, am, bp, bm) = (fr.alpha_plus(), fr.alpha_minus(), fr.beta_plus(), fr.beta_minus());
    let (gamma, eta, a, b) = if fr.omega == 0.0 {
        (0.0, 0.0, 1.0, 0.0)
    } else {
        let denom = 2.0 * fr.delta + fr.d;
        (2.0 * fr.omega * fr.s / denom, 4.0 * fr.omega / denom, denom / (4.0 * fr.delta), fr.omega / fr.delta)
    };
    let lambda_plus = fr.lambda_plus_sq.sqrt().copysign(ap);
    let lambda_minus = if fr.lambda_minus_sq == 0.0 { 0.0 } else { fr.lambda_minus_sq.sqrt().copysign(am) };
    Ok(NormalModeData {
        delta: fr.delta,
        gamma,
        eta,
        alpha_plus: ap,
        alpha_minus: am,
        beta_plus: bp,
        beta_minus: bm,
        lambda_plus,
        lambda_minus,
        a,
        b,
        omega: fr.omega,
        swapped: fr.swapped,
        sector: classify_sector(params).tag,
    })
}

/// Signed normal-mode frequencies (λ₊, λ₋).
pub fn mode_frequencies(params: &ModelParams) -> Result<(f64, f64)> {
    let fr = match CanonicalFrame::from_params(params) {
        Err(Error::DegenerateTransform { .. }) => {
            let (kpx, kpy) = params.kprime();
            let c = (kpx + kpy) / 2.0 + params.omega * params.omega;
            if c < 0.0 {
                return Err(Error::UnstableSpectrum(format!("λ² = {c:e} < 0")));
            }
            return Ok((c.sqrt(), c.sqrt()));
        }
        r => r?,
    };
    if fr.lambda_plus_sq < 0.0 || fr.lambda_minus_sq < 0.0 {
        return Err(Error::UnstableSpectrum(format!("λ₊² = {:e}, λ₋² = {:e}", fr.lambda_plus_sq, fr.lambda_minus_sq)));
    }
    let lm = if fr.lambda_minus_sq == 0.0 { 0.0 } else { fr.lambda_minus_sq.sqrt().copysign(fr.alpha_minus()) };
    Ok((fr.lambda_plus_sq.sqrt(), lm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn isotropic_closed_form() {
        let m = diagonalize(&ModelParams::fixed_k(1.0, 1.0, 0.5)).unwrap();
        let r = 1.25f64.sqrt();
        assert!(close(m.lambda_plus, r + 0.5, 1e-14));
        assert!(close(m.lambda_minus, r - 0.5, 1e-14));
        assert!(close(m.gamma, r, 1e-14));
        assert!(close(m.eta, 1.0 / r, 1e-14));
        assert!(close(m.delta, 2.0 * 0.5 * r, 1e-14));
    }

    #[test]
    fn anisotropic_reference_point() {
        let m = diagonalize(&ModelParams::fixed_k(1.0, 0.25, 1.0)).unwrap();
        assert!((m.delta - 2.576_941_016).abs() < 1e-8);
        assert!((m.lambda_plus - 2.280_776_406).abs() < 1e-8);
        assert!((m.lambda_minus - 0.219_223_594).abs() < 1e-8);
        let (lp2, lm2) = (m.lambda_plus.powi(2), m.lambda_minus.powi(2));
        assert!(close(lp2 * lm2, 0.25, 1e-14));
        assert!(close(lp2 + lm2, 5.25, 1e-14));
    }

    #[test]
    fn landau_mode() {
        let m = diagonalize(&ModelParams::fixed_k(0.0, 0.0, 0.7)).unwrap();
        assert!(close(m.lambda_plus, 1.4, 1e-15));
        assert_eq!(m.lambda_minus, 0.0);
        assert!(close(m.alpha_plus, 1.0, 1e-15));
        assert!(close(m.beta_plus, 1.96, 1e-15));
        assert!(m.is_landau());
    }

    #[test]
    fn spec_formulas_for_alpha_beta() {
        // α± = 1 − (ω/Δ)(γ ∓ ω), β± = (Δ/ω)(γ ± ω), away from cancellation
        let m = diagonalize(&ModelParams::fixed_k(1.0, 0.25, 1.0)).unwrap();
        let (w, g, dl) = (m.omega, m.gamma, m.delta);
        assert!(close(m.alpha_plus, 1.0 - (w / dl) * (g - w), 1e-13));
        assert!(close(m.alpha_minus, 1.0 - (w / dl) * (g + w), 1e-13));
        assert!(close(m.beta_plus, (dl / w) * (g + w), 1e-13));
        assert!(close(m.beta_minus, (dl / w) * (g - w), 1e-13));
        assert!(close(m.a, 1.0 / (1.0 + m.eta * m.gamma), 1e-14));
        assert!(close(m.b, m.eta / (1.0 + m.eta * m.gamma), 1e-14));
    }

    #[test]
    fn mode_frequency_examples() {
        let (lp, lm) = mode_frequencies(&ModelParams::fixed_kprime(1.0, 1.0, 0.3)).unwrap();
        assert!(close(lp, 1.3, 1e-15) && close(lm, 0.7, 1e-15));

        let (lp, lm) = mode_frequencies(&ModelParams::fixed_k(-1.0, -1.0, 1.25)).unwrap();
        assert!(lp > 0.0 && lm < 0.0);

        let (_, lm) = mode_frequencies(&ModelParams::fixed_kprime(1.0, -1.0, 2.0)).unwrap();
        assert!(close(lm * lm, 3.0, 1e-14));
    }

    #[test]
    fn errors() {
        let wc3 = 2.3 / (8.0f64 * 0.3).sqrt();
        assert!(matches!(
            diagonalize(&ModelParams::fixed_kprime(1.0, -1.3, wc3)),
            Err(Error::DegenerateTransform { .. })
        ));
        assert!(matches!(diagonalize(&ModelParams::fixed_kprime(1.0, -1.3, 1.6)), Err(Error::UnstableSpectrum(_))));
        assert!(matches!(diagonalize(&ModelParams::fixed_kprime(1.0, 0.5, 0.8)), Err(Error::UnstableSpectrum(_))));
    }

    #[test]
    fn zero_coupling_is_decoupled() {
        let m = diagonalize(&ModelParams::fixed_k(0.3, 2.0, 0.0)).unwrap();
        assert!(m.swapped);
        assert_eq!((m.gamma, m.eta, m.alpha_plus, m.alpha_minus), (0.0, 0.0, 1.0, 1.0));
        assert_eq!((m.beta_plus, m.beta_minus), (2.0, 0.3));
        assert!(close(m.lambda_plus, 2.0f64.sqrt(), 1e-15));
        assert!(close(m.lambda_minus, 0.3f64.sqrt(), 1e-15));
    }

    #[test]
    fn lambda_minus_vanishes_at_lower_rotating_edge() {
        let wc1 = 0.5;
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
            let (_, lm) = mode_frequencies(&ModelParams::fixed_kprime(1.0, 0.25, wc1 - eps)).unwrap();
            assert!(lm > 0.0 && lm < prev);
            prev = lm;
        }
        assert!(prev < 1e-3);
    }

    fn check_structure(p: &ModelParams) {
        let m = diagonalize(p).unwrap();
        let s = m.transformation();
        let j = symplectic_form();
        let err = (s * j * s.transpose() - j).abs().max();
        assert!(err <= 1e-12, "symplectic error {err} at {p:?}");

        let diag =
            Matrix4::from_diagonal(&nalgebra::Vector4::new(m.beta_plus, m.beta_minus, m.alpha_plus, m.alpha_minus));
        let h = s.transpose() * diag * s;
        let target = hamiltonian_matrix(p);
        let scale = target.abs().max().max(1.0);
        let herr = (h - target).abs().max() / scale;
        assert!(herr <= 1e-10, "reconstruction error {herr} at {p:?}");

        for (l, a, b) in [(m.lambda_plus, m.alpha_plus, m.beta_plus), (m.lambda_minus, m.alpha_minus, m.beta_minus)] {
            assert!(close(l.abs(), (a * b).sqrt(), 1e-10), "{l} vs √({a}·{b}) at {p:?}");
        }
    }

    proptest! {
        #[test]
        fn sector_a_structure(kx in 0.01f64..4.0, ky in 0.01f64..4.0, w in -5.0f64..5.0) {
            check_structure(&ModelParams::fixed_k(kx, ky, w));
        }

        #[test]
        fn sector_b_structure(kx in 0.01f64..4.0, ky in 0.01f64..4.0, extra in 0.01f64..5.0, sign in prop::bool::ANY) {
            let wc = (kx.sqrt() + ky.sqrt()) / 2.0;
            let w = if sign { wc + extra } else { -(wc + extra) };
            let p = ModelParams::fixed_k(-kx, -ky, w);
            let m = diagonalize(&p).unwrap();
            prop_assert!(m.lambda_plus > 0.0 && m.lambda_minus < 0.0);
            prop_assert!(m.alpha_minus < 0.0 && m.beta_minus < 0.0);
            check_structure(&p);
        }

        #[test]
        fn frequency_identities(kx in -4.0f64..4.0, ky in -4.0f64..4.0, w in -5.0f64..5.0) {
            let p = ModelParams::fixed_k(kx, ky, w);
            if let Ok(m) = diagonalize(&p) {
                let (lp2, lm2) = (m.lambda_plus.powi(2), m.lambda_minus.powi(2));
                prop_assert!((lp2 * lm2 - kx * ky).abs() <= 1e-12 * (1.0 + (kx * ky).abs() + lp2 * lm2));
                let sum = kx + ky + 4.0 * w * w;
                prop_assert!((lp2 + lm2 - sum).abs() <= 1e-12 * (1.0 + sum.abs()));
            }
        }

        #[test]
        fn omega_sign_and_label_swap_preserve_frequencies(kx in 0.01f64..4.0, ky in 0.01f64..4.0, w in 0.0f64..5.0) {
            let p = ModelParams::fixed_k(kx, ky, w);
            let base = mode_frequencies(&p).unwrap();
            for q in [p.with_omega(-w), p.swapped(), ModelParams::fixed_k(ky, kx, w)] {
                let other = mode_frequencies(&q).unwrap();
                prop_assert!(close(base.0, other.0, 1e-13) && close(base.1, other.1, 1e-13));
            }
        }
    }
}
