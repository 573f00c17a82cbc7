//! Physical parametrization and dynamical-stability classification.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = ½(Px² + k'x Qx²) + ½(Py² + k'y Qy²) − ω (Qx Py − Qy Px)
//! ```
//!
//! with `k'μ = kμ + ω²`. A parameter point can be given either with the
//! bare spring constants `kμ` held fixed (charged particle in a magnetic
//! field) or with the rotating-frame constants `k'μ` held fixed (particle in
//! a rotating trap). The two views describe the same physics; they differ
//! only in what stays constant when ω is swept.

use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::CanonicalFrame;

/// Relative tolerance used to snap a point onto a stability boundary.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// Which pair of spring constants is held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum View {
    /// `kx, ky` are the bare constants kμ.
    FixedK,
    /// `kx, ky` are the rotating-frame constants k'μ = kμ + ω².
    FixedKPrime,
}

impl View {
    pub fn as_str(self) -> &'static str {
        match self {
            View::FixedK => "fixedk",
            View::FixedKPrime => "fixedkprime",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixedk" | "k" => Ok(View::FixedK),
            "fixedkprime" | "kprime" | "k'" => Ok(View::FixedKPrime),
            other => Err(Error::InvalidParams(format!("unknown view '{other}'"))),
        }
    }
}

/// A point in parameter space. All quantities are dimensionless, in units
/// of a reference frequency with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub view: View,
    pub kx: f64,
    pub ky: f64,
    pub omega: f64,
    /// T ≥ 0; zero selects the vacuum.
    pub temperature: f64,
}

impl ModelParams {
    pub fn new(view: View, kx: f64, ky: f64, omega: f64, temperature: f64) -> Result<Self> {
        for (name, v) in [("kx", kx), ("ky", ky), ("omega", omega), ("temperature", temperature)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if temperature < 0.0 {
            return Err(Error::InvalidParams(format!("temperature must be non-negative, got {temperature}")));
        }
        Ok(Self { view, kx, ky, omega, temperature })
    }

    /// Vacuum point with the bare constants fixed.
    pub fn fixed_k(kx: f64, ky: f64, omega: f64) -> Self {
        Self { view: View::FixedK, kx, ky, omega, temperature: 0.0 }
    }

    /// Vacuum point with the rotating-frame constants fixed.
    pub fn fixed_kprime(kx: f64, ky: f64, omega: f64) -> Self {
        Self { view: View::FixedKPrime, kx, ky, omega, temperature: 0.0 }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// Same physics expressed with k'μ = kμ + ω² held fixed.
    pub fn to_fixed_kprime(&self) -> Self {
        match self.view {
            View::FixedKPrime => *self,
            View::FixedK => {
                let w2 = self.omega * self.omega;
                Self { view: View::FixedKPrime, kx: self.kx + w2, ky: self.ky + w2, ..*self }
            }
        }
    }

    /// Same physics expressed with kμ = k'μ − ω² held fixed.
    pub fn to_fixed_k(&self) -> Self {
        match self.view {
            View::FixedK => *self,
            View::FixedKPrime => {
                let w2 = self.omega * self.omega;
                Self { view: View::FixedK, kx: self.kx - w2, ky: self.ky - w2, ..*self }
            }
        }
    }

    /// Rotating-frame constants (k'x, k'y).
    pub fn kprime(&self) -> (f64, f64) {
        let p = self.to_fixed_kprime();
        (p.kx, p.ky)
    }

    /// Bare constants (kx, ky).
    pub fn k(&self) -> (f64, f64) {
        let p = self.to_fixed_k();
        (p.kx, p.ky)
    }

    /// Relabel x ↔ y. The Hamiltonian maps onto itself with ω → −ω, so the
    /// swapped point carries the opposite sign of ω.
    pub fn swapped(&self) -> Self {
        Self { kx: self.ky, ky: self.kx, omega: -self.omega, ..*self }
    }

    pub fn is_finite(&self) -> bool {
        self.kx.is_finite() && self.ky.is_finite() && self.omega.is_finite() && self.temperature.is_finite()
    }
}

/// Dynamical-stability domain of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectorTag {
    /// Positive definite Hamiltonian.
    A,
    /// Repulsive potential stabilized by the field (fixed kμ view).
    B,
    /// Rotating-frame stable above ω'c2 with both k'μ > 0.
    B1,
    /// Rotating-frame stable with one k'μ < 0.
    B2,
    /// λ₋ = 0 with λ₊ > 0.
    Landau,
    Unstable,
    /// Δ = 0 with ω ≠ 0 (Jordan form).
    Degenerate,
}

impl SectorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SectorTag::A => "A",
            SectorTag::B => "B",
            SectorTag::B1 => "B1",
            SectorTag::B2 => "B2",
            SectorTag::Landau => "Landau",
            SectorTag::Unstable => "Unstable",
            SectorTag::Degenerate => "Degenerate",
        }
    }

    /// Dynamically stable with a discrete spectrum and a non-zero gap.
    pub fn is_stable(self) -> bool {
        matches!(self, SectorTag::A | SectorTag::B | SectorTag::B1 | SectorTag::B2)
    }

    /// Stable but not positive definite.
    pub fn is_b_family(self) -> bool {
        matches!(self, SectorTag::B | SectorTag::B1 | SectorTag::B2)
    }
}

impl fmt::Display for SectorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed-form critical frequencies. Entries that do not apply are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Boundaries {
    /// Fixed kμ < 0: B requires |ω| > ωc = (√−kx + √−ky)/2.
    pub omega_c: Option<f64>,
    /// Fixed k'μ > 0: A requires |ω| < ω'c1 = min √k'μ.
    pub omega_c1: Option<f64>,
    /// Fixed k'μ > 0: B1 requires |ω| > ω'c2 = max √k'μ.
    pub omega_c2: Option<f64>,
    /// Fixed k'x > 0 > k'y: upper end of the B2 window (positive root of
    /// Δ(ω) = 0). `None` when the window is unbounded.
    pub omega_c3: Option<f64>,
    /// Fixed k'x > 0 > k'y: lower end √k'x of the B2 window.
    pub lower: Option<f64>,
}

impl Boundaries {
    /// All finite boundary frequencies, for distance checks.
    pub fn frequencies(&self) -> Vec<f64> {
        [self.omega_c, self.omega_c1, self.omega_c2, self.omega_c3, self.lower].into_iter().flatten().collect()
    }
}

/// Result of [`classify_sector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorClass {
    pub tag: SectorTag,
    pub boundaries: Boundaries,
    /// Set when the point was snapped onto a boundary (Δ ≈ 0 or λ₋ ≈ 0).
    pub on_boundary: bool,
}

/// Δ² = (k'x − k'y)²/4 + 2ω²(k'x + k'y).
pub fn delta_squared(kpx: f64, kpy: f64, omega: f64) -> f64 {
    let d = kpx - kpy;
    d * d / 4.0 + 2.0 * omega * omega * (kpx + kpy)
}

/// Classify a parameter point from the normal-mode coefficients.
///
/// The tag is derived from Δ², λ±² and the signs of α±, β±; the closed-form
/// boundaries are attached as metadata only.
pub fn classify_sector(params: &ModelParams) -> SectorClass {
    let boundaries = stability_boundaries(params.kx, params.ky, params.view).unwrap_or_default();
    let (tag, on_boundary) = first_principles_tag(params);
    SectorClass { tag, boundaries, on_boundary }
}

fn first_principles_tag(params: &ModelParams) -> (SectorTag, bool) {
    let (kpx, kpy) = params.kprime();
    let w = params.omega.abs();

    if w == 0.0 {
        let (hi, lo) = if kpx >= kpy { (kpx, kpy) } else { (kpy, kpx) };
        let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
        if lo.abs() <= BOUNDARY_RTOL * scale {
            return if hi > 0.0 { (SectorTag::Landau, true) } else { (SectorTag::Unstable, true) };
        }
        return if lo > 0.0 { (SectorTag::A, false) } else { (SectorTag::Unstable, false) };
    }

    let frame = match CanonicalFrame::from_params(&params.with_omega(w)) {
        Ok(f) => f,
        Err(Error::DegenerateTransform { .. }) => return (SectorTag::Degenerate, true),
        Err(_) => return (SectorTag::Unstable, false),
    };
    if frame.lambda_minus_sq_is_zero() {
        return (SectorTag::Landau, true);
    }
    if frame.lambda_minus_sq < 0.0 || frame.lambda_plus_sq <= 0.0 {
        return (SectorTag::Unstable, false);
    }
    let (ap, am, bp, bm) = (frame.alpha_plus(), frame.alpha_minus(), frame.beta_plus(), frame.beta_minus());
    if ap > 0.0 && bp > 0.0 && am > 0.0 && bm > 0.0 {
        (SectorTag::A, false)
    } else if ap > 0.0 && bp > 0.0 && am < 0.0 && bm < 0.0 {
        let tag = match params.view {
            View::FixedK => SectorTag::B,
            View::FixedKPrime if kpx.min(kpy) >= 0.0 => SectorTag::B1,
            View::FixedKPrime => SectorTag::B2,
        };
        (tag, false)
    } else {
        (SectorTag::Unstable, false)
    }
}

/// Closed-form critical frequencies for the given view and constants.
///
/// The upper B2 bound is taken as the positive root of Δ(ω) = 0,
/// ω'c3 = (k'x − k'y)/√(8|k'x + k'y|).
pub fn stability_boundaries(kx: f64, ky: f64, view: View) -> Result<Boundaries> {
    match view {
        View::FixedK => {
            if kx <= 0.0 && ky <= 0.0 {
                Ok(Boundaries { omega_c: Some(((-kx).sqrt() + (-ky).sqrt()) / 2.0), ..Default::default() })
            } else {
                Err(Error::NoBoundary)
            }
        }
        View::FixedKPrime => {
            let (hi, lo) = if kx >= ky { (kx, ky) } else { (ky, kx) };
            if hi <= 0.0 {
                return Err(Error::NoBoundary);
            }
            if lo >= 0.0 {
                return Ok(Boundaries { omega_c1: Some(lo.sqrt()), omega_c2: Some(hi.sqrt()), ..Default::default() });
            }
            if lo <= -3.0 * hi {
                return Err(Error::NoBoundary);
            }
            let omega_c3 = if lo < -hi { Some((hi - lo) / (8.0 * (hi + lo).abs()).sqrt()) } else { None };
            Ok(Boundaries { omega_c3, lower: Some(hi.sqrt()), ..Default::default() })
        }
    }
}

/// Sector predicted by the closed-form boundaries alone.
///
/// Points exactly on a boundary get the tag of the open region below it;
/// callers comparing against [`classify_sector`] should skip points near
/// [`Boundaries::frequencies`].
pub fn closed_form_tag(params: &ModelParams) -> SectorTag {
    let w = params.omega.abs();
    match params.view {
        View::FixedK => {
            let (kx, ky) = (params.kx, params.ky);
            if kx > 0.0 && ky > 0.0 {
                SectorTag::A
            } else if kx == 0.0 && ky == 0.0 && w != 0.0 {
                SectorTag::Landau
            } else if kx < 0.0 && ky < 0.0 {
                let wc = ((-kx).sqrt() + (-ky).sqrt()) / 2.0;
                if w > wc {
                    SectorTag::B
                } else {
                    SectorTag::Unstable
                }
            } else {
                SectorTag::Unstable
            }
        }
        View::FixedKPrime => {
            let (hi, lo) = if params.kx >= params.ky { (params.kx, params.ky) } else { (params.ky, params.kx) };
            if hi <= 0.0 {
                return SectorTag::Unstable;
            }
            if lo > 0.0 {
                if w < lo.sqrt() {
                    SectorTag::A
                } else if w > hi.sqrt() {
                    SectorTag::B1
                } else {
                    SectorTag::Unstable
                }
            } else if lo == 0.0 {
                if w == 0.0 {
                    SectorTag::Landau
                } else if w > hi.sqrt() {
                    SectorTag::B1
                } else {
                    SectorTag::Unstable
                }
            } else if lo < 0.0 && lo >= -hi {
                if w > hi.sqrt() {
                    SectorTag::B2
                } else {
                    SectorTag::Unstable
                }
            } else if lo < -hi && lo > -3.0 * hi {
                let wc3 = (hi - lo) / (8.0 * (hi + lo).abs()).sqrt();
                if w > hi.sqrt() && w < wc3 {
                    SectorTag::B2
                } else {
                    SectorTag::Unstable
                }
            } else {
                SectorTag::Unstable
            }
        }
    }
}
