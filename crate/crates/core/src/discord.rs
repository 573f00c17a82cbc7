//! Gaussian quantum discord of the two-mode state.
//!
//! Invariants are taken in units where the vacuum covariance is the
//! identity (twice the second moments used elsewhere):
//!
//! ```text
//! A = 4(f_x+½)²   B = 4(f_y+½)²   D = Π 4(f'μ+½)²
//! C = 2 Σ [(f'μ+½)² − (fμ+½)²]       so that A + B + 2C = 4 Σ (f'μ+½)²
//! ```
//!
//! with B belonging to the measured mode.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;

use crate::covariance::{symplectic_spectrum, CovarianceMatrix, ThermalOccupations};
use crate::error::{Error, Result};
use crate::measures::{entropy_unchecked, local_symplectic_eigenvalue, Mode};
use crate::model::ModelParams;

/// Symplectic invariants and the minimized conditional determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordInvariants {
    pub inv_a: f64,
    pub inv_b: f64,
    pub inv_c: f64,
    pub inv_d: f64,
    pub e_min: f64,
}

impl DiscordInvariants {
    /// Invariants with `measured` as the B mode.
    pub fn new(f_local: (f64, f64), occ: &ThermalOccupations, measured: Mode) -> Self {
        let (f_other, f_meas) = match measured {
            Mode::Y => (f_local.0, f_local.1),
            Mode::X => (f_local.1, f_local.0),
        };
        // work with X − 1 and g(f) = f(1+f) so nothing cancels near the vacuum
        let g = |x: f64| x * (1.0 + x);
        let a1 = 4.0 * g(f_other);
        let b1 = 4.0 * g(f_meas);
        let (dp, dm) = (4.0 * g(occ.f_plus), 4.0 * g(occ.f_minus));
        let d1 = dp + dm + dp * dm;
        let c = 2.0 * (g(occ.f_plus) + g(occ.f_minus) - g(f_other) - g(f_meas));
        let e_min = e_min_shifted(a1, b1, c, d1);
        Self { inv_a: 1.0 + a1, inv_b: 1.0 + b1, inv_c: c, inv_d: 1.0 + d1, e_min }
    }

    /// Occupation ½√E_min − ½ of the optimally conditioned mode.
    pub fn conditional_occupation(&self) -> f64 {
        occupation_from_det(self.e_min)
    }
}

fn occupation_from_det(e: f64) -> f64 {
    // ½(√E − 1) = ½(E − 1)/(√E + 1)
    (0.5 * (e - 1.0) / (e.sqrt() + 1.0)).max(0.0)
}

/// E_min from A − 1, B − 1, C and D − 1.
fn e_min_shifted(a1: f64, b1: f64, c: f64, d1: f64) -> f64 {
    let (a, b, d) = (1.0 + a1, 1.0 + b1, 1.0 + d1);
    let c2 = c * c;
    // D − AB and D − A without forming the products of values near 1
    let d_minus_ab = d1 - a1 - b1 - a1 * b1;
    let d_minus_a = d1 - a1;
    let general = d_minus_ab * d_minus_ab <= (1.0 + b) * c2 * (a + d);
    if general && b1 > 1e-300 {
        let inner = (c2 + b1 * d_minus_a).max(0.0);
        (2.0 * c2 + b1 * d_minus_a + 2.0 * c.abs() * inner.sqrt()) / (b1 * b1)
    } else {
        let ab = a * b;
        let disc = (c2 * c2 + d_minus_ab * d_minus_ab - 2.0 * c2 * (ab + d)).max(0.0);
        (ab - c2 + d - disc.sqrt()) / (2.0 * b)
    }
}

/// Gaussian discord with `measured` the mode on which the measurement acts.
///
/// D = h(½√E_min − ½) − h(f'₊) − h(f'₋) + h(f_measured).
pub fn gaussian_discord(f_local: (f64, f64), occ: &ThermalOccupations, measured: Mode) -> f64 {
    let inv = DiscordInvariants::new(f_local, occ, measured);
    let f_meas = match measured {
        Mode::X => f_local.0,
        Mode::Y => f_local.1,
    };
    let d = entropy_unchecked(inv.conditional_occupation())
        - entropy_unchecked(occ.f_plus)
        - entropy_unchecked(occ.f_minus)
        + entropy_unchecked(f_meas);
    d.max(0.0)
}

/// ω²/(2T√(ω² + ω_other²)), the leading high-temperature term; for D^y the
/// unmeasured mode is x.
pub fn discord_high_t_asymptote(params: &ModelParams, measured: Mode) -> Result<f64> {
    let t = params.temperature;
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain("high-temperature asymptote needs T > 0".into()));
    }
    let (kx, ky) = params.k();
    let k_other = match measured {
        Mode::Y => kx,
        Mode::X => ky,
    };
    if k_other <= 0.0 {
        return Err(Error::Domain(format!("unmeasured spring constant {k_other} ≤ 0")));
    }
    let w2 = params.omega * params.omega;
    Ok(w2 / (2.0 * t * (w2 + k_other).sqrt()))
}

/// Search grid for [`discord_minimization_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordGrid {
    /// Largest squeezing parameter of the measurement seed.
    pub r_max: f64,
    pub r_steps: usize,
    pub phi_steps: usize,
    /// Final step size of the local refinement in r and φ.
    pub tolerance: f64,
}

impl Default for DiscordGrid {
    fn default() -> Self {
        Self { r_max: 8.0, r_steps: 48, phi_steps: 48, tolerance: 1e-9 }
    }
}

/// Outcome of the brute-force minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleDiscord {
    pub discord: f64,
    pub e_min: f64,
    /// Squeezing of the optimal seed; infinite for the homodyne limit.
    pub r: f64,
    pub phi: f64,
    /// The finite-r optimum sits on r_max and beats the homodyne limit.
    pub at_r_boundary: bool,
}

struct Blocks {
    a: Matrix2<f64>,
    b: Matrix2<f64>,
    c: Matrix2<f64>,
}

impl Blocks {
    fn new(cov: &CovarianceMatrix, measured: Mode) -> Self {
        let s = cov.second_moments * 2.0;
        let (u, m) = match measured {
            Mode::Y => (0, 1),
            Mode::X => (1, 0),
        };
        let blk = |i: usize, j: usize| Matrix2::new(s[(i, j)], s[(i, j + 2)], s[(i + 2, j)], s[(i + 2, j + 2)]);
        Self { a: blk(u, u), b: blk(m, m), c: blk(u, m) }
    }

    /// det of A − C(B + σm)⁻¹Cᵀ for a rotated squeezed vacuum σm.
    fn conditional_det(&self, r: f64, phi: f64) -> f64 {
        let (cs, sn) = (phi.cos(), phi.sin());
        let rot = Matrix2::new(cs, -sn, sn, cs);
        let sigma_m = rot * Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp()) * rot.transpose();
        let inv = (self.b + sigma_m).try_inverse().unwrap_or_else(Matrix2::zeros);
        (self.a - self.c * inv * self.c.transpose()).determinant()
    }

    /// Homodyne limit r → ∞ along direction φ.
    fn homodyne_det(&self, phi: f64) -> f64 {
        let u = Vector2::new(phi.cos(), phi.sin());
        let w = (u.transpose() * self.b * u)[(0, 0)];
        let cu = self.c * u;
        (self.a - cu * cu.transpose() / w).determinant()
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    e: f64,
    r: f64,
    phi: f64,
}

impl Candidate {
    fn better(self, other: Self) -> Self {
        let key = |c: &Self| (c.e, c.r, c.phi);
        let (a, b) = (key(&self), key(&other));
        if a.0 < b.0 || (a.0 == b.0 && (a.1 < b.1 || (a.1 == b.1 && a.2 <= b.2))) {
            self
        } else {
            other
        }
    }
}

/// Discord by direct minimization over pure gaussian measurements on
/// `measured`, including the homodyne limit.
pub fn discord_minimization_oracle(
    cov: &CovarianceMatrix,
    measured: Mode,
    grid: &DiscordGrid,
) -> Result<OracleDiscord> {
    if grid.r_steps < 2 || grid.phi_steps < 2 || grid.r_max.is_nan() || grid.r_max <= 0.0 {
        return Err(Error::InvalidParams("discord grid needs ≥ 2 steps and r_max > 0".into()));
    }
    let blocks = Blocks::new(cov, measured);
    let pi = std::f64::consts::PI;
    let dr = grid.r_max / (grid.r_steps - 1) as f64;
    let dphi = pi / grid.phi_steps as f64;

    let coarse = (0..grid.phi_steps)
        .into_par_iter()
        .map(|j| {
            let phi = j as f64 * dphi;
            (0..grid.r_steps)
                .map(|i| {
                    let r = i as f64 * dr;
                    Candidate { e: blocks.conditional_det(r, phi), r, phi }
                })
                .reduce(Candidate::better)
                .expect("non-empty grid")
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(Candidate::better)
        .expect("non-empty grid");

    let finite = refine(coarse, dr, grid, |r, phi| blocks.conditional_det(r, phi));

    let hom_coarse = (0..grid.phi_steps)
        .map(|j| {
            let phi = j as f64 * dphi;
            Candidate { e: blocks.homodyne_det(phi), r: f64::INFINITY, phi }
        })
        .reduce(Candidate::better)
        .expect("non-empty grid");
    let homodyne = refine_phi(hom_coarse, dphi, grid.tolerance, |phi| blocks.homodyne_det(phi));

    let best = finite.better(homodyne);
    // a flat landscape (pure states) is not a boundary minimum; large r
    // costs about e^{2r}·ε of precision in the determinant
    let slack = 1e-8 * best.e.abs().max(1.0);
    let at_r_boundary = best.r.is_finite()
        && (grid.r_max - best.r) < dr
        && best.e < homodyne.e - slack
        && best.e < blocks.conditional_det(0.0, 0.0) - slack;

    let (small, large) = symplectic_spectrum(cov)?;
    let f_meas = local_symplectic_eigenvalue(cov, measured)?;
    let e_min = best.e.max(1.0);
    let discord = entropy_unchecked(occupation_from_det(e_min)) - entropy_unchecked(small) - entropy_unchecked(large)
        + entropy_unchecked(f_meas);
    Ok(OracleDiscord { discord: discord.max(0.0), e_min, r: best.r, phi: best.phi, at_r_boundary })
}

/// Pattern search with halving steps in (u, v) = r(cos 2φ, sin 2φ), which
/// is smooth through r = 0 where φ is undefined.
fn refine(start: Candidate, dr: f64, grid: &DiscordGrid, f: impl Fn(f64, f64) -> f64) -> Candidate {
    let pi = std::f64::consts::PI;
    let to_polar = |u: f64, v: f64| {
        let r = u.hypot(v).min(grid.r_max);
        let phi = if r == 0.0 { 0.0 } else { (0.5 * v.atan2(u)).rem_euclid(pi) };
        (r, phi)
    };
    let mut best = start;
    let (mut u, mut v) = (start.r * (2.0 * start.phi).cos(), start.r * (2.0 * start.phi).sin());
    let mut step = dr;
    while step > grid.tolerance {
        let mut improved = false;
        for (du, dv) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (r, phi) = to_polar(u + du, v + dv);
            let cand = Candidate { e: f(r, phi), r, phi };
            if cand.e < best.e {
                best = cand;
                u = r * (2.0 * phi).cos();
                v = r * (2.0 * phi).sin();
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}

fn refine_phi(start: Candidate, dphi: f64, tol: f64, f: impl Fn(f64) -> f64) -> Candidate {
    let pi = std::f64::consts::PI;
    let mut best = start;
    let mut step = dphi;
    while step > tol {
        let mut improved = false;
        for d in [step, -step] {
            let phi = (best.phi + d).rem_euclid(pi);
            let e = f(phi);
            if e < best.e {
                best = Candidate { e, r: best.r, phi };
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{build_covariance, thermal_occupations};
    use crate::measures::{bosonic_entropy, vacuum_f_closed};
    use crate::spectral::diagonalize;
    use proptest::prelude::*;

    fn state(p: &ModelParams) -> (ThermalOccupations, CovarianceMatrix, (f64, f64)) {
        let m = diagonalize(p).unwrap();
        let occ = thermal_occupations(&m, p.temperature).unwrap();
        let cov = build_covariance(&m, &occ).unwrap();
        let fl =
            (local_symplectic_eigenvalue(&cov, Mode::X).unwrap(), local_symplectic_eigenvalue(&cov, Mode::Y).unwrap());
        (occ, cov, fl)
    }

    #[test]
    fn vacuum_discord_is_entropy() {
        let p = ModelParams::fixed_k(1.0, 0.25, 1.0);
        let f = vacuum_f_closed(&p).unwrap();
        let s = bosonic_entropy(f).unwrap();
        let occ = ThermalOccupations::VACUUM;
        for m in [Mode::X, Mode::Y] {
            assert!((gaussian_discord((f, f), &occ, m) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn product_vacuum_has_no_discord() {
        let occ = ThermalOccupations::VACUUM;
        assert_eq!(gaussian_discord((0.0, 0.0), &occ, Mode::Y), 0.0);
        let inv = DiscordInvariants::new((0.0, 0.0), &occ, Mode::Y);
        assert_eq!((inv.inv_a, inv.inv_b, inv.inv_c, inv.inv_d), (1.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn invariants_match_covariance_blocks() {
        let p = ModelParams::fixed_k(1.0, 0.25, 0.8).with_temperature(0.3);
        let (occ, cov, fl) = state(&p);
        let inv = DiscordInvariants::new(fl, &occ, Mode::Y);
        let s = cov.second_moments * 2.0;
        let det2 = |m: Matrix2<f64>| m.determinant();
        let a = det2(Matrix2::new(s[(0, 0)], s[(0, 2)], s[(2, 0)], s[(2, 2)]));
        let b = det2(Matrix2::new(s[(1, 1)], s[(1, 3)], s[(3, 1)], s[(3, 3)]));
        let c = det2(Matrix2::new(s[(0, 1)], s[(0, 3)], s[(2, 1)], s[(2, 3)]));
        let d = s.determinant();
        assert!((inv.inv_a - a).abs() < 1e-12 && (inv.inv_b - b).abs() < 1e-12);
        assert!((inv.inv_c - c).abs() < 1e-12, "{} vs {}", inv.inv_c, c);
        assert!((inv.inv_d - d).abs() < 1e-10);
        let sum = 4.0 * ((occ.f_plus + 0.5).powi(2) + (occ.f_minus + 0.5).powi(2));
        assert!((inv.inv_a + inv.inv_b + 2.0 * inv.inv_c - sum).abs() < 1e-12);
    }

    #[test]
    fn high_temperature_tail() {
        let p = ModelParams::fixed_k(1.0, 0.25, 1.0).with_temperature(10.0);
        let asym = discord_high_t_asymptote(&p, Mode::Y).unwrap();
        assert!((asym - 1.0 / (20.0 * 2f64.sqrt())).abs() < 1e-15);
        let (occ, _, fl) = state(&p);
        let dy = gaussian_discord(fl, &occ, Mode::Y);
        assert!((dy / asym - 1.0).abs() < 0.05, "{dy} vs {asym}");
    }

    #[test]
    fn asymptote_ignores_measured_frequency() {
        let a = discord_high_t_asymptote(&ModelParams::fixed_k(1.0, 0.25, 1.0).with_temperature(3.0), Mode::Y).unwrap();
        let b = discord_high_t_asymptote(&ModelParams::fixed_k(1.0, 0.7, 1.0).with_temperature(3.0), Mode::Y).unwrap();
        assert_eq!(a, b);
        let z = discord_high_t_asymptote(&ModelParams::fixed_k(1.0, 0.25, 0.0).with_temperature(3.0), Mode::Y).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn high_t_ordering() {
        let p = ModelParams::fixed_k(1.0, 0.2, 1.0).with_temperature(50.0);
        let (occ, _, fl) = state(&p);
        assert!(gaussian_discord(fl, &occ, Mode::X) > gaussian_discord(fl, &occ, Mode::Y));
    }

    #[test]
    fn oracle_reference_points() {
        let grid = DiscordGrid::default();
        for t in [0.0, 0.05, 0.2, 1.0] {
            let p = ModelParams::fixed_k(1.0, 0.25, 1.0).with_temperature(t);
            let (occ, cov, fl) = state(&p);
            for m in [Mode::X, Mode::Y] {
                let closed = gaussian_discord(fl, &occ, m);
                let brute = discord_minimization_oracle(&cov, m, &grid).unwrap();
                assert!((closed - brute.discord).abs() < 1e-6, "T={t} {m:?}: {closed} vs {brute:?}");
                assert!(!brute.at_r_boundary, "T={t} {m:?}: {brute:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn closed_form_matches_oracle(kx in 0.1f64..3.0, ky in 0.1f64..3.0, w in 0.0f64..2.0, t in 0.01f64..1.5) {
            let p = ModelParams::fixed_k(kx, ky, w).with_temperature(t);
            let (occ, cov, fl) = state(&p);
            let grid = DiscordGrid::default();
            for m in [Mode::X, Mode::Y] {
                let closed = gaussian_discord(fl, &occ, m);
                let brute = discord_minimization_oracle(&cov, m, &grid).unwrap();
                prop_assert!((closed - brute.discord).abs() <= 1e-5, "{:?}: {} vs {:?}", m, closed, brute);
            }
        }

        #[test]
        fn discord_nonnegative(kx in 0.05f64..4.0, ky in 0.05f64..4.0, w in -3.0f64..3.0, t in 0.0f64..5.0) {
            let p = ModelParams::fixed_k(kx, ky, w).with_temperature(t);
            let (occ, _, fl) = state(&p);
            prop_assert!(gaussian_discord(fl, &occ, Mode::X) >= 0.0);
            prop_assert!(gaussian_discord(fl, &occ, Mode::Y) >= 0.0);
        }
    }
}
