//! Limit temperature of entanglement, parameter sweeps and sector maps.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::covariance::{build_covariance, thermal_occupations};
use crate::error::{Error, Result};
use crate::measures::{local_symplectic_eigenvalue, ppt_from_occupations, vacuum_f_closed, Mode};
use crate::model::{classify_sector, closed_form_tag, Boundaries, ModelParams, SectorTag, View};
use crate::report::{compute_report, EntanglementReport};
use crate::spectral::{diagonalize, NormalModeData};

const T_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 60;
const SCAN_POINTS: usize = 64;

/// Root of f̃₋(T) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitTemperature {
    pub t_e: f64,
    pub bracket: (f64, f64),
    /// |f̃₋(T_E)|
    pub residual: f64,
    /// No T > 0 is entangled (including the separable vacuum).
    pub exact_zero: bool,
    /// f̃₋ < 0 at T_E(1 − 10⁻³) and ≥ 0 at T_E(1 + 10⁻³).
    pub crossing_verified: bool,
    /// Some scanned T in (T_E, 10 T_E] had f̃₋ < 0 again.
    pub reentrant: bool,
}

impl LimitTemperature {
    fn zero() -> Self {
        Self {
            t_e: 0.0,
            bracket: (0.0, 0.0),
            residual: 0.0,
            exact_zero: true,
            crossing_verified: true,
            reentrant: false,
        }
    }

    /// The record itself, or [`Error::NotEntangledAtZero`] when no
    /// entangled temperature exists.
    pub fn entangled(self) -> Result<Self> {
        if self.exact_zero {
            Err(Error::NotEntangledAtZero)
        } else {
            Ok(self)
        }
    }
}

/// f̃₋ of the thermal state at temperature `t` > 0.
pub fn ppt_minus_at(modes: &NormalModeData, t: f64) -> Result<f64> {
    let occ = thermal_occupations(modes, t)?;
    let cov = build_covariance(modes, &occ)?;
    let f_local = (local_symplectic_eigenvalue(&cov, Mode::X)?, local_symplectic_eigenvalue(&cov, Mode::Y)?);
    Ok(ppt_from_occupations(f_local, &occ)?.1)
}

/// Temperature above which the thermal state is separable.
///
/// Bisection on f̃₋(T) over [10⁻⁶ λ₋, T₁], with T₁ doubled from λ₊ until
/// f̃₋(T₁) > 0.
pub fn limit_temperature(params: &ModelParams) -> Result<LimitTemperature> {
    let tag = classify_sector(params).tag;
    if tag != SectorTag::A {
        return Err(Error::ThermalUndefined(tag));
    }
    if vacuum_f_closed(params)? <= 0.0 {
        return Ok(LimitTemperature::zero());
    }
    let modes = diagonalize(params)?;
    let g = |t: f64| ppt_minus_at(&modes, t);

    let mut lo = 1e-6 * modes.lambda_minus;
    if g(lo)? >= 0.0 {
        return Ok(LimitTemperature::zero());
    }
    let mut hi = modes.lambda_plus;
    let mut doublings = 0;
    while g(hi)? < 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Ok(LimitTemperature::zero());
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
    }
    let bracket = (lo, hi);

    let mut g_hi = g(hi)?;
    while hi - lo > T_TOL * hi.max(1.0) || g_hi > RESIDUAL_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            g_hi = gm;
        }
    }
    let t_e = hi;

    let crossing_verified = g(t_e * (1.0 - 1e-3))? < 0.0 && g(t_e * (1.0 + 1e-3))? >= 0.0;
    let mut reentrant = false;
    for i in 1..=SCAN_POINTS {
        let t = t_e * (1.0 + 9.0 * i as f64 / SCAN_POINTS as f64);
        if g(t)? < 0.0 {
            reentrant = true;
            break;
        }
    }
    Ok(LimitTemperature { t_e, bracket, residual: g_hi.abs(), exact_zero: false, crossing_verified, reentrant })
}

/// Maximum of T_E over ω in `[lo, hi]` for a family of points.
///
/// `family` maps ω to the parameter point. A coarse scan is refined by
/// golden-section search; returns (ω*, T_E(ω*)).
pub fn limit_temperature_maximum(
    family: impl Fn(f64) -> ModelParams + Sync,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let n = 64;
    let te = |w: f64| limit_temperature(&family(w)).map(|l| l.t_e);
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let values = grid.par_iter().map(|&w| te(w)).collect::<Result<Vec<_>>>()?;
    let best = (0..=n).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(n)];

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (te(c)?, te(d)?);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = te(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = te(d)?;
        }
    }
    let w = 0.5 * (a + b);
    Ok((w, te(w)?))
}

/// ωxωy / (2ω ln((ωx + ωy)/(ωx − ωy))), the large-ω limit temperature.
pub fn te_large_omega_asymptote(params: &ModelParams) -> Result<f64> {
    let (kx, ky) = params.k();
    if !(kx > 0.0 && ky > 0.0) {
        return Err(Error::Domain(format!("needs kμ > 0, got ({kx}, {ky})")));
    }
    let (wx, wy) = (kx.sqrt(), ky.sqrt());
    if wy >= wx {
        return Err(Error::Domain(format!("needs ωy < ωx, got ωy = {wy}, ωx = {wx}")));
    }
    let w = params.omega.abs();
    if w == 0.0 {
        return Err(Error::Domain("needs ω ≠ 0".into()));
    }
    Ok(wx * wy / (2.0 * w * ((wx + wy) / (wx - wy)).ln()))
}

/// Parameter swept by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Omega,
    Temperature,
    /// ky = ratio · kx
    KyRatio,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Omega => "omega",
            SweepAxis::Temperature => "temperature",
            SweepAxis::KyRatio => "ky_ratio",
        }
    }

    pub fn apply(self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = *base;
        match self {
            SweepAxis::Omega => p.omega = value,
            SweepAxis::Temperature => p.temperature = value,
            SweepAxis::KyRatio => p.ky = value * base.kx,
        }
        p
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "omega" | "w" => Ok(SweepAxis::Omega),
            "temperature" | "temp" | "t" => Ok(SweepAxis::Temperature),
            "ky_ratio" | "ky-ratio" | "ratio" => Ok(SweepAxis::KyRatio),
            other => Err(Error::SpecInvalid(format!("unknown axis {other:?}"))),
        }
    }
}

/// Quantity requested from a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Output {
    /// (S_x, S_y)
    Entropy,
    Negativity,
    /// (f_x, f_y)
    FLocal,
    /// (f'₊, f'₋)
    FPrime,
    /// (f̃₊, f̃₋)
    FTilde,
    DiscordX,
    DiscordY,
    Lz,
    Sector,
    LimitTemperature,
}

impl Output {
    pub const ALL: [Output; 10] = [
        Output::Entropy,
        Output::Negativity,
        Output::FLocal,
        Output::FPrime,
        Output::FTilde,
        Output::DiscordX,
        Output::DiscordY,
        Output::Lz,
        Output::Sector,
        Output::LimitTemperature,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Output::Entropy => "S",
            Output::Negativity => "N",
            Output::FLocal => "f",
            Output::FPrime => "fp",
            Output::FTilde => "ft",
            Output::DiscordX => "Dx",
            Output::DiscordY => "Dy",
            Output::Lz => "Lz",
            Output::Sector => "sector",
            Output::LimitTemperature => "TE",
        }
    }

    fn needs_report(self) -> bool {
        !matches!(self, Output::Sector | Output::LimitTemperature)
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::SpecInvalid(format!("unknown output {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    /// Geometric instead of uniform spacing.
    pub log: bool,
    pub base: ModelParams,
    pub outputs: BTreeSet<Output>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.outputs.is_empty() {
            return Err(Error::SpecInvalid("empty output set".into()));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::SpecInvalid(format!("bad range [{}, {}]", self.lo, self.hi)));
        }
        if self.samples < 2 {
            return Err(Error::SpecInvalid(format!("need at least 2 samples, got {}", self.samples)));
        }
        if self.log && self.lo <= 0.0 {
            return Err(Error::SpecInvalid("log spacing needs lo > 0".into()));
        }
        if self.axis == SweepAxis::Temperature && self.lo < 0.0 {
            return Err(Error::SpecInvalid("negative temperature".into()));
        }
        if !self.base.is_finite() {
            return Err(Error::SpecInvalid("non-finite base parameters".into()));
        }
        Ok(())
    }

    /// Sample positions along the axis, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.samples - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    return self.hi;
                }
                let u = i as f64 / n as f64;
                if self.log {
                    self.lo * (self.hi / self.lo).powf(u)
                } else {
                    self.lo + (self.hi - self.lo) * u
                }
            })
            .collect()
    }
}

/// One sample of a sweep. Quantities not requested, or undefined at the
/// point, are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub params: ModelParams,
    pub sector: SectorTag,
    pub report: Option<EntanglementReport>,
    pub limit_temperature: Option<LimitTemperature>,
    pub error: Option<Error>,
}

/// Evaluate a sweep; rows come back in axis order and unstable points never
/// abort the run.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let want_report = spec.outputs.iter().any(|o| o.needs_report());
    let want_te = spec.outputs.contains(&Output::LimitTemperature);
    let rows = spec
        .values()
        .into_par_iter()
        .map(|v| {
            let params = spec.axis.apply(&spec.base, v);
            let sector = classify_sector(&params).tag;
            let mut row =
                SweepRow { axis_value: v, params, sector, report: None, limit_temperature: None, error: None };
            if want_report {
                match compute_report(&params) {
                    Ok(r) => row.report = Some(r),
                    Err(e) => row.error = Some(e),
                }
            }
            if want_te {
                match limit_temperature(&params.with_temperature(0.0)) {
                    Ok(l) => row.limit_temperature = Some(l),
                    Err(e) => {
                        row.error.get_or_insert(e);
                    }
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Two-dimensional sector map over (kyratio, ω/ω₀).
///
/// The reference constant kx is ±1, so ω₀ = 1 and the ratio is
/// ky/|kx| (or k'y/k'x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpec {
    pub view: View,
    pub kx: f64,
    pub ratio: (f64, f64),
    pub ratio_steps: usize,
    pub omega: (f64, f64),
    pub omega_steps: usize,
}

impl PhaseSpec {
    pub fn validate(&self) -> Result<()> {
        let ok_range = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !(ok_range(self.ratio) && ok_range(self.omega)) {
            return Err(Error::SpecInvalid("bad grid range".into()));
        }
        if self.ratio_steps < 2 || self.omega_steps < 2 {
            return Err(Error::SpecInvalid("grid needs at least 2 steps per axis".into()));
        }
        if !(self.kx.is_finite() && self.kx != 0.0) {
            return Err(Error::SpecInvalid(format!("reference kx = {}", self.kx)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCell {
    pub ratio: f64,
    /// ω/ω₀ with ω₀ = √|kx|.
    pub omega_scaled: f64,
    pub params: ModelParams,
    pub tag: SectorTag,
    pub closed_form_tag: SectorTag,
    pub boundaries: Boundaries,
    /// |ω| within 10⁻⁹ (relative) of a closed-form boundary.
    pub near_boundary: bool,
}

/// Sector of every grid cell, ratio-major.
pub fn phase_grid(spec: &PhaseSpec) -> Result<Vec<PhaseCell>> {
    spec.validate()?;
    let lin = |(a, b): (f64, f64), n: usize, i: usize| {
        if i == n - 1 {
            b
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    };
    let w0 = spec.kx.abs().sqrt();
    let cells = (0..spec.ratio_steps * spec.omega_steps)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / spec.omega_steps, idx % spec.omega_steps);
            let ratio = lin(spec.ratio, spec.ratio_steps, i);
            let omega_scaled = lin(spec.omega, spec.omega_steps, j);
            let params = ModelParams {
                view: spec.view,
                kx: spec.kx,
                ky: ratio * spec.kx.abs(),
                omega: omega_scaled * w0,
                temperature: 0.0,
            };
            let class = classify_sector(&params);
            let w = params.omega.abs();
            let near_boundary =
                class.on_boundary || class.boundaries.frequencies().iter().any(|&b| (w - b).abs() <= 1e-9 * b.max(1.0));
            PhaseCell {
                ratio,
                omega_scaled,
                params,
                tag: class.tag,
                closed_form_tag: closed_form_tag(&params),
                boundaries: class.boundaries,
                near_boundary,
            }
        })
        .collect();
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_and_uncoupled_never_entangled() {
        for p in [ModelParams::fixed_k(1.0, 1.0, 0.5), ModelParams::fixed_k(1.0, 0.25, 0.0)] {
            let l = limit_temperature(&p).unwrap();
            assert!(l.exact_zero);
            assert_eq!(l.entangled(), Err(Error::NotEntangledAtZero));
        }
    }

    #[test]
    fn outside_a_is_thermal_undefined() {
        let p = ModelParams::fixed_k(-1.0, -0.25, 2.0);
        assert_eq!(limit_temperature(&p), Err(Error::ThermalUndefined(SectorTag::B)));
    }

    #[test]
    fn root_is_a_sign_change() {
        let p = ModelParams::fixed_k(1.0, 0.25, 1.0);
        let l = limit_temperature(&p).unwrap();
        assert!(!l.exact_zero && l.crossing_verified && !l.reentrant);
        assert!(l.residual <= 1e-10);
        let m = diagonalize(&p).unwrap();
        assert!(ppt_minus_at(&m, 0.99 * l.t_e).unwrap() < 0.0);
        assert!(ppt_minus_at(&m, 1.01 * l.t_e).unwrap() > 0.0);
        let r = compute_report(&p.with_temperature(1.5 * l.t_e)).unwrap();
        assert_eq!(r.negativity, 0.0);
        // k = (1, 0.25), ω = 1 is separable at T = 2
        assert!(l.t_e < 2.0);
    }

    #[test]
    fn transcendental_relation_for_vanishing_omega_y() {
        // T_E = 2(1 + 2f'₊)ω²ωx²λ₊ / [(1 + 2f'₊)²λ₊⁴ − ωx⁴]
        for w in [0.2, 0.38, 0.7] {
            let p = ModelParams::fixed_k(1.0, 1e-12, w);
            let l = limit_temperature(&p).unwrap();
            let m = diagonalize(&p).unwrap();
            let lp = m.lambda_plus;
            let fp = crate::covariance::bose_occupation(lp, l.t_e);
            let c = 1.0 + 2.0 * fp;
            let rhs = 2.0 * c * w * w * lp / (c * c * lp.powi(4) - 1.0);
            assert!(((l.t_e - rhs) / rhs).abs() < 1e-6, "ω = {w}: {} vs {rhs}", l.t_e);
        }
    }

    #[test]
    fn asymptote_scaling_and_domain() {
        let p = ModelParams::fixed_k(1.0, 0.25, 50.0);
        let a = te_large_omega_asymptote(&p).unwrap();
        assert!((a - 0.005 / 3f64.ln()).abs() < 1e-15);
        let a2 = te_large_omega_asymptote(&p.with_omega(100.0)).unwrap();
        assert_eq!(a2, a / 2.0);
        assert!(te_large_omega_asymptote(&ModelParams::fixed_k(0.25, 1.0, 50.0)).is_err());
        let l = limit_temperature(&p).unwrap();
        assert!(((l.t_e - a) / a).abs() < 0.02);
        let near = te_large_omega_asymptote(&ModelParams::fixed_k(1.0, 1.0 - 1e-12, 1.0)).unwrap();
        assert!(near < 0.02);
    }

    #[test]
    fn kprime_border_is_finite() {
        let c1 = 0.5f64.sqrt();
        let mut last = 0.0;
        for e in [1e-2, 1e-4, 1e-6] {
            let l = limit_temperature(&ModelParams::fixed_kprime(1.0, 0.5, c1 * (1.0 - e))).unwrap();
            assert!(l.t_e.is_finite() && l.t_e > 0.0);
            last = l.t_e;
        }
        let l = limit_temperature(&ModelParams::fixed_kprime(1.0, 0.5, c1 * (1.0 - 1e-8))).unwrap();
        assert!((l.t_e - last).abs() < 1e-3 * last);
    }

    fn spec(axis: SweepAxis, lo: f64, hi: f64, n: usize, base: ModelParams) -> SweepSpec {
        SweepSpec { axis, lo, hi, samples: n, log: false, base, outputs: Output::ALL.into_iter().collect() }
    }

    #[test]
    fn smoke_sweep() {
        let rows = run_sweep(&spec(SweepAxis::Omega, 0.5, 1.0, 2, ModelParams::fixed_k(1.0, 0.25, 0.0))).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].axis_value, 0.5);
        assert_eq!(rows[1].axis_value, 1.0);
        assert!(rows.iter().all(|r| r.report.is_some() && r.limit_temperature.is_some()));
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let base = ModelParams::fixed_k(1.0, 0.25, 1.0);
        let mut s = spec(SweepAxis::Omega, 1.0, 0.5, 4, base);
        assert!(matches!(run_sweep(&s), Err(Error::SpecInvalid(_))));
        s = spec(SweepAxis::Omega, 0.0, 1.0, 1, base);
        assert!(matches!(run_sweep(&s), Err(Error::SpecInvalid(_))));
        s = spec(SweepAxis::Omega, 0.0, 1.0, 4, base);
        s.outputs.clear();
        assert!(matches!(run_sweep(&s), Err(Error::SpecInvalid(_))));
        s = spec(SweepAxis::Omega, 0.0, 1.0, 4, base);
        s.log = true;
        assert!(matches!(run_sweep(&s), Err(Error::SpecInvalid(_))));
    }

    #[test]
    fn unstable_rows_do_not_abort() {
        let rows = run_sweep(&spec(SweepAxis::Omega, 0.0, 2.0, 41, ModelParams::fixed_kprime(1.0, 0.5, 0.0))).unwrap();
        assert_eq!(rows.len(), 41);
        assert!(rows.iter().any(|r| r.sector == SectorTag::Unstable && r.report.is_none()));
        assert!(rows.iter().any(|r| r.sector == SectorTag::B1 && r.report.is_some()));
    }

    #[test]
    fn log_spacing() {
        let mut s = spec(SweepAxis::Temperature, 1e-6, 1e-2, 5, ModelParams::fixed_k(1.0, 0.25, 1.0));
        s.log = true;
        let v = s.values();
        for (a, b) in v.iter().zip([1e-6, 1e-5, 1e-4, 1e-3, 1e-2]) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_increases_and_saturates_with_field() {
        for ratio in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let base = ModelParams::fixed_k(1.0, ratio, 0.0);
            let mut s = spec(SweepAxis::Omega, 0.01, 50.0, 200, base);
            s.outputs = [Output::Entropy].into_iter().collect();
            let rows = run_sweep(&s).unwrap();
            let e: Vec<f64> = rows.iter().map(|r| r.report.unwrap().entropy.0).collect();
            assert!(e.windows(2).all(|w| w[1] > w[0]));
            let limit = crate::measures::bosonic_entropy(0.5 * ((1.0 + ratio.sqrt()) / (2.0 * ratio.powf(0.25)) - 1.0))
                .unwrap();
            assert!(*e.last().unwrap() < limit);
            assert!(limit - e.last().unwrap() < 1e-2 * limit);
        }
    }

    #[test]
    fn negativity_window_at_fixed_temperature() {
        let base = ModelParams::fixed_k(1.0, 0.04, 0.0).with_temperature(0.1);
        let mut s = spec(SweepAxis::Omega, 0.0, 4.0, 1000, base);
        s.outputs = [Output::Negativity].into_iter().collect();
        let rows = run_sweep(&s).unwrap();
        let on: Vec<bool> = rows.iter().map(|r| r.report.unwrap().negativity > 0.0).collect();
        let edges = on.windows(2).filter(|w| w[0] != w[1]).count();
        assert!(on.iter().any(|&b| b));
        assert!(!on[0] && !on[on.len() - 1]);
        assert_eq!(edges, 2);
    }

    #[test]
    fn phase_smoke() {
        let spec = PhaseSpec {
            view: View::FixedK,
            kx: 1.0,
            ratio: (0.25, 0.5),
            ratio_steps: 2,
            omega: (0.0, 1.0),
            omega_steps: 2,
        };
        let cells = phase_grid(&spec).unwrap();
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|c| c.tag == SectorTag::A));
    }
}
