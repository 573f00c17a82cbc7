//! Truncated Fock-space diagonalization.
//!
//! Each mode is expanded in the number basis of a unit-frequency oscillator,
//! b_μ = (Q_μ + iP_μ)/√2, with nμ ≤ n_max. Writing c = −i b_y makes every
//! matrix element real:
//!
//! ```text
//! H = Σμ gμ⁺(nμ + ½) + ½g_x⁻(b_x² + b_x†²) − ½g_y⁻(c² + c†²) − ω(b_x†c + c†b_x)
//! L_z = b_x†c + c†b_x,        gμ± = (k'μ ± 1)/2
//! ```
//!
//! H and every thermal state commute with the parity of n_x + n_y, and so
//! does the partial transpose on y; all matrices are stored as the two
//! parity blocks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{classify_sector, ModelParams, SectorTag, View};
use crate::report::compute_report;
use crate::spectral::mode_frequencies;

/// Largest supported cutoff per mode.
pub const MAX_CUTOFF: usize = 60;
/// Agreement required between the two convergence cutoffs.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    /// Occupation cutoff per mode; the basis has (n_max + 1)² states.
    pub n_max: usize,
    /// Two increasing cutoffs whose results must agree.
    pub convergence: Option<(usize, usize)>,
}

impl FockConfig {
    pub fn new(n_max: usize) -> Self {
        Self { n_max, convergence: None }
    }

    pub fn with_convergence(n_max: usize, low: usize, high: usize) -> Self {
        Self { n_max, convergence: Some((low, high)) }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |n: usize| (2..=MAX_CUTOFF).contains(&n);
        if !ok(self.n_max) {
            return Err(Error::InvalidParams(format!("cutoff {} outside [2, {MAX_CUTOFF}]", self.n_max)));
        }
        if let Some((lo, hi)) = self.convergence {
            if !(ok(lo) && ok(hi) && lo < hi) {
                return Err(Error::InvalidParams(format!("convergence cutoffs ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

impl Default for FockConfig {
    fn default() -> Self {
        Self::new(40)
    }
}

/// Number states |n_x, n_y⟩ split by the parity of n_x + n_y.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    pub n_max: usize,
    states: [Vec<(usize, usize)>; 2],
    /// Full index n_x(n_max + 1) + n_y → position within its block.
    local: Vec<usize>,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Self {
        let dim = n_max + 1;
        let mut states = [Vec::new(), Vec::new()];
        let mut local = vec![0; dim * dim];
        for nx in 0..dim {
            for ny in 0..dim {
                let p = (nx + ny) % 2;
                local[nx * dim + ny] = states[p].len();
                states[p].push((nx, ny));
            }
        }
        Self { n_max, states, local }
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    pub fn block(&self, parity: usize) -> &[(usize, usize)] {
        &self.states[parity]
    }

    pub fn full_index(&self, nx: usize, ny: usize) -> usize {
        nx * (self.n_max + 1) + ny
    }

    /// (parity, position) of |n_x, n_y⟩.
    pub fn locate(&self, nx: usize, ny: usize) -> (usize, usize) {
        ((nx + ny) % 2, self.local[self.full_index(nx, ny)])
    }

    /// Assemble a full matrix from parity blocks.
    pub fn dense(&self, blocks: &[DMatrix<f64>; 2]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (p, block) in blocks.iter().enumerate() {
            for (i, &(ax, ay)) in self.states[p].iter().enumerate() {
                for (j, &(bx, by)) in self.states[p].iter().enumerate() {
                    m[(self.full_index(ax, ay), self.full_index(bx, by))] = block[(i, j)];
                }
            }
        }
        m
    }
}

/// Parity blocks of a real symmetric operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub basis: FockBasis,
    pub blocks: [DMatrix<f64>; 2],
}

impl FockOperator {
    pub fn dense(&self) -> DMatrix<f64> {
        self.basis.dense(&self.blocks)
    }

    /// Tr(ρ A) for a state on the same basis.
    pub fn expectation(&self, state: &FockState) -> f64 {
        (0..2).map(|p| self.blocks[p].component_mul(&state.blocks[p]).sum()).sum()
    }
}

fn build_operator(basis: &FockBasis, entry: impl Fn(usize, usize, &mut dyn FnMut(usize, usize, f64))) -> FockOperator {
    let blocks = [0, 1].map(|p| {
        let n = basis.block(p).len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &(nx, ny)) in basis.block(p).iter().enumerate() {
            entry(nx, ny, &mut |mx, my, v| {
                let (q, j) = basis.locate(mx, my);
                debug_assert_eq!(q, p);
                m[(j, i)] += v;
            });
        }
        m
    });
    FockOperator { basis: basis.clone(), blocks }
}

/// Matrix of H in the truncated number basis.
pub fn build_hamiltonian_fock(params: &ModelParams, n_max: usize) -> FockOperator {
    let basis = FockBasis::new(n_max);
    let (kpx, kpy) = params.kprime();
    let (gpx, gmx) = ((kpx + 1.0) / 2.0, (kpx - 1.0) / 2.0);
    let (gpy, gmy) = ((kpy + 1.0) / 2.0, (kpy - 1.0) / 2.0);
    let w = params.omega;
    let sq = |n: usize| (n as f64).sqrt();
    build_operator(&basis, |nx, ny, push| {
        push(nx, ny, gpx * (nx as f64 + 0.5) + gpy * (ny as f64 + 0.5));
        if nx + 2 <= n_max {
            let v = 0.5 * gmx * sq(nx + 1) * sq(nx + 2);
            push(nx + 2, ny, v);
        }
        if nx >= 2 {
            push(nx - 2, ny, 0.5 * gmx * sq(nx) * sq(nx - 1));
        }
        if ny + 2 <= n_max {
            push(nx, ny + 2, -0.5 * gmy * sq(ny + 1) * sq(ny + 2));
        }
        if ny >= 2 {
            push(nx, ny - 2, -0.5 * gmy * sq(ny) * sq(ny - 1));
        }
        if nx < n_max && ny >= 1 {
            push(nx + 1, ny - 1, -w * sq(nx + 1) * sq(ny));
        }
        if ny < n_max && nx >= 1 {
            push(nx - 1, ny + 1, -w * sq(nx) * sq(ny + 1));
        }
    })
}

/// L_z in the truncated number basis.
pub fn angular_momentum_fock(n_max: usize) -> FockOperator {
    let basis = FockBasis::new(n_max);
    let sq = |n: usize| (n as f64).sqrt();
    build_operator(&basis, |nx, ny, push| {
        if nx < n_max && ny >= 1 {
            push(nx + 1, ny - 1, sq(nx + 1) * sq(ny));
        }
        if ny < n_max && nx >= 1 {
            push(nx - 1, ny + 1, sq(nx) * sq(ny + 1));
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateLabel {
    Ground,
    Thermal(f64),
}

/// Density matrix as parity blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub basis: FockBasis,
    pub blocks: [DMatrix<f64>; 2],
    pub label: StateLabel,
    /// Lowest eigenvalue of the truncated H.
    pub ground_energy: f64,
    /// Tr(ρH)
    pub energy: f64,
}

impl FockState {
    pub fn dense(&self) -> DMatrix<f64> {
        self.basis.dense(&self.blocks)
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    pub fn purity(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    fn element(&self, (ax, ay): (usize, usize), (bx, by): (usize, usize)) -> f64 {
        let (p, i) = self.basis.locate(ax, ay);
        let (q, j) = self.basis.locate(bx, by);
        if p == q {
            self.blocks[p][(i, j)]
        } else {
            0.0
        }
    }

    /// Reduced density matrix of one mode.
    pub fn reduced(&self, keep_x: bool) -> DMatrix<f64> {
        let dim = self.basis.n_max + 1;
        DMatrix::from_fn(dim, dim, |n, m| {
            (0..dim).map(|k| if keep_x { self.element((n, k), (m, k)) } else { self.element((k, n), (k, m)) }).sum()
        })
    }

    /// Eigenvalues of ρ^{T_y}, where |n_x n_y⟩⟨m_x m_y| → |n_x m_y⟩⟨m_x n_y|.
    pub fn partial_transpose_eigenvalues(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.basis.dim());
        for p in 0..2 {
            let states = self.basis.block(p);
            let n = states.len();
            let pt = DMatrix::from_fn(n, n, |i, j| {
                let (nx, my) = states[i];
                let (mx, ny) = states[j];
                self.element((nx, ny), (mx, my))
            });
            out.extend(pt.symmetric_eigenvalues().iter());
        }
        out
    }
}

fn entropy_of(rho: DMatrix<f64>) -> f64 {
    rho.symmetric_eigenvalues().iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

struct Spectrum {
    basis: FockBasis,
    eigen: [SymmetricEigen<f64, nalgebra::Dyn>; 2],
}

impl Spectrum {
    fn new(params: &ModelParams, n_max: usize) -> Self {
        let h = build_hamiltonian_fock(params, n_max);
        let [h0, h1] = h.blocks;
        Self { basis: h.basis, eigen: [SymmetricEigen::new(h0), SymmetricEigen::new(h1)] }
    }

    fn ground(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::INFINITY);
        for p in 0..2 {
            for (k, &e) in self.eigen[p].eigenvalues.iter().enumerate() {
                if e < best.2 {
                    best = (p, k, e);
                }
            }
        }
        best
    }

    fn ground_state(&self) -> FockState {
        let (p, k, e0) = self.ground();
        let v: DVector<f64> = self.eigen[p].eigenvectors.column(k).into_owned();
        let mut blocks = [0, 1].map(|q| {
            let n = self.basis.block(q).len();
            DMatrix::zeros(n, n)
        });
        blocks[p] = &v * v.transpose();
        FockState { basis: self.basis.clone(), blocks, label: StateLabel::Ground, ground_energy: e0, energy: e0 }
    }

    fn thermal_state(&self, t: f64) -> FockState {
        let (_, _, e0) = self.ground();
        let mut z = 0.0;
        let mut energy = 0.0;
        let weights = [0, 1].map(|p| {
            let w: Vec<f64> = self.eigen[p].eigenvalues.iter().map(|&e| (-(e - e0) / t).exp()).collect();
            for (&wk, &e) in w.iter().zip(self.eigen[p].eigenvalues.iter()) {
                z += wk;
                energy += wk * e;
            }
            w
        });
        let blocks = [0, 1].map(|p| {
            let vecs = &self.eigen[p].eigenvectors;
            let keep: Vec<usize> = (0..weights[p].len()).filter(|&k| weights[p][k] > 1e-18 * z).collect();
            let n = vecs.nrows();
            let mut scaled = DMatrix::zeros(n, keep.len());
            let mut plain = DMatrix::zeros(n, keep.len());
            for (c, &k) in keep.iter().enumerate() {
                plain.set_column(c, &vecs.column(k));
                scaled.set_column(c, &(vecs.column(k) * (weights[p][k] / z)));
            }
            scaled * plain.transpose()
        });
        FockState {
            basis: self.basis.clone(),
            blocks,
            label: StateLabel::Thermal(t),
            ground_energy: e0,
            energy: energy / z,
        }
    }
}

fn require_sector_a(params: &ModelParams) -> Result<()> {
    match classify_sector(params).tag {
        SectorTag::A => Ok(()),
        tag => Err(Error::OutOfSector(tag)),
    }
}

fn check_energy(params: &ModelParams, t: Option<f64>, config: &FockConfig) -> Result<()> {
    if let Some((lo, hi)) = config.convergence {
        let e = |n: usize| {
            let s = Spectrum::new(params, n);
            match t {
                Some(t) if t > 0.0 => s.thermal_state(t).energy,
                _ => s.ground().2,
            }
        };
        let diff = (e(lo) - e(hi)).abs();
        if diff > CONVERGENCE_TOL {
            return Err(Error::ConvergenceFailure { observable: "energy", low: lo, high: hi, diff });
        }
    }
    Ok(())
}

/// Projector on the lowest eigenvector of the truncated H.
pub fn ground_state_fock(params: &ModelParams, config: &FockConfig) -> Result<FockState> {
    config.validate()?;
    require_sector_a(params)?;
    check_energy(params, None, config)?;
    Ok(Spectrum::new(params, config.n_max).ground_state())
}

/// exp(−H/T)/Z of the truncated H; T = 0 gives the ground state.
pub fn thermal_state_fock(params: &ModelParams, t: f64, config: &FockConfig) -> Result<FockState> {
    config.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!("temperature {t}")));
    }
    require_sector_a(params)?;
    check_energy(params, Some(t), config)?;
    let s = Spectrum::new(params, config.n_max);
    Ok(if t == 0.0 { s.ground_state() } else { s.thermal_state(t) })
}

/// Observables extracted from a Fock state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockMeasures {
    pub s_x: f64,
    pub s_y: f64,
    /// Sum of |negative eigenvalues| of ρ^{T_y}, i.e. ½(‖ρ^{T_y}‖₁ − 1).
    pub negativity: f64,
    pub mean_lz: f64,
}

pub fn entropy_negativity_fock(state: &FockState) -> FockMeasures {
    let s_x = entropy_of(state.reduced(true));
    let s_y = entropy_of(state.reduced(false));
    let eig = state.partial_transpose_eigenvalues();
    let norm1: f64 = eig.iter().map(|e| e.abs()).sum();
    let negativity = 0.5 * (norm1 - state.trace());
    let mean_lz = angular_momentum_fock(state.basis.n_max).expectation(state);
    FockMeasures { s_x, s_y, negativity, mean_lz }
}

/// Gaussian and Fock values of the compared observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub s_x: f64,
    pub s_y: f64,
    pub negativity: f64,
    pub mean_lz: f64,
    pub ground_energy: f64,
}

impl Observables {
    pub const NAMES: [&'static str; 5] = ["S_x", "S_y", "N", "Lz", "E0"];

    pub fn values(&self) -> [f64; 5] {
        [self.s_x, self.s_y, self.negativity, self.mean_lz, self.ground_energy]
    }
}

pub fn gaussian_observables(params: &ModelParams) -> Result<Observables> {
    let r = compute_report(params)?;
    let (lp, lm) = mode_frequencies(params)?;
    Ok(Observables {
        s_x: r.entropy.0,
        s_y: r.entropy.1,
        negativity: r.negativity,
        mean_lz: r.mean_lz,
        ground_energy: 0.5 * (lp + lm),
    })
}

pub fn fock_observables(params: &ModelParams, n_max: usize) -> Result<Observables> {
    let state = thermal_state_fock(params, params.temperature, &FockConfig::new(n_max))?;
    let m = entropy_negativity_fock(&state);
    Ok(Observables {
        s_x: m.s_x,
        s_y: m.s_y,
        negativity: m.negativity,
        mean_lz: m.mean_lz,
        ground_energy: state.ground_energy,
    })
}

/// Fock observables at `config.n_max`, checked against the convergence pair
/// when one is set.
pub fn converged_fock_observables(params: &ModelParams, config: &FockConfig) -> Result<Observables> {
    config.validate()?;
    let main = fock_observables(params, config.n_max)?;
    if let Some((lo, hi)) = config.convergence {
        let a = if lo == config.n_max { main } else { fock_observables(params, lo)? };
        let b = if hi == config.n_max { main } else { fock_observables(params, hi)? };
        for (k, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
            let diff = (x - y).abs();
            if diff > CONVERGENCE_TOL {
                return Err(Error::ConvergenceFailure { observable: Observables::NAMES[k], low: lo, high: hi, diff });
            }
        }
    }
    Ok(main)
}

/// Reference points for the Gaussian/Fock comparison: sector A, λ₋ ≥ 0.05,
/// T ≤ 1, all converged at n_max = 40.
pub fn standard_panel() -> Vec<ModelParams> {
    let mut out = Vec::new();
    for &(kx, ky) in &[(1.0, 0.25), (1.0, 0.5), (0.6, 1.4), (1.2, 0.7)] {
        for &w in &[0.3, 0.7, 1.0] {
            for &t in &[0.0, 0.15] {
                out.push(ModelParams::fixed_k(kx, ky, w).with_temperature(t));
            }
        }
    }
    for &(kpx, kpy, w, t) in &[(2.0, 1.0, 0.5, 0.0), (2.0, 1.0, 0.5, 0.2), (1.5, 1.2, 0.9, 0.1), (3.0, 1.0, 0.2, 0.3)] {
        out.push(ModelParams::new(View::FixedKPrime, kpx, kpy, w, t).expect("valid panel point"));
    }
    out.push(ModelParams::fixed_k(1.0, 1.0, 0.5));
    out.push(ModelParams::fixed_k(1.0, 0.25, 0.0).with_temperature(0.3));
    out
}

/// Larger panel with higher temperatures and stronger anisotropy.
pub fn extended_panel() -> Vec<ModelParams> {
    let mut out = standard_panel();
    for &(kx, ky) in &[(1.0, 0.1), (2.0, 0.3), (0.8, 0.8)] {
        for &w in &[0.2, 0.5, 1.5] {
            for &t in &[0.0, 0.1, 0.25] {
                out.push(ModelParams::fixed_k(kx, ky, w).with_temperature(t));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelComparison {
    pub params: ModelParams,
    pub gaussian: Observables,
    pub fock: std::result::Result<Observables, Error>,
    /// Largest |gaussian − fock| over the compared observables.
    pub max_diff: f64,
    pub pass: bool,
}

/// Compare every panel point; points run in parallel, results keep input
/// order.
pub fn compare_panel(points: &[ModelParams], config: &FockConfig, tol: f64) -> Result<Vec<PanelComparison>> {
    config.validate()?;
    points
        .par_iter()
        .map(|p| {
            let gaussian = gaussian_observables(p)?;
            let fock = converged_fock_observables(p, config);
            let max_diff = match &fock {
                Ok(f) => gaussian.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
                Err(_) => f64::INFINITY,
            };
            Ok(PanelComparison { params: *p, gaussian, fock, max_diff, pass: max_diff <= tol })
        })
        .collect()
}
