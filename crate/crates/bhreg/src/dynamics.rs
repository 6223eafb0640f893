//! Time evolution under the Bose-Hubbard Hamiltonian.
//!
//! Two exact propagation paths: dense eigendecomposition below
//! [`EvolveOptions::dense_threshold`] (the oracle path) and Krylov
//! exponential propagation above it. The two are algorithmically independent
//! and cross-checked in the tests. A third propagator works in the restricted
//! basis of the target state plus all single particle-hole pairs
//! (dimension `N(N-1) + 1`), which is the oracle layer for the closed-form
//! fidelities.

use crate::fock::{apply_hop, FockBasis, FockError, OccupationState};
use crate::hamiltonian::{Boundary, ModelParams, SparseHamiltonian};
use crate::linalg::{self, KrylovError, KrylovOptions};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("time grid must start at 0 and increase strictly")]
    BadTimeGrid,
    #[error("state vector norm drifted to {norm} at t = {t} (tolerance 1e-9)")]
    NormDrift { norm: f64, t: f64 },
    #[error("state basis is {state_dim}-dimensional, operator expects {op_dim}")]
    DimensionMismatch { state_dim: usize, op_dim: usize },
    #[error("projector built for {projector_sites} sites, state has {state_sites}")]
    ProjectorMismatch { projector_sites: u32, state_sites: u32 },
    #[error("restricted propagation needs commensurate filling, got N = {n}, M = {m}")]
    NotCommensurate { n: u32, m: u32 },
    #[error(transparent)]
    Krylov(#[from] KrylovError),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Normalized many-body state over a shared Fock basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// A single Fock state.
    pub fn fock_state(basis: Arc<FockBasis>, state: &OccupationState) -> Result<Self, FockError> {
        let idx = basis.rank(state)?;
        let mut amplitudes = vec![Complex64::default(); basis.size()];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    /// The unit-filled state `|T>` (requires N = M).
    pub fn unit_filled(basis: Arc<FockBasis>) -> Result<Self, FockError> {
        let t = OccupationState::unit_filled(basis.sites());
        Self::fock_state(basis, &t)
    }

    /// First-order perturbative ground state: `|T>` plus the adjacent
    /// particle-hole pairs with amplitude `sqrt(2) J/U` each, normalized.
    /// For a periodic homogeneous lattice this is exactly
    /// `alpha (|T> + 2 (J/U) sqrt(N) |S_1>)`; for open boundaries the pair
    /// sum simply runs over the bonds that exist.
    pub fn perturbative_ground(
        basis: Arc<FockBasis>,
        params: &ModelParams,
    ) -> Result<Self, DynamicsError> {
        let m = basis.sites();
        if basis.particles() != m {
            return Err(DynamicsError::NotCommensurate { n: basis.particles(), m });
        }
        let t = OccupationState::unit_filled(m);
        let mut amplitudes = vec![Complex64::default(); basis.size()];
        amplitudes[basis.rank(&t)?] = Complex64::new(1.0, 0.0);
        let w = 2f64.sqrt() * params.j / params.u;
        for (a, b) in params.bonds() {
            for (dst, src) in [(a, b), (b, a)] {
                if let Some((pair, _)) = apply_hop(&t, dst, src) {
                    amplitudes[basis.rank(&pair)?] += Complex64::new(w, 0.0);
                }
            }
        }
        let mut psi = Self { basis, amplitudes };
        psi.normalize();
        Ok(psi)
    }

    pub fn from_amplitudes(
        basis: Arc<FockBasis>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, DynamicsError> {
        if amplitudes.len() != basis.size() {
            return Err(DynamicsError::DimensionMismatch {
                state_dim: amplitudes.len(),
                op_dim: basis.size(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|z| *z /= n);
        }
    }

    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Energy expectation `<psi|H|psi>`.
    pub fn energy(&self, h: &SparseHamiltonian) -> f64 {
        let mut hx = vec![Complex64::default(); self.amplitudes.len()];
        h.apply(&self.amplitudes, &mut hx);
        self.amplitudes.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Diagonal projector onto states with exactly one atom on every register
/// site; idempotent by construction.
#[derive(Debug, Clone)]
pub struct RegisterProjector {
    sites: u32,
    mask: Vec<bool>,
}

impl RegisterProjector {
    pub fn new(basis: &FockBasis, params: &ModelParams) -> Self {
        let range = params.register_sites();
        let mask = (0..basis.size())
            .map(|i| {
                let s = basis.unrank(i).expect("index in range");
                range.clone().all(|j| s.occupations()[j] == 1)
            })
            .collect();
        Self { sites: basis.sites(), mask }
    }

    pub fn accepts_index(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn accepted_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Zero out every non-register amplitude (in place).
    pub fn apply(&self, psi: &mut StateVector) {
        for (amp, keep) in psi.amplitudes.iter_mut().zip(&self.mask) {
            if !keep {
                *amp = Complex64::default();
            }
        }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// `Tr[rho P_R]` for a pure state: the summed probability of the accepted
/// Fock states. No partial trace is needed because the projector is diagonal.
pub fn register_fidelity(psi: &StateVector, proj: &RegisterProjector) -> Result<f64, DynamicsError> {
    if proj.sites != psi.basis.sites() {
        return Err(DynamicsError::ProjectorMismatch {
            projector_sites: proj.sites,
            state_sites: psi.basis.sites(),
        });
    }
    Ok(psi
        .amplitudes
        .iter()
        .zip(&proj.mask)
        .filter(|(_, &keep)| keep)
        .map(|(a, _)| a.norm_sqr())
        .sum())
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Below this dimension the dense eigendecomposition path is used.
    pub dense_threshold: usize,
    pub krylov: KrylovOptions,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { dense_threshold: 2000, krylov: KrylovOptions::default() }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), DynamicsError> {
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(DynamicsError::BadTimeGrid);
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DynamicsError::BadTimeGrid);
    }
    Ok(())
}

/// Propagate `psi0` through `t_grid` (which must start at 0), dispatching to
/// the dense or Krylov path by dimension.
pub fn evolve(
    h: &SparseHamiltonian,
    psi0: &StateVector,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<StateVector>, DynamicsError> {
    if h.dim() <= opts.dense_threshold {
        evolve_dense(h, psi0, t_grid)
    } else {
        evolve_krylov(h, psi0, t_grid, &opts.krylov)
    }
}

/// Oracle path: full dense eigendecomposition, then exact phases per output
/// time.
pub fn evolve_dense(
    h: &SparseHamiltonian,
    psi0: &StateVector,
    t_grid: &[f64],
) -> Result<Vec<StateVector>, DynamicsError> {
    check_grid(t_grid)?;
    let dim = h.dim();
    if psi0.amplitudes.len() != dim {
        return Err(DynamicsError::DimensionMismatch { state_dim: psi0.amplitudes.len(), op_dim: dim });
    }
    let eig = h.to_dense().symmetric_eigen();
    // coefficients in the eigenbasis (eigenvectors are real)
    let mut coeff = vec![Complex64::default(); dim];
    for k in 0..dim {
        let mut acc = Complex64::default();
        for i in 0..dim {
            acc += psi0.amplitudes[i] * eig.eigenvectors[(i, k)];
        }
        coeff[k] = acc;
    }
    // grid points are independent; parallelize over them
    use rayon::prelude::*;
    let out: Vec<StateVector> = t_grid
        .par_iter()
        .map(|&t| {
            let mut amps = vec![Complex64::default(); dim];
            for k in 0..dim {
                let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
                let ck = coeff[k] * phase;
                if ck.norm_sqr() < 1e-60 {
                    continue;
                }
                for i in 0..dim {
                    amps[i] += eig.eigenvectors[(i, k)] * ck;
                }
            }
            StateVector { basis: psi0.basis.clone(), amplitudes: amps }
        })
        .collect();
    for (psi, &t) in out.iter().zip(t_grid) {
        check_norm(psi, t)?;
    }
    Ok(out)
}

fn check_norm(psi: &StateVector, t: f64) -> Result<(), DynamicsError> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(DynamicsError::NormDrift { norm, t });
    }
    Ok(())
}

/// Fast path: adaptive Krylov exponential propagation between grid points.
pub fn evolve_krylov(
    h: &SparseHamiltonian,
    psi0: &StateVector,
    t_grid: &[f64],
    opts: &KrylovOptions,
) -> Result<Vec<StateVector>, DynamicsError> {
    check_grid(t_grid)?;
    if psi0.amplitudes.len() != h.dim() {
        return Err(DynamicsError::DimensionMismatch {
            state_dim: psi0.amplitudes.len(),
            op_dim: h.dim(),
        });
    }
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(psi0.clone());
    let mut current = psi0.clone();
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        linalg::propagate(h, &mut current.amplitudes, dt, opts)?;
        check_norm(&current, w[1])?;
        out.push(current.clone());
    }
    Ok(out)
}

/// Fidelity trace: times and the corresponding target-state population.
#[derive(Debug, Clone)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
}

/// The restricted basis `{|T>} + {a_i^dag a_j |T> / sqrt(2)}` of the target
/// state and all single particle-hole pairs (dimension `N(N-1) + 1`).
///
/// Matrix elements follow from applying the hopping term inside the
/// subspace: `-sqrt(2) J` between `|T>` and adjacent pairs, `-2J` for moving
/// the doubly occupied site, `-J` for moving the hole, and diagonal
/// `U + eps(i) - eps(j)` for a pair with the double occupancy at `i` and the
/// hole at `j` (energies measured from `|T>`). Anything leaving the subspace
/// (triple occupancy, second pair) is dropped.
#[derive(Debug, Clone)]
pub struct RestrictedBasis {
    n: usize,
    /// Pair states as (doubly occupied site, hole site); `|T>` is index 0.
    pairs: Vec<(usize, usize)>,
    hamiltonian: DMatrix<f64>,
}

impl RestrictedBasis {
    pub fn new(params: &ModelParams) -> Result<Self, DynamicsError> {
        if params.n != params.m {
            return Err(DynamicsError::NotCommensurate { n: params.n, m: params.m });
        }
        let n = params.n as usize;
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        let index = |i: usize, j: usize| -> usize { 1 + i * (n - 1) + if j < i { j } else { j - 1 } };
        let dim = 1 + pairs.len();
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            h[(k + 1, k + 1)] = params.u + params.site_energy(i) - params.site_energy(j);
        }
        let bonds = params.bonds();
        for &(a, b) in &bonds {
            for (dst, src) in [(a, b), (b, a)] {
                // |T> -> pair (dst, src): amplitude sqrt(2)
                let k = index(dst, src);
                h[(k, 0)] += -params.j * 2f64.sqrt();
                h[(0, k)] += -params.j * 2f64.sqrt();
            }
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            for &(a, b) in &bonds {
                for (dst, src) in [(a, b), (b, a)] {
                    // particle hop src -> dst applied to pair (i, j)
                    if src == i && dst != j {
                        // doublon moves; amplitude sqrt(2)*sqrt(2) = 2
                        h[(index(dst, j), k + 1)] += -params.j * 2.0;
                    } else if dst == j && src != i {
                        // hole moves to src; amplitude 1
                        h[(index(i, src), k + 1)] += -params.j;
                    }
                    // src == i && dst == j is the recombination into |T>,
                    // already counted; everything else leaves the subspace
                }
            }
        }
        Ok(Self { n, pairs, hamiltonian: h })
    }

    pub fn dim(&self) -> usize {
        1 + self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    /// Ring separation of pair `k` (minimum of the two walk directions).
    pub fn separation(&self, k: usize) -> usize {
        let (i, j) = self.pairs[k];
        let d = i.abs_diff(j);
        d.min(self.n - d)
    }

    /// Amplitudes over `{|T>} + pairs` for each grid time, starting from
    /// `|T>`.
    pub fn propagate_from_target(&self, t_grid: &[f64]) -> Result<Vec<DVector<Complex64>>, DynamicsError> {
        check_grid(t_grid)?;
        let dim = self.dim();
        let eig = self.hamiltonian.clone().symmetric_eigen();
        // initial state e_0
        let coeff: Vec<f64> = (0..dim).map(|k| eig.eigenvectors[(0, k)]).collect();
        let mut out = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let mut amps = DVector::from_element(dim, Complex64::default());
            for k in 0..dim {
                let phase = Complex64::from_polar(coeff[k], -eig.eigenvalues[k] * t);
                for i in 0..dim {
                    amps[i] += eig.eigenvectors[(i, k)] * phase;
                }
            }
            out.push(amps);
        }
        Ok(out)
    }
}

/// Restricted-basis fidelity trace `|<T|psi(t)>|^2` from a unit-filled start.
pub fn evolve_restricted(params: &ModelParams, t_grid: &[f64]) -> Result<FidelityTrace, DynamicsError> {
    let rb = RestrictedBasis::new(params)?;
    let amps = rb.propagate_from_target(t_grid)?;
    Ok(FidelityTrace {
        times: t_grid.to_vec(),
        fidelity: amps.iter().map(|a| a[0].norm_sqr()).collect(),
    })
}
