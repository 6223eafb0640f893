//! Bose-Hubbard Hamiltonian assembly and lattice-physics helper formulas.
//!
//! The Hamiltonian is `H = -J sum_<i,j> a_i^dag a_j + sum_j [eps(j) n_j +
//! (U/2) n_j (n_j - 1)]` on a one-dimensional chain, with `eps(j) = delta *
//! x_j^2` measured from the trap center (site coordinate `x_j = j - (M-1)/2`).
//! Assembly is row-parallel and the result is an immutable CSR matrix whose
//! matvec is safe for concurrent use.

use crate::fock::{apply_hop, FockBasis, FockError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Lattice boundary condition for the tunneling term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("tunneling energy J must be positive, got {0}")]
    NonPositiveJ(f64),
    #[error("interaction energy U must be positive, got {0}")]
    NonPositiveU(f64),
    #[error("trap energy scale delta must be non-negative, got {0}")]
    NegativeDelta(f64),
    #[error("tunneling dimensionality d must be 1, 2 or 3, got {0}")]
    BadDimensionality(u32),
    #[error("register size K must be odd, got {0}")]
    EvenRegister(u32),
    #[error("register size K = {k} exceeds site count M = {m}")]
    RegisterTooLarge { k: u32, m: u32 },
    #[error("need at least one site")]
    NoSites,
}

/// Lattice, trap and interaction parameters. Energies in units of `J` unless
/// the caller chooses otherwise; `hbar = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Tunneling energy.
    pub j: f64,
    /// On-site interaction energy.
    pub u: f64,
    /// Trap energy scale; `0` is the homogeneous lattice.
    pub delta: f64,
    /// Tunneling dimensionality (closed-form helpers accept 1-3; exact
    /// propagation supports 1 only).
    pub d: u32,
    /// Sites per dimension.
    pub m: u32,
    /// Particle count.
    pub n: u32,
    /// Register size (odd, `K <= M`); the register is the central `K` sites.
    pub k: u32,
    pub boundary: Boundary,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        j: f64,
        u: f64,
        delta: f64,
        d: u32,
        m: u32,
        n: u32,
        k: u32,
        boundary: Boundary,
    ) -> Result<Self, ModelError> {
        if !(j > 0.0) {
            return Err(ModelError::NonPositiveJ(j));
        }
        if !(u > 0.0) {
            return Err(ModelError::NonPositiveU(u));
        }
        if !(delta >= 0.0) {
            return Err(ModelError::NegativeDelta(delta));
        }
        if !(1..=3).contains(&d) {
            return Err(ModelError::BadDimensionality(d));
        }
        if m == 0 {
            return Err(ModelError::NoSites);
        }
        if k % 2 == 0 {
            return Err(ModelError::EvenRegister(k));
        }
        if k > m {
            return Err(ModelError::RegisterTooLarge { k, m });
        }
        Ok(Self { j, u, delta, d, m, n, k, boundary })
    }

    /// Site coordinate with the trap minimum at zero: `x_j = j - (M-1)/2`.
    pub fn site_coordinate(&self, site: usize) -> f64 {
        site as f64 - (self.m as f64 - 1.0) / 2.0
    }

    /// Trap energy offset `eps(j) = delta * x_j^2`.
    pub fn site_energy(&self, site: usize) -> f64 {
        let x = self.site_coordinate(site);
        self.delta * x * x
    }

    /// Indices of the central `K` register sites.
    pub fn register_sites(&self) -> std::ops::Range<usize> {
        let lo = (self.m - self.k) as usize / 2;
        lo..lo + self.k as usize
    }

    pub fn is_homogeneous(&self) -> bool {
        self.delta == 0.0
    }

    /// Nearest-neighbor bonds as ordered site pairs `(a, a+1)`, with the
    /// wraparound bond appended for periodic boundaries.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let m = self.m as usize;
        let mut bonds: Vec<(usize, usize)> = (0..m - 1).map(|a| (a, a + 1)).collect();
        if self.boundary == Boundary::Periodic && m > 1 {
            bonds.push((m - 1, 0));
        }
        bonds
    }
}

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("exact Hamiltonian construction supports d = 1 only, got d = {0}")]
    UnsupportedDimensionality(u32),
    #[error("basis is for {basis_n} particles on {basis_m} sites, params expect {n} on {m}")]
    BasisMismatch { basis_n: u32, basis_m: u32, n: u32, m: u32 },
    #[error(
        "estimated storage {estimate} bytes exceeds the memory budget of {budget} bytes \
         (dimension {dim})"
    )]
    MemoryBudgetExceeded { estimate: u64, budget: u64, dim: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Default assembly memory budget: 4 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

/// Hermitian sparse Hamiltonian in CSR form on the fixed-N Fock basis.
///
/// Immutable after assembly; `apply` may be invoked concurrently on distinct
/// vectors.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y = H x` for complex vectors. Row-parallel; the per-row accumulation
    /// order is fixed, so results do not depend on the thread count.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(row, out)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *out = acc;
        });
    }

    /// `y = H x` for real vectors.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(row, out)| {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *out = acc;
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                if self.cols[k] as usize == row {
                    d[row] += self.vals[k];
                }
            }
        }
        d
    }

    /// Infinity norm (max absolute row sum); equals the 1-norm by symmetry.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|row| {
                (self.row_ptr[row]..self.row_ptr[row + 1]).map(|k| self.vals[k].abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for row in 0..self.dim {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                a[(row, self.cols[k] as usize)] += self.vals[k];
            }
        }
        a
    }
}

/// Assemble the Bose-Hubbard Hamiltonian for `params` on `basis` with the
/// default memory budget.
pub fn build_hamiltonian(
    params: &ModelParams,
    basis: &FockBasis,
) -> Result<SparseHamiltonian, HamiltonianError> {
    build_hamiltonian_with_budget(params, basis, DEFAULT_MEMORY_BUDGET)
}

/// Assemble with an explicit memory budget in bytes.
pub fn build_hamiltonian_with_budget(
    params: &ModelParams,
    basis: &FockBasis,
    budget: u64,
) -> Result<SparseHamiltonian, HamiltonianError> {
    if params.d != 1 {
        return Err(HamiltonianError::UnsupportedDimensionality(params.d));
    }
    if basis.particles() != params.n || basis.sites() != params.m {
        return Err(HamiltonianError::BasisMismatch {
            basis_n: basis.particles(),
            basis_m: basis.sites(),
            n: params.n,
            m: params.m,
        });
    }
    let dim = basis.size();
    let bonds = params.bonds();
    let max_row = 1 + 2 * bonds.len();
    let estimate = dim as u64 * (max_row as u64 * 12 + 8);
    if estimate > budget {
        return Err(HamiltonianError::MemoryBudgetExceeded { estimate, budget, dim });
    }
    let eps: Vec<f64> = (0..params.m as usize).map(|s| params.site_energy(s)).collect();

    // one row per basis state, assembled independently and in parallel
    let rows: Vec<Vec<(u32, f64)>> = (0..dim)
        .into_par_iter()
        .map(|idx| {
            let state = basis.unrank(idx).expect("index in range");
            let occ = state.occupations();
            let mut entries: Vec<(u32, f64)> = Vec::with_capacity(max_row);
            let diag: f64 = occ
                .iter()
                .enumerate()
                .map(|(s, &v)| {
                    let v = f64::from(v);
                    eps[s] * v + 0.5 * params.u * v * (v - 1.0)
                })
                .sum();
            entries.push((idx as u32, diag));
            for &(a, b) in &bonds {
                for (dst, src) in [(a, b), (b, a)] {
                    if let Some((target, amp)) = apply_hop(&state, dst, src) {
                        let col = basis.rank(&target).expect("hop conserves shape") as u32;
                        entries.push((col, -params.j * amp));
                    }
                }
            }
            entries.sort_unstable_by_key(|&(c, _)| c);
            // merge duplicates (an M = 2 ring carries a doubled bond)
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
            for (c, v) in entries {
                match merged.last_mut() {
                    Some((pc, pv)) if *pc == c => *pv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged
        })
        .collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0usize);
    let mut total = 0usize;
    for r in &rows {
        total += r.len();
        row_ptr.push(total);
    }
    let mut cols = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    for r in rows {
        for (c, v) in r {
            cols.push(c);
            vals.push(v);
        }
    }
    Ok(SparseHamiltonian { dim, row_ptr, cols, vals })
}

/// Tunneling energy from the lattice depth: `J = (4/sqrt(pi)) E_R
/// (V/E_R)^(3/4) exp(-2 sqrt(V/E_R))`.
pub fn tunneling_from_depth(v: f64, e_r: f64) -> f64 {
    assert!(v > 0.0 && e_r > 0.0, "lattice depth and recoil energy must be positive");
    let x = v / e_r;
    4.0 / std::f64::consts::PI.sqrt() * e_r * x.powf(0.75) * (-2.0 * x.sqrt()).exp()
}

fn gamma_half_integer(d: u32) -> f64 {
    // Gamma(d/2 + 1) for d = 1, 2, 3
    let sqrt_pi = std::f64::consts::PI.sqrt();
    match d {
        1 => 0.5 * sqrt_pi,
        2 => 1.0,
        3 => 0.75 * sqrt_pi,
        _ => unreachable!("d validated to 1..=3"),
    }
}

/// Whether the trap is weak enough that multiple occupation stays inhibited
/// in the ground-state configuration: `U > delta (d/2)! N^(2/d) / pi^(d/2)`.
pub fn trap_constraint_ok(params: &ModelParams) -> bool {
    assert!(params.delta > 0.0, "trap constraint needs delta > 0");
    let d = params.d;
    let threshold = params.delta * gamma_half_integer(d) * (params.n as f64).powf(2.0 / d as f64)
        / std::f64::consts::PI.powf(d as f64 / 2.0);
    params.u > threshold
}

fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 1024 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    // Stirling series; error below 1e-15 for n > 1024
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

/// Order-of-magnitude probability for a hole to percolate from the occupied
/// edge at `r_max` through the barrier to the register boundary at `r_min`:
///
/// `p_h = [(r_min!)^2 / ((r_max+1)!)^2 * d * r_max^(d-1) * pi^(d/2) / (d/2)!]
///        * (J / (2 delta))^(2 (r_max - r_min + 1))`
///
/// Evaluated in log space; underflow to zero is acceptable.
pub fn hole_percolation_probability(params: &ModelParams, r_min: u64, r_max: u64) -> f64 {
    assert!(r_min >= 1 && r_max >= r_min, "need r_max >= r_min >= 1");
    assert!(params.delta > 0.0, "percolation estimate needs delta > 0");
    let d = params.d as f64;
    let ln_p = 2.0 * (ln_factorial(r_min) - ln_factorial(r_max + 1))
        + d.ln()
        + (d - 1.0) * (r_max as f64).ln()
        + 0.5 * d * std::f64::consts::PI.ln()
        - gamma_half_integer(params.d).ln()
        + 2.0 * (r_max - r_min + 1) as f64 * (params.j / (2.0 * params.delta)).ln();
    ln_p.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::OccupationState;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(
        j: f64,
        u: f64,
        delta: f64,
        m: u32,
        n: u32,
        k: u32,
        boundary: Boundary,
    ) -> ModelParams {
        ModelParams::new(j, u, delta, 1, m, n, k, boundary).unwrap()
    }

    #[test]
    fn two_site_hamiltonian_matches_hand_computation() {
        // N = M = 2 periodic ring: the wraparound doubles the bond, so the
        // 3x3 matrix on {(2,0),(1,1),(0,2)} is
        //   [ U        -2*sqrt(2)J   0        ]
        //   [-2*sqrt2J  0           -2*sqrt2J ]
        //   [ 0        -2*sqrt(2)J   U        ]
        let u = 7.0;
        let p = params(1.0, u, 0.0, 2, 2, 1, Boundary::Periodic);
        let basis = FockBasis::new(2, 2).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap().to_dense();
        let q = 2.0 * 2f64.sqrt();
        let expect = nalgebra::dmatrix![u, -q, 0.0; -q, 0.0, -q; 0.0, -q, u];
        assert_abs_diff_eq!((&h - &expect).norm(), 0.0, epsilon = 1e-14);

        // ground energy against the hand eigenvalue: the characteristic
        // polynomial factors as (U - E)(E^2 - U E - 2 q^2) = 0
        let eigs = h.symmetric_eigen().eigenvalues;
        let ground = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let expected = 0.5 * (u - (u * u + 8.0 * q * q).sqrt());
        assert_relative_eq!(ground, expected, max_relative = 1e-12);
    }

    #[test]
    fn zero_tunneling_limit_is_diagonal_with_unit_filled_at_zero() {
        // J -> 0 limit is approximated by tiny J; the diagonal itself is exact
        let p = params(1.0, 10.0, 0.0, 4, 4, 1, Boundary::Periodic);
        let basis = FockBasis::new(4, 4).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let t = OccupationState::unit_filled(4);
        let idx = basis.rank(&t).unwrap();
        assert_abs_diff_eq!(h.diagonal()[idx], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn matvec_matches_dense_construction() {
        let p = params(1.0, 3.0, 0.7, 5, 3, 3, Boundary::Open);
        let basis = FockBasis::new(3, 5).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        assert!(h.dim() <= 500);
        let dense = h.to_dense();
        for col in 0..h.dim() {
            let mut x = vec![Complex64::new(0.0, 0.0); h.dim()];
            x[col] = Complex64::new(1.0, 0.0);
            let mut y = vec![Complex64::new(0.0, 0.0); h.dim()];
            h.apply(&x, &mut y);
            for row in 0..h.dim() {
                assert_abs_diff_eq!(y[row].re, dense[(row, col)], epsilon = 1e-14);
                assert_abs_diff_eq!(y[row].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn hermiticity_random_vector_adjoint() {
        let p = params(1.3, 5.0, 0.4, 6, 4, 3, Boundary::Periodic);
        let basis = FockBasis::new(4, 6).unwrap();
        let h = build_hamiltonian(&p, &basis).unwrap();
        let dim = h.dim();
        // deterministic pseudo-random complex vectors
        let mut seed = 0x243f6a8885a308d3u64;
        let mut rand = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..5 {
            let x: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rand(), rand())).collect();
            let y: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rand(), rand())).collect();
            let mut hx = vec![Complex64::default(); dim];
            let mut hy = vec![Complex64::default(); dim];
            h.apply(&x, &mut hx);
            h.apply(&y, &mut hy);
            let xhy: Complex64 = x.iter().zip(&hy).map(|(a, b)| a.conj() * b).sum();
            let yhx: Complex64 = y.iter().zip(&hx).map(|(a, b)| a.conj() * b).sum();
            let scale = xhy.norm().max(1.0);
            assert!((xhy - yhx.conj()).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn homogeneous_periodic_commutes_with_translation() {
        for m in [4u32, 6, 8] {
            let n = m;
            let p = params(1.0, 9.0, 0.0, m, n, 1, Boundary::Periodic);
            let basis = FockBasis::new(n, m).unwrap();
            let h = build_hamiltonian(&p, &basis).unwrap();
            let dim = h.dim();
            // translation permutation: site j -> j+1 mod M
            let perm: Vec<usize> = (0..dim)
                .map(|i| {
                    let s = basis.unrank(i).unwrap();
                    let occ = s.occupations();
                    let mut t = vec![0u8; m as usize];
                    for j in 0..m as usize {
                        t[(j + 1) % m as usize] = occ[j];
                    }
                    basis.rank(&OccupationState::new(t)).unwrap()
                })
                .collect();
            let mut seed = 0x13198a2e03707344u64;
            let mut rand = || {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let x: Vec<Complex64> = (0..dim).map(|_| Complex64::new(rand(), rand())).collect();
            let norm_x = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            // [H, T] x = H T x - T H x
            let tx: Vec<Complex64> = {
                let mut t = vec![Complex64::default(); dim];
                for i in 0..dim {
                    t[perm[i]] = x[i];
                }
                t
            };
            let mut htx = vec![Complex64::default(); dim];
            h.apply(&tx, &mut htx);
            let mut hx = vec![Complex64::default(); dim];
            h.apply(&x, &mut hx);
            let thx: Vec<Complex64> = {
                let mut t = vec![Complex64::default(); dim];
                for i in 0..dim {
                    t[perm[i]] = hx[i];
                }
                t
            };
            let resid: f64 =
                htx.iter().zip(&thx).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(resid <= 1e-12 * h.norm_inf() * norm_x, "M = {m}: residual {resid}");
        }
    }

    #[test]
    fn d_above_one_is_rejected() {
        let p = ModelParams::new(1.0, 5.0, 0.0, 2, 4, 4, 1, Boundary::Periodic).unwrap();
        let basis = FockBasis::new(4, 4).unwrap();
        assert!(matches!(
            build_hamiltonian(&p, &basis),
            Err(HamiltonianError::UnsupportedDimensionality(2))
        ));
    }

    #[test]
    fn memory_budget_is_enforced() {
        let p = params(1.0, 5.0, 0.0, 8, 8, 1, Boundary::Periodic);
        let basis = FockBasis::new(8, 8).unwrap();
        assert!(matches!(
            build_hamiltonian_with_budget(&p, &basis, 1024),
            Err(HamiltonianError::MemoryBudgetExceeded { .. })
        ));
    }

    #[test]
    fn tunneling_rate_examples() {
        // V = 10 E_R: high-precision evaluation of the printed formula
        let j = tunneling_from_depth(10.0, 1.0);
        let expect = 4.0 / std::f64::consts::PI.sqrt() * 10f64.powf(0.75) * (-2.0 * 10f64.sqrt()).exp();
        assert_relative_eq!(j, expect, max_relative = 1e-15);
        assert_abs_diff_eq!(j, 0.0227, epsilon = 2e-4);
        // monotone decrease toward deep lattices
        assert!(tunneling_from_depth(25.0, 1.0) < tunneling_from_depth(16.0, 1.0));
        let mut prev = tunneling_from_depth(5.0, 1.0);
        for v in [8.0, 12.0, 20.0, 40.0, 80.0, 200.0] {
            let cur = tunneling_from_depth(v, 1.0);
            assert!(cur < prev);
            prev = cur;
        }
        assert!(tunneling_from_depth(1e4, 1.0) < 1e-30);
    }

    #[test]
    fn trap_constraint_examples() {
        // d=1, N=9, delta=3.375, U=60: threshold 3.375 * 81 / 2 = 136.7 > 60
        let p = params(1.0, 60.0, 3.375, 11, 9, 5, Boundary::Open);
        assert!(!trap_constraint_ok(&p));
        // vanishing trap: any finite U passes
        let p = params(1.0, 1e-6, 1e-300, 11, 9, 5, Boundary::Open);
        assert!(trap_constraint_ok(&p));
        // d=1, N=551, U=500: true iff delta < 1000/551^2
        let edge = 1000.0 / (551.0f64 * 551.0);
        let below = ModelParams::new(1.0, 500.0, edge * 0.99, 1, 601, 551, 501, Boundary::Open)
            .unwrap();
        let above = ModelParams::new(1.0, 500.0, edge * 1.01, 1, 601, 551, 501, Boundary::Open)
            .unwrap();
        assert!(trap_constraint_ok(&below));
        assert!(!trap_constraint_ok(&above));
    }

    #[test]
    fn percolation_probability_examples() {
        // r_min == r_max == r, d = 1: p = 2 (1/(r+1))^2 (J/2delta)^2
        for r in [1u64, 2, 5, 9] {
            let p = params(1.0, 60.0, 3.375, 21, 15, 5, Boundary::Open);
            let got = hole_percolation_probability(&p, r, r);
            let expect = 2.0 / ((r + 1) as f64).powi(2) * (1.0 / (2.0 * 3.375f64)).powi(2);
            assert_relative_eq!(got, expect, max_relative = 1e-12);
        }
        // J/(2 delta) -> 0 drives p to zero
        let p_small = params(1e-6, 60.0, 10.0, 21, 15, 5, Boundary::Open);
        assert!(hole_percolation_probability(&p_small, 3, 8) < 1e-60);
        // monotone decrease in r_max when J/(2 r_min delta) < 1
        let p = params(1.0, 60.0, 2.0, 21, 15, 5, Boundary::Open);
        let mut prev = f64::INFINITY;
        for r_max in 3..12 {
            let cur = hole_percolation_probability(&p, 3, r_max);
            assert!(cur < prev, "r_max = {r_max}");
            prev = cur;
        }
    }

    #[test]
    fn ln_factorial_is_accurate() {
        // cross-check the Stirling branch against the exact sum
        let exact: f64 = (2..=2000u64).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(ln_factorial(2000), exact, max_relative = 1e-13);
        assert_abs_diff_eq!(ln_factorial(0), 0.0);
        assert_abs_diff_eq!(ln_factorial(1), 0.0);
        assert_relative_eq!(ln_factorial(5), 120f64.ln(), max_relative = 1e-15);
    }
}
