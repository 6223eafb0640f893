//! Fock basis for `N` bosons on `M` lattice sites.
//!
//! States are occupation-number vectors ordered descending-lexicographically,
//! so `(N, 0, ..., 0)` has rank 0 and `(0, ..., 0, N)` has the largest rank.
//! Ranking and unranking use cumulative binomial tables and run in `O(M * N)`
//! without ever scanning the basis.

use thiserror::Error;

/// Largest per-site occupation (and particle count) the packed `u8`
/// representation supports.
pub const MAX_PARTICLES: u32 = 255;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FockError {
    #[error("basis dimension C({a}, {k}) overflows u64 (N = {n}, M = {m})")]
    DimensionOverflow { n: u32, m: u32, a: u64, k: u64 },
    #[error("a basis needs at least one site")]
    NoSites,
    #[error("{n} particles exceed the supported maximum of {MAX_PARTICLES}")]
    TooManyParticles { n: u32 },
    #[error("basis dimension {dim} does not fit in usize")]
    DimensionExceedsUsize { dim: u64 },
    #[error(
        "state with {state_sites} sites / {state_particles} particles does not \
         belong to a basis with {basis_sites} sites / {basis_particles} particles"
    )]
    ShapeMismatch {
        state_sites: usize,
        state_particles: u32,
        basis_sites: u32,
        basis_particles: u32,
    },
    #[error("index {index} out of range for basis of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
}

/// Number of `n`-boson states on `m` sites: `C(n + m - 1, n)`.
///
/// Exact integer arithmetic with overflow detection; a result that does not
/// fit in `u64` is an error, never a silent wraparound.
pub fn dimension(n: u32, m: u32) -> Result<u64, FockError> {
    if m == 0 {
        return if n == 0 { Ok(1) } else { Err(FockError::NoSites) };
    }
    let a = u64::from(n) + u64::from(m) - 1;
    let k = u64::from(n.min(m - 1));
    let mut r: u128 = 1;
    for i in 1..=k {
        // r = C(a - k + i, i); the division is exact at every step.
        r = r * u128::from(a - k + i) / u128::from(i);
        if r > u128::from(u64::MAX) {
            return Err(FockError::DimensionOverflow { n, m, a, k });
        }
    }
    Ok(r as u64)
}

/// Occupation-number vector: `occupations[j]` atoms on site `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccupationState {
    occ: Vec<u8>,
}

impl OccupationState {
    pub fn new(occ: Vec<u8>) -> Self {
        Self { occ }
    }

    /// The unit-filled state: one atom on every site.
    pub fn unit_filled(m: u32) -> Self {
        Self { occ: vec![1; m as usize] }
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occ
    }

    pub fn sites(&self) -> usize {
        self.occ.len()
    }

    /// Total particle number.
    pub fn total(&self) -> u32 {
        self.occ.iter().map(|&v| u32::from(v)).sum()
    }
}

/// Apply the hopping operator `a_i^dag a_j` to a Fock state.
///
/// Returns `None` when site `j` is empty (the operator annihilates the
/// state); otherwise the target state together with the bosonic amplitude
/// `sqrt(n_j) * sqrt(n_i + 1)`.
pub fn apply_hop(state: &OccupationState, i: usize, j: usize) -> Option<(OccupationState, f64)> {
    assert!(i != j, "apply_hop requires distinct sites, got i == j == {i}");
    assert!(i < state.sites() && j < state.sites(), "site index out of range");
    let nj = state.occ[j];
    if nj == 0 {
        return None;
    }
    let ni = state.occ[i];
    let mut occ = state.occ.clone();
    occ[j] -= 1;
    occ[i] += 1;
    let amp = (f64::from(nj) * (f64::from(ni) + 1.0)).sqrt();
    Some((OccupationState::new(occ), amp))
}

/// The full `N`-boson `M`-site basis with O(M) combinatorial (un)ranking.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n: u32,
    m: u32,
    size: usize,
    /// `table[sites][particles]` = number of states of `particles` bosons on
    /// `sites` sites. Rectangular, `(m + 1) x (n + 1)`.
    table: Vec<Vec<u64>>,
}

impl FockBasis {
    pub fn new(n: u32, m: u32) -> Result<Self, FockError> {
        if m == 0 {
            return Err(FockError::NoSites);
        }
        if n > MAX_PARTICLES {
            return Err(FockError::TooManyParticles { n });
        }
        let dim = dimension(n, m)?;
        let size = usize::try_from(dim).map_err(|_| FockError::DimensionExceedsUsize { dim })?;
        let mut table = vec![vec![0u64; n as usize + 1]; m as usize + 1];
        for sites in 0..=m as usize {
            for particles in 0..=n as usize {
                table[sites][particles] = if sites == 0 {
                    u64::from(particles == 0)
                } else {
                    // sub-dimensions never overflow when the full one did not
                    dimension(particles as u32, sites as u32)?
                };
            }
        }
        Ok(Self { n, m, size, table })
    }

    pub fn particles(&self) -> u32 {
        self.n
    }

    pub fn sites(&self) -> u32 {
        self.m
    }

    /// Basis size `C(N + M - 1, N)`.
    pub fn size(&self) -> usize {
        self.size
    }

    fn check_shape(&self, state: &OccupationState) -> Result<(), FockError> {
        if state.sites() != self.m as usize || state.total() != self.n {
            return Err(FockError::ShapeMismatch {
                state_sites: state.sites(),
                state_particles: state.total(),
                basis_sites: self.m,
                basis_particles: self.n,
            });
        }
        Ok(())
    }

    /// Index of `state` under the descending-lexicographic order.
    pub fn rank(&self, state: &OccupationState) -> Result<usize, FockError> {
        self.check_shape(state)?;
        let m = self.m as usize;
        let mut rank: u64 = 0;
        let mut rem = self.n;
        for site in 0..m - 1 {
            let occ = u32::from(state.occ[site]);
            // states with larger occupation on this site come first
            for v in occ + 1..=rem {
                rank += self.table[m - site - 1][(rem - v) as usize];
            }
            rem -= occ;
        }
        Ok(rank as usize)
    }

    /// Inverse of [`rank`](Self::rank).
    pub fn unrank(&self, index: usize) -> Result<OccupationState, FockError> {
        if index >= self.size {
            return Err(FockError::IndexOutOfRange { index, size: self.size });
        }
        let m = self.m as usize;
        let mut occ = vec![0u8; m];
        let mut rem = self.n;
        let mut left = index as u64;
        for site in 0..m - 1 {
            for v in (0..=rem).rev() {
                let count = self.table[m - site - 1][(rem - v) as usize];
                if left < count {
                    occ[site] = v as u8;
                    rem -= v;
                    break;
                }
                left -= count;
            }
        }
        occ[m - 1] = rem as u8;
        Ok(OccupationState::new(occ))
    }

    /// Iterate the basis in rank order.
    pub fn iter(&self) -> BasisIter<'_> {
        BasisIter { basis: self, current: None, emitted: 0 }
    }
}

/// Iterator over all occupation vectors in descending-lexicographic order.
pub struct BasisIter<'a> {
    basis: &'a FockBasis,
    current: Option<Vec<u8>>,
    emitted: usize,
}

impl Iterator for BasisIter<'_> {
    type Item = OccupationState;

    fn next(&mut self) -> Option<Self::Item> {
        if self.emitted >= self.basis.size {
            return None;
        }
        let m = self.basis.m as usize;
        let state = match self.current.take() {
            None => {
                let mut occ = vec![0u8; m];
                occ[0] = self.basis.n as u8;
                occ
            }
            Some(mut occ) => {
                // successor: decrement the rightmost movable site and collect
                // everything to its right one slot further along
                let pivot = (0..m - 1).rev().find(|&i| occ[i] > 0)?;
                occ[pivot] -= 1;
                let moved: u32 = occ[pivot + 1..].iter().map(|&v| u32::from(v)).sum();
                occ[pivot + 1..].iter_mut().for_each(|v| *v = 0);
                occ[pivot + 1] = (moved + 1) as u8;
                occ
            }
        };
        self.emitted += 1;
        self.current = Some(state.clone());
        Some(OccupationState::new(state))
    }
}
