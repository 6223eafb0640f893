//! Shared numerical kernels: dense matrix exponential, matrix-free symmetric
//! Lanczos eigensolver, and a Krylov propagator for `exp(-iHt)`.

pub mod expm;
pub mod krylov;
pub mod lanczos;

pub use expm::expm;
pub use krylov::{propagate, HermitianOp, KrylovError, KrylovOptions};
pub use lanczos::{
    eigenpairs_below, lowest_eigenpairs, EigenPair, LanczosError, LanczosOptions, SymOperator,
};
