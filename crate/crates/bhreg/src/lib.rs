//! Bose-Hubbard register simulations.
//!
//! Numerical and analytic tools for studying how well a unit-filled register
//! of bosonic atoms in an optical lattice survives Bose-Hubbard dynamics:
//!
//! * [`fock`] — occupation-number basis for fixed particle number, with
//!   combinatorial ranking and bosonic ladder operators.
//! * [`hamiltonian`] — sparse Bose-Hubbard Hamiltonians for homogeneous or
//!   quadratically trapped one-dimensional lattices, plus lattice-physics
//!   helper formulas (tunneling rate, trap constraint, hole percolation).
//! * [`analytics`] — closed-form strong-coupling results: the particle-hole
//!   eigensystem, the first-order ground state, and time-dependent register
//!   fidelities for homogeneous and trapped lattices.
//! * [`dynamics`] — exact Schrodinger propagation (dense or Krylov) and the
//!   restricted particle-hole-basis propagator that serves as the oracle for
//!   the closed forms.
//! * [`measurement`] — the continuous-measurement protocol that purifies the
//!   register: conditional master equation, quantum-trajectory unraveling
//!   with finite detector efficiency, and regime diagnostics.
//! * [`thermal`] — spectra, canonical thermal register fidelity, and the
//!   characteristic temperatures that bound protocol operation.
//!
//! Energies are measured in units of the tunneling energy `J` with `hbar = 1`
//! unless noted otherwise; times are in units of `hbar/J` and temperatures in
//! `J/k_B`.

pub mod analytics;
pub mod dynamics;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod measurement;
pub mod thermal;

pub use fock::{dimension, FockBasis, OccupationState};
pub use hamiltonian::{build_hamiltonian, Boundary, ModelParams, SparseHamiltonian};
