//! Krylov-subspace propagator for `psi(t) = exp(-i H t) psi(0)` with a
//! Hermitian `H`. Lanczos with full reorthogonalization inside each substep;
//! the substep length adapts to an a-posteriori error estimate.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Hermitian linear operator given by its action on complex vectors.
pub trait HermitianOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

impl HermitianOp for crate::hamiltonian::SparseHamiltonian {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply(x, y)
    }
}

#[derive(Debug, Clone)]
pub struct KrylovOptions {
    /// Krylov subspace dimension per substep.
    pub subspace_dim: usize,
    /// Local error budget per unit time.
    pub tol: f64,
    /// Hard cap on substeps per propagation call.
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { subspace_dim: 36, tol: 1e-11, max_substeps: 2_000_000 }
    }
}

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error(
        "Krylov step failed to converge at t = {t_reached}: substep {tau} has \
         error estimate {err_est} above budget {budget}"
    )]
    StepFailed { t_reached: f64, tau: f64, err_est: f64, budget: f64 },
    #[error("substep cap of {max_substeps} exceeded at t = {t_reached} of {t_total}")]
    TooManySubsteps { max_substeps: usize, t_reached: f64, t_total: f64 },
}

struct LanczosFactorization {
    /// Orthonormal Krylov basis, one vector per entry.
    basis: Vec<Vec<Complex64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    /// `beta` that would extend the factorization; zero on happy breakdown.
    beta_next: f64,
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn build_factorization(
    op: &dyn HermitianOp,
    v0: &[Complex64],
    m: usize,
) -> LanczosFactorization {
    let n = v0.len();
    let mut basis = vec![v0.to_vec()];
    let mut alphas = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m);
    let mut w = vec![Complex64::default(); n];
    let mut beta_next = 0.0;
    for i in 0..m {
        op.apply(&basis[i], &mut w);
        if i > 0 {
            let b = betas[i - 1];
            let prev = &basis[i - 1];
            w.iter_mut().zip(prev).for_each(|(wi, vi)| *wi -= vi * b);
        }
        let a = cdot(&basis[i], &w).re;
        alphas.push(a);
        {
            let vi = &basis[i];
            w.iter_mut().zip(vi).for_each(|(wi, v)| *wi -= v * a);
        }
        // full reorthogonalization inside the substep basis
        for _ in 0..2 {
            for v in &basis {
                let c = cdot(v, &w);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= vi * c);
            }
        }
        let b = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        beta_next = b;
        if b < 1e-14 || i + 1 == m {
            break;
        }
        betas.push(b);
        let mut v = std::mem::replace(&mut w, vec![Complex64::default(); n]);
        v.iter_mut().for_each(|z| *z /= b);
        basis.push(v);
    }
    LanczosFactorization { basis, alphas, betas, beta_next }
}

/// `exp(-i T tau) e_1` for the small real symmetric tridiagonal `T`.
fn small_exponential(f: &LanczosFactorization, tau: f64) -> Vec<Complex64> {
    let m = f.alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = f.alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = f.betas[i];
            t[(i + 1, i)] = f.betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    // w = Q exp(-i lambda tau) Q^T e_1
    let mut w = vec![Complex64::default(); m];
    for k in 0..m {
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * tau);
        let q0 = eig.eigenvectors[(0, k)];
        for i in 0..m {
            w[i] += eig.eigenvectors[(i, k)] * q0 * phase;
        }
    }
    w
}

/// Apply `exp(-i H t)` to `psi` in place. `t` may be negative.
pub fn propagate(
    op: &dyn HermitianOp,
    psi: &mut [Complex64],
    t: f64,
    opts: &KrylovOptions,
) -> Result<(), KrylovError> {
    if t == 0.0 {
        return Ok(());
    }
    let n = psi.len();
    assert_eq!(n, op.dim());
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut tau = total;
    let mut substeps = 0usize;

    while done < total {
        substeps += 1;
        if substeps > opts.max_substeps {
            return Err(KrylovError::TooManySubsteps {
                max_substeps: opts.max_substeps,
                t_reached: sign * done,
                t_total: t,
            });
        }
        let nrm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return Ok(()); // zero vector stays zero
        }
        let v0: Vec<Complex64> = psi.iter().map(|z| z / nrm).collect();
        let f = build_factorization(op, &v0, opts.subspace_dim.max(2));
        let m = f.alphas.len();

        tau = tau.min(total - done);
        loop {
            let w = small_exponential(&f, sign * tau);
            // a-posteriori estimate: weight the would-be next basis vector
            let err_est = f.beta_next * w[m - 1].norm() * tau;
            let budget = opts.tol * tau.max(f64::MIN_POSITIVE);
            if err_est <= budget || f.beta_next == 0.0 {
                for (i, p) in psi.iter_mut().enumerate() {
                    let mut acc = Complex64::default();
                    for (j, v) in f.basis.iter().take(m).enumerate() {
                        acc += v[i] * w[j];
                    }
                    *p = acc * nrm;
                }
                done += tau;
                tau *= 1.8; // try a longer substep next time
                break;
            }
            tau *= 0.5;
            if tau < 1e-14 * total {
                return Err(KrylovError::StepFailed {
                    t_reached: sign * done,
                    tau,
                    err_est,
                    budget,
                });
            }
        }
    }
    Ok(())
}
