//! Linear algebra kernels: dense, banded, Kronecker, sparse, iterative and
//! eigenvalue solvers.

pub mod augment;
pub mod banded;
pub mod dense;
pub mod eigen;
pub mod kron;
pub mod pcg;
pub mod sparse;

pub use augment::AugmentedOperator;
pub use banded::{BandCholesky, SymBand};
pub use dense::DenseMatrix;
pub use kron::KroneckerFactorization;
pub use pcg::{pcg_solve, PcgOutcome};
pub use sparse::{CsrMatrix, IncompleteCholesky};

/// Symmetric operator `y = A x`.
pub trait LinearOperator {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Approximate flop count of one application.
    fn flops(&self) -> u64 {
        0
    }
}

/// Approximate inverse `z ≈ A⁻¹ r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
    fn flops(&self) -> u64 {
        0
    }
}

/// No preconditioning.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl Preconditioner for KroneckerFactorization {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z).expect("preconditioner dimension");
    }

    fn flops(&self) -> u64 {
        self.solve_flops()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
