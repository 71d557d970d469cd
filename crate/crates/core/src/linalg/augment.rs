//! Rank-one augmentation `A + σ m mᵀ` removing the constant null space of a
//! Neumann stiffness.

use super::{dot, LinearOperator};

pub struct AugmentedOperator<'a, A: LinearOperator + ?Sized> {
    base: &'a A,
    m: &'a [f64],
    sigma: f64,
}

impl<'a, A: LinearOperator + ?Sized> AugmentedOperator<'a, A> {
    pub fn new(base: &'a A, m: &'a [f64], sigma: f64) -> Self {
        Self { base, m, sigma }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Scale `σ = (tr A / n) / ‖m‖²` so the added term matches the typical
/// diagonal entry.
pub fn default_sigma(trace: f64, size: usize, m: &[f64]) -> f64 {
    (trace / size as f64) / dot(m, m)
}

impl<A: LinearOperator + ?Sized> LinearOperator for AugmentedOperator<'_, A> {
    fn len(&self) -> usize {
        self.base.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.base.apply(x, y);
        let s = self.sigma * dot(self.m, x);
        for (yi, mi) in y.iter_mut().zip(self.m) {
            *yi += s * mi;
        }
    }

    fn flops(&self) -> u64 {
        self.base.flops() + 4 * self.m.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pcg_solve, CsrMatrix, DenseMatrix, IdentityPreconditioner};

    #[test]
    fn augmented_neumann_laplacian_is_invertible() {
        let n = 8;
        let a = CsrMatrix::from_dense(&DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                if i == 0 || i == n - 1 {
                    1.0
                } else {
                    2.0
                }
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        }));
        let m = vec![1.0; n];
        let sigma = default_sigma(a.diagonal().iter().sum(), n, &m);
        let aug = AugmentedOperator::new(&a, &m, sigma);
        // right-hand side orthogonal to constants: solution has zero mean
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 3.5).collect();
        let mut x = vec![0.0; n];
        pcg_solve(&aug, &IdentityPreconditioner, &b, &mut x, 1e-13, 50).unwrap();
        assert!(x.iter().sum::<f64>().abs() < 1e-10);
        let ax = a.matvec(&x);
        assert!(ax.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-9));
    }
}
