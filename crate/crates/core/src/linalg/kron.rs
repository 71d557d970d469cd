//! Kronecker-structured mass solves: one banded factor per axis.

use super::banded::{BandCholesky, SymBand};
use crate::error::{Error, Result};
use crate::tensor::{axis_layout, map_fibers};

/// Factors of `M = M_1 ⊗ … ⊗ M_d`, axis 0 varying fastest in vectors.
#[derive(Debug, Clone)]
pub struct KroneckerFactorization {
    factors: Vec<BandCholesky>,
    shape: Vec<usize>,
}

impl KroneckerFactorization {
    pub fn new(matrices: &[SymBand]) -> Result<Self> {
        let factors = matrices
            .iter()
            .map(SymBand::cholesky)
            .collect::<Result<Vec<_>>>()?;
        let shape = factors.iter().map(BandCholesky::size).collect();
        Ok(Self { factors, shape })
    }

    pub fn from_factors(factors: Vec<BandCholesky>) -> Self {
        let shape = factors.iter().map(BandCholesky::size).collect();
        Self { factors, shape }
    }

    pub fn dims(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        for (axis, f) in self.factors.iter().enumerate() {
            let (inner, len, outer) = axis_layout(&self.shape, axis);
            for o in 0..outer {
                for i in 0..inner {
                    f.solve_strided(x, o * inner * len + i, inner);
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_flops(&self) -> u64 {
        let total = self.len() as u64;
        self.factors
            .iter()
            .map(|f| f.solve_flops() * (total / f.size() as u64))
            .sum()
    }
}

/// `(A_1 ⊗ … ⊗ A_d) x` for symmetric banded factors.
pub fn kron_apply(matrices: &[&SymBand], x: &[f64]) -> Vec<f64> {
    let shape: Vec<usize> = matrices.iter().map(|m| m.size()).collect();
    let mut y = x.to_vec();
    for (axis, m) in matrices.iter().enumerate() {
        map_fibers(&mut y, &shape, axis, |a, b| m.matvec_into(a, b));
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mass(n: usize) -> SymBand {
        let mut m = SymBand::zeros(n, 1);
        for i in 0..n {
            m.set(i, i, 4.0 / 6.0);
            if i > 0 {
                m.set(i, i - 1, 1.0 / 6.0);
            }
        }
        m
    }

    #[test]
    fn ones_round_trip_2d() {
        let ms = [mass(5), mass(4)];
        let ones = vec![1.0; 20];
        let b = kron_apply(&[&ms[0], &ms[1]], &ones);
        let f = KroneckerFactorization::new(&ms).unwrap();
        let x = f.solve(&b).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn rejects_wrong_length() {
        let f = KroneckerFactorization::new(&[mass(3), mass(3)]).unwrap();
        assert!(matches!(
            f.solve(&[1.0; 8]),
            Err(Error::DimensionMismatch {
                expected: 9,
                got: 8
            })
        ));
    }
}
