//! Symmetric banded matrices and their Cholesky factors.

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Symmetric matrix with half-bandwidth `bw`, lower band stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bw: usize,
    /// entry (i, i - o) at `i * (bw + 1) + o`
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Storage half-bandwidth.
    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }

    /// Largest `|i - j|` with a nonzero entry.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.n {
            for o in 0..=self.bw.min(i) {
                if self.data[i * (self.bw + 1) + o] != 0.0 {
                    bw = bw.max(o);
                }
            }
        }
        bw
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let o = i - j;
        (o <= self.bw).then(|| i * (self.bw + 1) + o)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside band");
        self.data[s] += v;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= factor);
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let w = self.bw + 1;
        for i in 0..self.n {
            let row = &self.data[i * w..(i + 1) * w];
            y[i] += row[0] * x[i];
            for o in 1..=self.bw.min(i) {
                let a = row[o];
                y[i] += a * x[i - o];
                y[i - o] += a * x[i];
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.n;
        let bw = self.bw;
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            for j in jlo..=i {
                let mut s = self.data[i * w + (i - j)];
                let klo = jlo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    let d = self.data[i * w];
                    if s <= 1e-12 * d.abs() || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

/// `L Lᵀ` factor with the bandwidth of the original matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bw
    }

    /// Forward and back substitution on a strided slice, so tensor fibers can
    /// be solved without copying.
    pub fn solve_strided(&self, x: &mut [f64], offset: usize, stride: usize) {
        let w = self.bw + 1;
        let at = |i: usize| offset + i * stride;
        for i in 0..self.n {
            let mut s = x[at(i)];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.l[i * w + (i - k)] * x[at(k)];
            }
            x[at(i)] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = x[at(i)];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.l[k * w + (k - i)] * x[at(k)];
            }
            x[at(i)] = s / self.l[i * w];
        }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        self.solve_strided(x, 0, 1);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Multiply-add count of one solve.
    pub fn solve_flops(&self) -> u64 {
        let n = self.n as u64;
        let bw = self.bw as u64;
        // two triangular sweeps with at most bw off-diagonal terms per row
        2 * (2 * n * bw + n)
    }

    pub fn lower(&self) -> DenseMatrix {
        let w = self.bw + 1;
        DenseMatrix::from_fn(self.n, self.n, |i, j| {
            if j <= i && i - j <= self.bw {
                self.l[i * w + (i - j)]
            } else {
                0.0
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_like(n: usize) -> SymBand {
        let mut a = SymBand::zeros(n, 2);
        for i in 0..n {
            a.set(i, i, 6.0);
            if i >= 1 {
                a.set(i, i - 1, -2.0);
            }
            if i >= 2 {
                a.set(i, i - 2, 0.5);
            }
        }
        a
    }

    #[test]
    fn identity_factor_is_identity() {
        let f = SymBand::identity(5).cholesky().unwrap();
        assert_eq!(f.lower(), DenseMatrix::identity(5));
    }

    #[test]
    fn factor_reproduces_matrix() {
        let a = laplacian_like(9);
        let l = a.cholesky().unwrap().lower();
        assert!(l.matmul(&l.transpose()).sub(&a.to_dense()).max_abs() < 1e-13);
    }

    #[test]
    fn solve_round_trip() {
        let a = laplacian_like(12);
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin()).collect();
        let b = a.matvec(&x);
        let y = a.cholesky().unwrap().solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        // 1D Neumann Laplacian: constants in the nullspace
        let n = 6;
        let mut a = SymBand::zeros(n, 1);
        for i in 0..n {
            let d = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            a.set(i, i, d);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
        }
        assert!(matches!(
            a.cholesky(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn solve_flops_linear_in_size() {
        let small = laplacian_like(100).cholesky().unwrap().solve_flops();
        let big = laplacian_like(400).cholesky().unwrap().solve_flops();
        assert_eq!(big, 4 * small);
    }
}
