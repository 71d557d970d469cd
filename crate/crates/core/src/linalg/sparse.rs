//! Compressed-row symmetric matrices and zero fill-in incomplete Cholesky.

use super::dense::DenseMatrix;
use super::{LinearOperator, Preconditioner};
use crate::error::{Error, Result};

/// CSR matrix holding both triangles of a symmetric matrix, columns sorted
/// within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from a per-row sorted column pattern with zero values.
    pub fn from_pattern(n: usize, rows: Vec<Vec<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let n = a.rows();
        let rows = (0..n)
            .map(|i| (0..n).filter(|&j| a[(i, j)] != 0.0).collect())
            .collect();
        let mut m = Self::from_pattern(n, rows);
        for i in 0..n {
            for p in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.vals[p] = a[(i, m.cols[p])];
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn row_values_mut(&mut self, i: usize) -> (&[usize], &mut [f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &mut self.vals[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (c, _) = self.row(i);
        c.binary_search(&j).ok().map(|p| self.row_ptr[i] + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.vals[p])
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self.position(i, j).expect("entry outside sparsity pattern");
        self.vals[p] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn with_added_diagonal(&self, d: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, v) in d.iter().enumerate() {
            out.add(i, i, *v);
        }
        out
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, a)| a * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d[(i, j)] = a;
            }
        }
        d
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }
}

impl LinearOperator for CsrMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }

    fn flops(&self) -> u64 {
        2 * self.nnz() as u64
    }
}

/// IC(0) factor `L` restricted to the lower-triangular pattern of `A`,
/// diagonal stored last in every row.
#[derive(Debug, Clone)]
pub struct IncompleteCholesky {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    shift: f64,
}

impl IncompleteCholesky {
    /// Factor `a`; on a nonpositive pivot restart on `A + δ diag(A)` with δ
    /// doubling from 1e-3.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut delta = 0.0;
        for _ in 0..30 {
            match Self::try_factor(a, delta) {
                Ok(f) => return Ok(f),
                Err(_) => {
                    delta = if delta == 0.0 { 1e-3 } else { 2.0 * delta };
                }
            }
        }
        Err(Error::PreconditionerBreakdown(format!(
            "IC(0) breakdown persists with diagonal shift {delta:e}"
        )))
    }

    /// Diagonal shift that was needed, zero for a clean factorisation.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn try_factor(a: &CsrMatrix, delta: f64) -> Result<Self> {
        let n = a.n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if j <= i {
                    cols.push(j);
                    vals.push(if j == i { x + delta * x.abs() } else { x });
                }
            }
            if cols.last() != Some(&i) {
                return Err(Error::PreconditionerBreakdown(format!(
                    "missing diagonal in row {i}"
                )));
            }
            row_ptr.push(cols.len());
        }
        for i in 0..n {
            let (ri0, ri1) = (row_ptr[i], row_ptr[i + 1]);
            for pi in ri0..ri1 - 1 {
                let k = cols[pi];
                // dot of row i and row k over columns < k
                let (rk0, rk1) = (row_ptr[k], row_ptr[k + 1] - 1);
                let mut s = vals[pi];
                let (mut a_, mut b_) = (ri0, rk0);
                while a_ < pi && b_ < rk1 {
                    match cols[a_].cmp(&cols[b_]) {
                        std::cmp::Ordering::Less => a_ += 1,
                        std::cmp::Ordering::Greater => b_ += 1,
                        std::cmp::Ordering::Equal => {
                            s -= vals[a_] * vals[b_];
                            a_ += 1;
                            b_ += 1;
                        }
                    }
                }
                vals[pi] = s / vals[rk1];
            }
            let d = ri1 - 1;
            let s = vals[d] - vals[ri0..d].iter().map(|x| x * x).sum::<f64>();
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::NotPositiveDefinite { row: i, pivot: s });
            }
            vals[d] = s.sqrt();
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
            shift: delta,
        })
    }

    pub fn lower(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                d[(i, self.cols[p])] = self.vals[p];
            }
        }
        d
    }
}

impl Preconditioner for IncompleteCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        for i in 0..self.n {
            let d = self.row_ptr[i + 1] - 1;
            let mut s = z[i];
            for p in self.row_ptr[i]..d {
                s -= self.vals[p] * z[self.cols[p]];
            }
            z[i] = s / self.vals[d];
        }
        for i in (0..self.n).rev() {
            let d = self.row_ptr[i + 1] - 1;
            z[i] /= self.vals[d];
            let zi = z[i];
            for p in self.row_ptr[i]..d {
                z[self.cols[p]] -= self.vals[p] * zi;
            }
        }
    }

    fn flops(&self) -> u64 {
        4 * self.vals.len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_factor_is_exact() {
        let a = CsrMatrix::from_dense(&DenseMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                (i + 1) as f64
            } else {
                0.0
            }
        }));
        let f = IncompleteCholesky::new(&a).unwrap();
        let l = f.lower();
        for i in 0..4 {
            assert!((l[(i, i)] - ((i + 1) as f64).sqrt()).abs() < 1e-15);
        }
        let mut z = vec![0.0; 4];
        f.apply(&[1.0, 2.0, 3.0, 4.0], &mut z);
        assert!(z.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn tridiagonal_ic0_equals_cholesky() {
        let d = DenseMatrix::from_fn(6, 6, |i, j| match i.abs_diff(j) {
            0 => 4.0,
            1 => -1.0,
            _ => 0.0,
        });
        let f = IncompleteCholesky::new(&CsrMatrix::from_dense(&d)).unwrap();
        let exact = d.cholesky().unwrap();
        assert!(f.lower().sub(&exact).max_abs() < 1e-14);
        assert_eq!(f.shift(), 0.0);
    }

    #[test]
    fn breakdown_triggers_shift() {
        // indefinite: IC(0) must shift to succeed
        let d = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.9 });
        let mut a = CsrMatrix::from_dense(&d);
        a.add(2, 2, -1.5);
        let f = IncompleteCholesky::new(&a).unwrap();
        assert!(f.shift() > 0.0);
    }
}
