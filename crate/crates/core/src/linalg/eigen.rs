//! Eigenvalues of small dense complex matrices: Householder reduction to
//! Hessenberg form followed by single-shift QR; eigenvectors by inverse
//! iteration.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(a: &DenseMatrix) -> Self {
        assert_eq!(a.rows(), a.cols());
        Self::from_fn(a.rows(), |i, j| Complex64::new(a[(i, j)], 0.0))
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// `self += s · other`
    pub fn add_scaled(&mut self, s: Complex64, other: &ComplexMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

fn hessenberg(a: &mut ComplexMatrix) {
    let n = a.n;
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // A ← (I − 2vvᴴ) A
        for j in 0..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i - k - 1].conj() * a[(i, j)]).sum();
            for i in k + 1..n {
                a[(i, j)] -= 2.0 * v[i - k - 1] * s;
            }
        }
        // A ← A (I − 2vvᴴ)
        for i in 0..n {
            let s: Complex64 = (k + 1..n).map(|j| a[(i, j)] * v[j - k - 1]).sum();
            for j in k + 1..n {
                a[(i, j)] -= 2.0 * s * v[j - k - 1].conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if norm == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if x.norm() == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let alpha = x / x.norm();
    (x.norm() / norm, alpha * y.conj() / norm)
}

/// All eigenvalues, in no particular order.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.n;
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }
    let eps = f64::EPSILON;
    let scale = h.norm_inf().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if sub <= eps * diag.max(eps * scale) {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return Err(Error::EigenNoConvergence(format!(
                "QR iteration stalled with {} eigenvalues left",
                hi + 1
            )));
        }
        let (aa, bb, cc, dd) = (
            h[(hi - 1, hi - 1)],
            h[(hi - 1, hi)],
            h[(hi, hi - 1)],
            h[(hi, hi)],
        );
        let mu = if iter % 11 == 10 {
            // exceptional shift to break cycles
            dd + Complex64::new(0.75 * cc.norm(), 0.43 * cc.norm())
        } else {
            let half = (aa - dd) * 0.5;
            let disc = (half * half + bb * cc).sqrt();
            // eigenvalue of the trailing 2×2 closest to dd
            let (x1, x2) = ((aa + dd) * 0.5 + disc, (aa + dd) * 0.5 - disc);
            if (x1 - dd).norm() < (x2 - dd).norm() {
                x1
            } else {
                x2
            }
        };
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            rots.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rots[idx];
            for i in l..=(k + 1).min(hi) {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    out[0] = h[(0, 0)];
    Ok(out)
}

fn lu_solve(a: &ComplexMatrix, b: &mut [Complex64]) {
    let n = a.n;
    let mut m = a.clone();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm()))
            .unwrap();
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            b.swap(k, p);
        }
        if m[(k, k)].norm() == 0.0 {
            m[(k, k)] = Complex64::new(f64::EPSILON, 0.0);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f.norm() == 0.0 {
                continue;
            }
            for j in k..n {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
            let t = b[k];
            b[i] -= f * t;
        }
    }
    for k in (0..n).rev() {
        let s: Complex64 = (k + 1..n).map(|j| m[(k, j)] * b[j]).sum();
        b[k] = (b[k] - s) / m[(k, k)];
    }
}

/// Unit-norm eigenvector for an (approximate) eigenvalue `lambda`.
pub fn eigenvector(a: &ComplexMatrix, lambda: Complex64) -> Vec<Complex64> {
    let n = a.n;
    let shift = lambda + Complex64::new(1e-10 * a.norm_inf().max(1.0), 0.0);
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.05 * (i as f64).cos()))
        .collect();
    for _ in 0..3 {
        lu_solve(&shifted, &mut x);
        let nrm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            break;
        }
        for z in &mut x {
            *z /= nrm;
        }
    }
    x
}

/// Eigenvalues together with unit eigenvectors.
pub fn eigen_decomposition(a: &ComplexMatrix) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    Ok(eigenvalues(a)?
        .into_iter()
        .map(|l| (l, eigenvector(a, l)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rotation_matrix_has_imaginary_pair() {
        let a = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(-1.0, 0.0),
            (1, 0) => c(1.0, 0.0),
            _ => c(0.0, 0.0),
        });
        let ev = sorted(eigenvalues(&a).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-13);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn triangular_matrix_returns_diagonal() {
        let a = ComplexMatrix::from_fn(5, |i, j| {
            if j >= i {
                c((i + 1) as f64, j as f64)
            } else {
                c(0.0, 0.0)
            }
        });
        let ev = sorted(eigenvalues(&a).unwrap());
        for (k, e) in ev.iter().enumerate() {
            assert!((e - c((k + 1) as f64, k as f64)).norm() < 1e-12, "{e}");
        }
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        let a = ComplexMatrix::from_fn(7, |i, j| {
            c(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                ((i + 2 * j) % 3) as f64 * 0.3,
            )
        });
        for (l, v) in eigen_decomposition(&a).unwrap() {
            let av = a.matvec(&v);
            let err: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - l * y).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "residual {err}");
        }
    }
}
