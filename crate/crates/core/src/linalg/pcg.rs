//! Preconditioned conjugate gradients.

use super::{dot, LinearOperator, Preconditioner};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOutcome {
    pub iterations: usize,
    /// Final relative residual `‖b − A x‖ / ‖b‖` (recursively updated).
    pub relative_residual: f64,
    pub flops: u64,
}

/// Solve `A x = b` starting from the contents of `x`. Converged when the
/// relative residual drops to `rel_tol`.
pub fn pcg_solve<A, P>(
    a: &A,
    precond: &P,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome>
where
    A: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    let n = a.len();
    if b.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if b.len() != n { b.len() } else { x.len() },
        });
    }
    let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bnorm = if bmax > 0.0 {
        bmax * b.iter().map(|v| (v / bmax).powi(2)).sum::<f64>().sqrt()
    } else {
        0.0
    };
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(PcgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            flops: 0,
        });
    }
    if !(1e-100..=1e100).contains(&bnorm) {
        // inner products of residuals would under- or overflow; solve the
        // rescaled system
        let s = 1.0 / bnorm;
        if !s.is_finite() {
            x.fill(0.0);
            return Ok(PcgOutcome {
                iterations: 0,
                relative_residual: 1.0,
                flops: 0,
            });
        }
        let bs: Vec<f64> = b.iter().map(|v| v * s).collect();
        let mut xs: Vec<f64> = x.iter().map(|v| v * s).collect();
        if xs.iter().any(|v| !v.is_finite()) {
            xs.fill(0.0);
        }
        let out = pcg_solve(a, precond, &bs, &mut xs, rel_tol, max_iter)?;
        for (xi, v) in x.iter_mut().zip(&xs) {
            *xi = v * bnorm;
        }
        return Ok(out);
    }
    let mut flops = a.flops();
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    if rel <= rel_tol {
        return Ok(PcgOutcome {
            iterations: 0,
            relative_residual: rel,
            flops,
        });
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let per_iter = a.flops() + precond.flops() + 10 * n as u64;
    for it in 1..=max_iter {
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 || !pq.is_finite() {
            return Err(Error::PreconditionerBreakdown(format!(
                "nonpositive curvature {pq:e} at iteration {it}"
            )));
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        flops += per_iter;
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= rel_tol {
            return Ok(PcgOutcome {
                iterations: it,
                relative_residual: rel,
                flops,
            });
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        if rz_new == 0.0 {
            // residual vanished below representable precision
            return Ok(PcgOutcome {
                iterations: it,
                relative_residual: rel,
                flops,
            });
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::MaxIterations {
        iterations: max_iter,
        residual: rel,
        tol: rel_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CsrMatrix, DenseMatrix, IdentityPreconditioner, IncompleteCholesky};

    fn laplacian(n: usize) -> CsrMatrix {
        CsrMatrix::from_dense(&DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        }))
    }

    #[test]
    fn cg_solves_laplacian_within_n_steps() {
        let a = laplacian(20);
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 20];
        let out = pcg_solve(&a, &IdentityPreconditioner, &b, &mut x, 1e-12, 40).unwrap();
        assert!(out.iterations <= 21);
        let r = a.matvec(&x);
        assert!(r.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-10));
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let a = laplacian(15);
        let ic = IncompleteCholesky::new(&a).unwrap();
        let b = vec![1.0; 15];
        let mut x = vec![0.0; 15];
        let out = pcg_solve(&a, &ic, &b, &mut x, 1e-12, 5).unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn exact_initial_guess_needs_no_iterations() {
        let a = laplacian(5);
        let x0 = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let b = a.matvec(&x0);
        let mut x = x0.clone();
        let out = pcg_solve(&a, &IdentityPreconditioner, &b, &mut x, 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = laplacian(50);
        let b = vec![1.0; 50];
        let mut x = vec![0.0; 50];
        let err = pcg_solve(&a, &IdentityPreconditioner, &b, &mut x, 1e-14, 3).unwrap_err();
        assert!(matches!(err, Error::MaxIterations { iterations: 3, .. }));
    }

    #[test]
    fn tiny_right_hand_side_is_rescaled() {
        let a = laplacian(20);
        let b: Vec<f64> = (0..20).map(|i| 1e-290 * (1.0 + i as f64)).collect();
        let mut x = vec![0.0; 20];
        pcg_solve(&a, &IdentityPreconditioner, &b, &mut x, 1e-10, 100).unwrap();
        let r = a.matvec(&x);
        let err: f64 = r
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let bmax = b.iter().cloned().fold(0.0, f64::max);
        assert!(err < 1e-8 * bmax, "{err:e}");
        assert!(x.iter().any(|v| *v != 0.0));
    }
}
