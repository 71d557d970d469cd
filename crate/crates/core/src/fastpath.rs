//! Simultaneous diagonalisation of the 1D pencil `(S, M)`.
//!
//! In the eigenvector basis the element mass matrix is the identity and the
//! stiffness is diagonal, so constant-coefficient elements evolve without
//! any linear solves. Traces and lifts stay rank-one per axis.

use crate::basis::Side;
use crate::error::{Error, Result};
use crate::linalg::dense::{backward_substitute_transpose, symmetric_eigen, DenseMatrix};
use crate::operators::{side_index, ElementOps1d, SurfaceKind};
use crate::tensor::{contract_axis, expand_axis, map_fibers};

/// Generalised eigenpairs `S ψ = λ M ψ` with `ψᵀMψ = 1`, ascending `λ`.
#[derive(Debug, Clone)]
pub struct DiagonalBasis {
    psi: DenseMatrix,
    /// `Ψᵀ M`, the inverse of `Ψ`.
    inverse: DenseMatrix,
    lambda: Vec<f64>,
    values: [Vec<f64>; 2],
    derivs: [Vec<f64>; 2],
}

pub fn diagonalize(ops: &ElementOps1d) -> Result<DiagonalBasis> {
    let n = ops.len();
    let m = ops.mass().to_dense();
    let s = ops.stiffness().to_dense();
    let l = m.cholesky()?;
    // C = L⁻¹ S L⁻ᵀ, built column by column
    let mut tmp = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let col = crate::linalg::dense::forward_substitute(&l, &s.column(j));
        for i in 0..n {
            tmp[(i, j)] = col[i];
        }
    }
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let row = crate::linalg::dense::forward_substitute(&l, tmp.row(i));
        for j in 0..n {
            c[(i, j)] = row[j];
        }
    }
    let (mut lambda, y) = symmetric_eigen(&c)?;
    let mut psi = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let mut col = backward_substitute_transpose(&l, &y.column(k));
        let mv = m.matvec(&col);
        let norm = col.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>().sqrt();
        let big = col
            .iter()
            .copied()
            .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for v in &mut col {
            *v *= sign / norm;
        }
        for i in 0..n {
            psi[(i, k)] = col[i];
        }
    }
    let scale = lambda.last().copied().unwrap_or(0.0).abs().max(1.0);
    if lambda.iter().skip(1).any(|&l| l < 1e-8 * scale) || lambda[0].abs() > 1e-8 * scale {
        return Err(Error::EigenNoConvergence(format!(
            "expected a single zero eigenvalue, got {:e}, {:e}",
            lambda[0],
            lambda.get(1).copied().unwrap_or(f64::NAN)
        )));
    }
    lambda[0] = 0.0;
    let inverse = psi.transpose().matmul(&m);
    let trace = |v: &[f64]| psi.tmatvec(v);
    let values = [
        trace(ops.value_trace(Side::Left)),
        trace(ops.value_trace(Side::Right)),
    ];
    let derivs = [
        trace(ops.deriv_trace(Side::Left)),
        trace(ops.deriv_trace(Side::Right)),
    ];
    Ok(DiagonalBasis {
        psi,
        inverse,
        lambda,
        values,
        derivs,
    })
}

impl DiagonalBasis {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Eigenvector matrix, columns `ψ_k`.
    pub fn psi(&self) -> &DenseMatrix {
        &self.psi
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    /// Index of the constant mode.
    pub fn zero_index(&self) -> usize {
        0
    }

    /// `Ψᵀ b_X`: modal values at the endpoint.
    pub fn modal_value_trace(&self, side: Side) -> &[f64] {
        &self.values[side_index(side)]
    }

    /// `Ψᵀ d_X`: modal derivatives at the endpoint.
    pub fn modal_deriv_trace(&self, side: Side) -> &[f64] {
        &self.derivs[side_index(side)]
    }

    /// Nodal → modal along one axis: `Ψᵀ M x`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.inverse.matvec(x)
    }

    /// Modal → nodal along one axis: `Ψ x`.
    pub fn backward(&self, x: &[f64]) -> Vec<f64> {
        self.psi.matvec(x)
    }

    fn trace_pair(&self, kind: SurfaceKind, x: Side, y: Side) -> (&[f64], &[f64]) {
        match kind {
            SurfaceKind::B => (self.modal_value_trace(x), self.modal_value_trace(y)),
            SurfaceKind::C => (self.modal_deriv_trace(x), self.modal_deriv_trace(y)),
            SurfaceKind::D => (self.modal_deriv_trace(x), self.modal_value_trace(y)),
            SurfaceKind::E => (self.modal_value_trace(x), self.modal_deriv_trace(y)),
        }
    }
}

fn check_len(bases: &[&DiagonalBasis], x: &[f64]) -> Result<Vec<usize>> {
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let total: usize = shape.iter().product();
    if x.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: x.len(),
        });
    }
    Ok(shape)
}

/// Nodal tensor → modal tensor, `⊗(Ψ_jᵀ M_j)`.
pub fn to_modal(bases: &[&DiagonalBasis], nodal: &[f64]) -> Result<Vec<f64>> {
    let shape = check_len(bases, nodal)?;
    let mut y = nodal.to_vec();
    for (axis, b) in bases.iter().enumerate() {
        map_fibers(&mut y, &shape, axis, |a, o| {
            o.copy_from_slice(&b.inverse.matvec(a))
        });
    }
    Ok(y)
}

/// Modal tensor → nodal tensor, `⊗Ψ_j`.
pub fn from_modal(bases: &[&DiagonalBasis], modal: &[f64]) -> Result<Vec<f64>> {
    let shape = check_len(bases, modal)?;
    let mut y = modal.to_vec();
    for (axis, b) in bases.iter().enumerate() {
        map_fibers(&mut y, &shape, axis, |a, o| {
            o.copy_from_slice(&b.psi.matvec(a))
        });
    }
    Ok(y)
}

/// Diagonal of `ΨᵀSΨ = Σ_j Λ_j` as a flat tensor.
pub fn volume_eigenvalues(bases: &[&DiagonalBasis]) -> Vec<f64> {
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    (0..total)
        .map(|flat| {
            crate::tensor::unravel(flat, &shape, &mut idx);
            idx.iter().zip(bases).map(|(&k, b)| b.lambda[k]).sum()
        })
        .collect()
}

/// `out = (Σ_j Λ_j) x`.
pub fn apply_transformed_volume(bases: &[&DiagonalBasis], modal: &[f64]) -> Result<Vec<f64>> {
    check_len(bases, modal)?;
    Ok(volume_eigenvalues(bases)
        .iter()
        .zip(modal)
        .map(|(l, x)| l * x)
        .collect())
}

/// `out += scale · (I ⊗ … ⊗ Ψ_jᵀ K^{X,Y} Ψ_j ⊗ … ⊗ I) x` applied as a
/// contraction with one transformed trace and an expansion with the other.
pub fn apply_transformed_lift(
    kind: SurfaceKind,
    bases: &[&DiagonalBasis],
    axis: usize,
    x_side: Side,
    y_side: Side,
    modal: &[f64],
    scale: f64,
    out: &mut [f64],
) -> Result<()> {
    let shape = check_len(bases, modal)?;
    check_len(bases, out)?;
    let (left, right) = bases[axis].trace_pair(kind, x_side, y_side);
    let face_len = modal.len() / shape[axis];
    let mut face = vec![0.0; face_len];
    contract_axis(modal, &shape, axis, right, &mut face);
    expand_axis(&face, &shape, axis, left, scale, out);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::GdBasis;

    fn basis(p: usize, n: usize) -> DiagonalBasis {
        diagonalize(&ElementOps1d::new(GdBasis::new(p, n).unwrap(), 1.0).unwrap()).unwrap()
    }

    #[test]
    fn hat_basis_three_modes() {
        let b = basis(1, 2);
        assert_eq!(b.len(), 3);
        assert_eq!(b.eigenvalues()[0], 0.0);
        let c = b.psi().column(0);
        assert!(c.iter().all(|v| (v - c[0]).abs() < 1e-12 && *v > 0.0));
    }

    #[test]
    fn round_trip_and_unit_vectors() {
        let b = basis(3, 9);
        let bs = [&b, &b];
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let back = from_modal(&bs, &to_modal(&bs, &x).unwrap()).unwrap();
        assert!(back.iter().zip(&x).all(|(a, c)| (a - c).abs() < 1e-10));
        let e3 = b.psi().column(3);
        let m = b.forward(&e3);
        for (k, v) in m.iter().enumerate() {
            assert!((v - if k == 3 { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_mode_is_zero_under_volume() {
        let b = basis(3, 9);
        let mut x = vec![0.0; 100];
        x[0] = 1.0;
        let y = apply_transformed_volume(&[&b, &b], &x).unwrap();
        assert!(y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shape_mismatch_reported() {
        let b = basis(1, 2);
        assert!(matches!(
            to_modal(&[&b], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
