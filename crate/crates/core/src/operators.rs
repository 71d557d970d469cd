//! Element matrices: 1D mass, stiffness and endpoint traces, plus
//! coefficient-weighted tensor-product assembly for variable media.

use crate::basis::{GdBasis, Side};
use crate::error::{Error, Result};
use crate::linalg::dense::DenseMatrix;
use crate::linalg::{CsrMatrix, SymBand};
use crate::quadrature::GaussLegendre;
use crate::tensor::{ravel, unravel};

/// Rank-one surface matrix families, `K^{X,Y}_{kl}`:
/// `B = φ_k(X)φ_l(Y)`, `C = φ'_k(X)φ'_l(Y)`, `D = φ'_k(X)φ_l(Y)`,
/// `E = φ_k(X)φ'_l(Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    B,
    C,
    D,
    E,
}

pub(crate) fn side_index(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// One-dimensional element operators on a physical element of given length.
#[derive(Debug, Clone)]
pub struct ElementOps1d {
    basis: GdBasis,
    length: f64,
    mass: SymBand,
    stiffness: SymBand,
    values: [Vec<f64>; 2],
    derivs: [Vec<f64>; 2],
    mean: Vec<f64>,
}

impl ElementOps1d {
    pub fn new(basis: GdBasis, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "element length must be positive, got {length}"
            )));
        }
        let p = basis.degree();
        let n = basis.len();
        let cells = basis.cells();
        let h = length / cells as f64;
        let gl = GaussLegendre::new(p + 1);
        let mut mass = SymBand::zeros(n, p);
        let mut stiffness = SymBand::zeros(n, p);
        let mut mean = vec![0.0; n];
        let mut vals = vec![0.0; p + 1];
        let mut ders = vec![0.0; p + 1];
        for cell in 0..cells {
            for (s, w) in gl.nodes.iter().zip(&gl.weights) {
                let first = basis.eval_cell(cell, *s, &mut vals, Some(&mut ders));
                for a in 0..=p {
                    mean[first + a] += w * h * vals[a];
                    for b in 0..=a {
                        mass.add(first + a, first + b, w * h * vals[a] * vals[b]);
                        // reference derivatives scale by 1/length
                        stiffness.add(
                            first + a,
                            first + b,
                            w * h * ders[a] * ders[b] / (length * length),
                        );
                    }
                }
            }
        }
        let mut values = [vec![0.0; n], vec![0.0; n]];
        let mut derivs = [vec![0.0; n], vec![0.0; n]];
        for (side, (cell, s)) in [(0usize, (0usize, 0.0)), (1, (cells - 1, 1.0))] {
            let first = basis.eval_cell(cell, s, &mut vals, Some(&mut ders));
            for a in 0..=p {
                values[side][first + a] = vals[a];
                derivs[side][first + a] = ders[a] / length;
            }
            // cardinality makes the value trace exactly a unit vector
            for v in values[side].iter_mut() {
                if v.abs() < 1e-13 {
                    *v = 0.0;
                }
            }
        }
        Ok(Self {
            basis,
            length,
            mass,
            stiffness,
            values,
            derivs,
            mean,
        })
    }

    pub fn basis(&self) -> &GdBasis {
        &self.basis
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mass(&self) -> &SymBand {
        &self.mass
    }

    pub fn stiffness(&self) -> &SymBand {
        &self.stiffness
    }

    /// `φ_k(X)` for all k.
    pub fn value_trace(&self, side: Side) -> &[f64] {
        &self.values[side_index(side)]
    }

    /// Physical derivative `dφ_k/dx(X)` taken from inside the element.
    pub fn deriv_trace(&self, side: Side) -> &[f64] {
        &self.derivs[side_index(side)]
    }

    /// `m_k = ∫ φ_k`.
    pub fn mean_vector(&self) -> &[f64] {
        &self.mean
    }

    /// Dense `K^{X,Y}` built from the trace outer product.
    pub fn surface_matrix(&self, kind: SurfaceKind, x: Side, y: Side) -> DenseMatrix {
        let (left, right) = match kind {
            SurfaceKind::B => (self.value_trace(x), self.value_trace(y)),
            SurfaceKind::C => (self.deriv_trace(x), self.deriv_trace(y)),
            SurfaceKind::D => (self.deriv_trace(x), self.value_trace(y)),
            SurfaceKind::E => (self.value_trace(x), self.deriv_trace(y)),
        };
        DenseMatrix::from_fn(self.len(), self.len(), |k, l| left[k] * right[l])
    }
}

/// Integrand family for [`assemble_weighted`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightedKind {
    /// `∫ w φ_I φ_J`
    Mass,
    /// `∫ w ∇φ_I · ∇φ_J`
    Stiffness,
}

/// Tensor-band sparsity: multi-indices differing by at most `p` per axis.
fn tensor_band_pattern(shape: &[usize], p: usize) -> CsrMatrix {
    let total: usize = shape.iter().product();
    let d = shape.len();
    let mut idx = vec![0usize; d];
    let mut rows = Vec::with_capacity(total);
    for flat in 0..total {
        unravel(flat, shape, &mut idx);
        let lo: Vec<usize> = idx.iter().map(|&i| i.saturating_sub(p)).collect();
        let hi: Vec<usize> = idx
            .iter()
            .zip(shape)
            .map(|(&i, &n)| (i + p).min(n - 1))
            .collect();
        let extent: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| b - a + 1).collect();
        let count: usize = extent.iter().product();
        let mut cols = Vec::with_capacity(count);
        let mut off = vec![0usize; d];
        let mut j = vec![0usize; d];
        for c in 0..count {
            unravel(c, &extent, &mut off);
            for m in 0..d {
                j[m] = lo[m] + off[m];
            }
            cols.push(ravel(&j, shape));
        }
        cols.sort_unstable();
        rows.push(cols);
    }
    CsrMatrix::from_pattern(total, rows)
}

/// Assemble `∫ w(x) φ_I φ_J` or `∫ w(x) ∇φ_I·∇φ_J` over the box
/// `origin + [0, lengths]` with `points` Gauss points per cell per axis.
/// An empty `bases` slice yields the 1×1 point evaluation `w(origin)`.
pub fn assemble_weighted(
    bases: &[&GdBasis],
    origin: &[f64],
    lengths: &[f64],
    weight: &dyn Fn(&[f64]) -> f64,
    kind: WeightedKind,
    points: usize,
) -> Result<CsrMatrix> {
    let d = bases.len();
    let check = |x: &[f64], w: f64| {
        if w > 0.0 && w.is_finite() {
            Ok(())
        } else {
            Err(Error::NonpositiveCoefficient {
                value: w,
                location: x.to_vec(),
            })
        }
    };
    if d == 0 {
        let w = weight(origin);
        check(origin, w)?;
        let mut m = CsrMatrix::from_pattern(1, vec![vec![0]]);
        m.add(0, 0, w);
        return Ok(m);
    }
    let p = bases[0].degree();
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let cells: Vec<usize> = bases.iter().map(|b| b.cells()).collect();
    let mut out = tensor_band_pattern(&shape, p);
    let gl = GaussLegendre::new(points);
    let np = points;
    let w1 = p + 1;

    // per axis, per cell: first index, values and physical derivatives at
    // each quadrature point
    struct AxisTable {
        first: Vec<usize>,
        vals: Vec<f64>,
        ders: Vec<f64>,
    }
    let tables: Vec<AxisTable> = bases
        .iter()
        .zip(lengths)
        .map(|(b, &len)| {
            let nc = b.cells();
            let mut t = AxisTable {
                first: vec![0; nc],
                vals: vec![0.0; nc * np * w1],
                ders: vec![0.0; nc * np * w1],
            };
            for c in 0..nc {
                for (q, s) in gl.nodes.iter().enumerate() {
                    let o = (c * np + q) * w1;
                    let (v, dv) = (&mut t.vals[o..o + w1], &mut t.ders[o..o + w1]);
                    let mut tmp = vec![0.0; w1];
                    t.first[c] = b.eval_cell(c, *s, v, Some(&mut tmp));
                    for (a, x) in dv.iter_mut().zip(&tmp) {
                        *a = x / len;
                    }
                }
            }
            t
        })
        .collect();

    let nloc = w1.pow(d as u32);
    let local_shape = vec![w1; d];
    let quad_shape = vec![np; d];
    let nquad = np.pow(d as u32);
    let ncells: usize = cells.iter().product();
    let mut cidx = vec![0usize; d];
    let mut qidx = vec![0usize; d];
    let mut aidx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut local = vec![0.0; nloc * nloc];
    let mut phi = vec![0.0; nloc];
    let mut grad = vec![0.0; nloc * d];
    let mut global = vec![0usize; nloc];
    let mut gi = vec![0usize; d];
    for cflat in 0..ncells {
        unravel(cflat, &cells, &mut cidx);
        local.fill(0.0);
        for qflat in 0..nquad {
            unravel(qflat, &quad_shape, &mut qidx);
            let mut wq = 1.0;
            for m in 0..d {
                let h = lengths[m] / cells[m] as f64;
                x[m] = origin[m] + h * (cidx[m] as f64 + gl.nodes[qidx[m]]);
                wq *= gl.weights[qidx[m]] * h;
            }
            let c2 = weight(&x);
            check(&x, c2)?;
            let wq = wq * c2;
            for a in 0..nloc {
                unravel(a, &local_shape, &mut aidx);
                let mut v = 1.0;
                for m in 0..d {
                    let o = (cidx[m] * np + qidx[m]) * w1 + aidx[m];
                    v *= tables[m].vals[o];
                }
                phi[a] = v;
                if kind == WeightedKind::Stiffness {
                    for j in 0..d {
                        let mut g = 1.0;
                        for m in 0..d {
                            let o = (cidx[m] * np + qidx[m]) * w1 + aidx[m];
                            g *= if m == j {
                                tables[m].ders[o]
                            } else {
                                tables[m].vals[o]
                            };
                        }
                        grad[a * d + j] = g;
                    }
                }
            }
            for a in 0..nloc {
                for b in 0..nloc {
                    let integrand = match kind {
                        WeightedKind::Mass => phi[a] * phi[b],
                        WeightedKind::Stiffness => {
                            (0..d).map(|j| grad[a * d + j] * grad[b * d + j]).sum()
                        }
                    };
                    local[a * nloc + b] += wq * integrand;
                }
            }
        }
        for a in 0..nloc {
            unravel(a, &local_shape, &mut aidx);
            for m in 0..d {
                gi[m] = tables[m].first[cidx[m]] + aidx[m];
            }
            global[a] = ravel(&gi, &shape);
        }
        for a in 0..nloc {
            for b in 0..nloc {
                out.add(global[a], global[b], local[a * nloc + b]);
            }
        }
    }
    Ok(out)
}

/// `S_{c²}` on a tensor-product element, `p + 3` Gauss points per cell.
pub fn assemble_variable_stiffness(
    bases: &[&GdBasis],
    origin: &[f64],
    lengths: &[f64],
    c2: &dyn Fn(&[f64]) -> f64,
) -> Result<CsrMatrix> {
    let points = bases.first().map_or(1, |b| b.degree() + 3);
    assemble_weighted(bases, origin, lengths, c2, WeightedKind::Stiffness, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_function_rows() {
        let ops = ElementOps1d::new(GdBasis::new(1, 4).unwrap(), 1.0).unwrap();
        let h = 0.25;
        let (m, s) = (ops.mass(), ops.stiffness());
        assert!((m.get(2, 1) - h / 6.0).abs() < 1e-15);
        assert!((m.get(2, 2) - 2.0 * h / 3.0).abs() < 1e-15);
        assert!((s.get(2, 2) - 2.0 / h).abs() < 1e-12);
        assert!((s.get(2, 3) + 1.0 / h).abs() < 1e-12);
    }

    #[test]
    fn stiffness_annihilates_constants_and_mass_rows_sum_to_mean() {
        let ops = ElementOps1d::new(GdBasis::new(5, 12).unwrap(), 0.7).unwrap();
        let ones = vec![1.0; ops.len()];
        let s1 = ops.stiffness().matvec(&ones);
        let scale = ops.stiffness().to_dense().max_abs();
        assert!(s1.iter().all(|v| v.abs() <= 1e-12 * scale));
        let m1 = ops.mass().matvec(&ones);
        for (a, b) in m1.iter().zip(ops.mean_vector()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((ops.mean_vector().iter().sum::<f64>() - 0.7).abs() < 1e-14);
    }

    #[test]
    fn scaling_with_length() {
        let b = GdBasis::new(3, 9).unwrap();
        let a = ElementOps1d::new(b.clone(), 1.0).unwrap();
        let c = ElementOps1d::new(b, 2.0).unwrap();
        let n = a.len();
        for i in 0..n {
            for j in 0..n {
                assert!((c.mass().get(i, j) - 2.0 * a.mass().get(i, j)).abs() < 1e-14);
                assert!((c.stiffness().get(i, j) - 0.5 * a.stiffness().get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_nonzero_counts() {
        for p in [1, 3, 5, 7] {
            let ops = ElementOps1d::new(GdBasis::new(p, 2 * p + 3).unwrap(), 1.0).unwrap();
            for side in [Side::Left, Side::Right] {
                assert_eq!(
                    ops.value_trace(side).iter().filter(|v| **v != 0.0).count(),
                    1
                );
                assert!(ops.deriv_trace(side).iter().filter(|v| **v != 0.0).count() <= p + 1);
            }
        }
    }

    #[test]
    fn point_evaluation_for_empty_bases() {
        let m =
            assemble_weighted(&[], &[0.3], &[], &|x| 2.0 + x[0], WeightedKind::Mass, 1).unwrap();
        assert_eq!(m.size(), 1);
        assert!((m.get(0, 0) - 2.3).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_coefficient_rejected() {
        let b = GdBasis::new(1, 2).unwrap();
        let err = assemble_variable_stiffness(&[&b], &[0.0], &[1.0], &|x| x[0] - 0.5).unwrap_err();
        assert!(matches!(err, Error::NonpositiveCoefficient { .. }));
    }
}
