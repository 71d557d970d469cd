//! Bloch-wave dispersion analysis and spectral radius of the 1D
//! semi-discrete operator.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{GdBasis, Side};
use crate::error::Result;
use crate::linalg::dense::DenseMatrix;
use crate::linalg::eigen::{eigen_decomposition, eigenvalues, ComplexMatrix};
use crate::operators::ElementOps1d;
use crate::semidisc::{
    Boundary, FieldState, FluxScheme, Medium, Mesh, NoSource, Path, Semidiscretization,
};

/// Coupling of element `k` to its neighbours in a uniform 1D mesh:
/// `dZ_k/dt = A₋ Z_{k−1} + A₀ Z_k + A₊ Z_{k+1}` with `Z = (U, V)`.
#[derive(Debug, Clone)]
pub struct ElementBlocks {
    pub minus: DenseMatrix,
    pub center: DenseMatrix,
    pub plus: DenseMatrix,
    /// Element length.
    pub length: f64,
    pub speed: f64,
}

/// Linear functional of `(Z_{k−1}, Z_k, Z_{k+1})`.
#[derive(Clone)]
struct Functional([Vec<f64>; 3]);

impl Functional {
    fn zero(n: usize) -> Self {
        Self([vec![0.0; 2 * n], vec![0.0; 2 * n], vec![0.0; 2 * n]])
    }

    /// `w · U` (or `V` when `v_part`) of the given element offset.
    fn pick(n: usize, block: usize, v_part: bool, w: &[f64], scale: f64) -> Self {
        let mut f = Self::zero(n);
        let off = if v_part { n } else { 0 };
        for (i, x) in w.iter().enumerate() {
            f.0[block][off + i] = scale * x;
        }
        f
    }

    fn combine(terms: &[(f64, &Functional)]) -> Self {
        let n = terms[0].1 .0[0].len() / 2;
        let mut out = Self::zero(n);
        for (a, f) in terms {
            for b in 0..3 {
                for (o, x) in out.0[b].iter_mut().zip(&f.0[b]) {
                    *o += a * x;
                }
            }
        }
        out
    }
}

/// Neighbour coupling blocks derived directly from the face fluxes.
pub fn element_blocks(ops: &ElementOps1d, scheme: &FluxScheme, c: f64) -> Result<ElementBlocks> {
    let n = ops.len();
    let (bl, br) = (ops.value_trace(Side::Left), ops.value_trace(Side::Right));
    let (dl, dr) = (ops.deriv_trace(Side::Left), ops.deriv_trace(Side::Right));
    let (alpha, beta, tau) = (scheme.alpha, scheme.beta, scheme.tau);
    let (prev, own, next) = (0, 1, 2);

    // right face: own weight α, neighbour k+1 seen through its left face
    let r_v = Functional::pick(n, own, true, br, 1.0);
    let r_dn = Functional::pick(n, own, false, dr, 1.0);
    let r_ov = Functional::pick(n, next, true, bl, 1.0);
    let r_odn = Functional::pick(n, next, false, dl, -1.0);
    // left face: own weight 1−α, neighbour k−1 seen through its right face
    let l_v = Functional::pick(n, own, true, bl, 1.0);
    let l_dn = Functional::pick(n, own, false, dl, -1.0);
    let l_ov = Functional::pick(n, prev, true, br, 1.0);
    let l_odn = Functional::pick(n, prev, false, dr, 1.0);

    let fu = |a: f64, v: &Functional, dn: &Functional, ov: &Functional, odn: &Functional| {
        Functional::combine(&[(a - 1.0, v), (1.0 - a, ov), (-beta, dn), (-beta, odn)])
    };
    let fv = |a: f64, v: &Functional, dn: &Functional, ov: &Functional, odn: &Functional| {
        Functional::combine(&[(1.0 - a, dn), (-a, odn), (-tau, v), (tau, ov)])
    };
    let fu_r = fu(alpha, &r_v, &r_dn, &r_ov, &r_odn);
    let fv_r = fv(alpha, &r_v, &r_dn, &r_ov, &r_odn);
    let fu_l = fu(1.0 - alpha, &l_v, &l_dn, &l_ov, &l_odn);
    let fv_l = fv(1.0 - alpha, &l_v, &l_dn, &l_ov, &l_odn);

    // constant-mode-consistent inverse of S and inverse of M
    let s = ops.stiffness().to_dense();
    let mut pinned = s.clone();
    pinned[(0, 0)] += s[(0, 0)].abs().max(1.0);
    let pinned_inv = pinned.inverse()?;
    let m = ops.mean_vector();
    let mtot: f64 = m.iter().sum();
    let proj = DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - m[j] / mtot);
    let s_inv = proj.matmul(&pinned_inv);
    let mass_inv = ops.mass().to_dense().inverse()?;
    let lift_u = DenseMatrix::from_fn(n, 2, |i, j| if j == 0 { dr[i] } else { -dl[i] });
    let lift_u = s_inv.matmul(&lift_u);
    let lift_v = DenseMatrix::from_fn(n, 2, |i, j| c * c * if j == 0 { br[i] } else { bl[i] });
    let lift_v = mass_inv.matmul(&lift_v);
    let mass_s = mass_inv.matmul(&s);

    let mut blocks = [
        DenseMatrix::zeros(2 * n, 2 * n),
        DenseMatrix::zeros(2 * n, 2 * n),
        DenseMatrix::zeros(2 * n, 2 * n),
    ];
    for (b, blk) in blocks.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..2 * n {
                blk[(i, j)] = lift_u[(i, 0)] * fu_r.0[b][j] + lift_u[(i, 1)] * fu_l.0[b][j];
                blk[(n + i, j)] = lift_v[(i, 0)] * fv_r.0[b][j] + lift_v[(i, 1)] * fv_l.0[b][j];
            }
        }
    }
    for i in 0..n {
        blocks[own][(i, n + i)] += 1.0;
        for j in 0..n {
            blocks[own][(n + i, j)] -= c * c * mass_s[(i, j)];
        }
    }
    let [minus, center, plus] = blocks;
    Ok(ElementBlocks {
        minus,
        center,
        plus,
        length: ops.length(),
        speed: c,
    })
}

/// `Â(K) = (H/c)(A₀ + e^{iK}A₊ + e^{−iK}A₋)` on a Bloch cell of `elements`
/// consecutive elements with phase `K` per element.
pub fn bloch_matrix_cell(blocks: &ElementBlocks, k: f64, elements: usize) -> ComplexMatrix {
    let n2 = blocks.center.rows();
    let size = n2 * elements;
    let scale = blocks.length / blocks.speed;
    let wrap = Complex64::from_polar(1.0, k * elements as f64);
    let mut a = ComplexMatrix::zeros(size);
    for e in 0..elements {
        let next = (e + 1) % elements;
        let prev = (e + elements - 1) % elements;
        let pf = if e + 1 == elements {
            wrap
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mf = if e == 0 {
            wrap.conj()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n2 {
            for j in 0..n2 {
                a[(e * n2 + i, e * n2 + j)] += blocks.center[(i, j)] * scale;
                a[(e * n2 + i, next * n2 + j)] += pf * blocks.plus[(i, j)] * scale;
                a[(e * n2 + i, prev * n2 + j)] += mf * blocks.minus[(i, j)] * scale;
            }
        }
    }
    a
}

/// Single-element Bloch matrix.
pub fn bloch_matrix(
    ops: &ElementOps1d,
    scheme: &FluxScheme,
    k: f64,
    c: f64,
) -> Result<ComplexMatrix> {
    Ok(bloch_matrix_cell(&element_blocks(ops, scheme, c)?, k, 1))
}

/// `Ω = Ω_r + iΩ_i` from an eigenvalue `−iΩ` of `Â`.
pub fn omega_from_eigenvalue(mu: Complex64) -> Complex64 {
    Complex64::new(-mu.im, mu.re)
}

#[derive(Debug, Clone)]
pub struct DispersionResult {
    pub k: Vec<f64>,
    /// All `Ω` per K, sorted by `Ω_r`.
    pub omega: Vec<Vec<Complex64>>,
    /// Index into `omega[i]` of the physical mode.
    pub physical: Vec<usize>,
    /// Plane-wave correlation of each mode, same layout as `omega`.
    pub correlation: Vec<Vec<f64>>,
}

impl DispersionResult {
    pub fn physical_omega(&self, i: usize) -> Complex64 {
        self.omega[i][self.physical[i]]
    }
}

/// Eigenvalues of `Â(K)` over a K grid with the physical mode picked by
/// correlation of the `U` part of each eigenvector with the sampled plane
/// wave `e^{iKx/H}`.
pub fn dispersion_sweep(
    p: usize,
    cells: usize,
    scheme: &FluxScheme,
    ks: &[f64],
    elements: usize,
) -> Result<DispersionResult> {
    let ops = ElementOps1d::new(GdBasis::new(p, cells)?, 1.0)?;
    let blocks = element_blocks(&ops, scheme, 1.0)?;
    let n = ops.len();
    let rows: Vec<(Vec<Complex64>, Vec<f64>, usize)> = ks
        .par_iter()
        .map(|&k| -> Result<_> {
            let a = bloch_matrix_cell(&blocks, k, elements);
            let mut modes: Vec<(Complex64, f64)> = eigen_decomposition(&a)?
                .into_iter()
                .map(|(mu, z)| {
                    let mut dotp = Complex64::new(0.0, 0.0);
                    let mut zz = 0.0;
                    let mut ww = 0.0;
                    for e in 0..elements {
                        for l in 0..n {
                            let w = Complex64::from_polar(
                                1.0,
                                k * (e as f64 + l as f64 / cells as f64),
                            );
                            let zu = z[e * 2 * n + l];
                            dotp += zu * w.conj();
                            zz += zu.norm_sqr();
                            ww += 1.0;
                        }
                    }
                    let corr = if zz > 0.0 {
                        dotp.norm() / (zz * ww).sqrt()
                    } else {
                        0.0
                    };
                    (omega_from_eigenvalue(mu), corr)
                })
                .collect();
            modes.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
            let candidates: Vec<usize> =
                (0..modes.len()).filter(|&i| modes[i].0.re > 0.0).collect();
            let pool: Vec<usize> = if candidates.is_empty() {
                (0..modes.len()).collect()
            } else {
                candidates
            };
            let phys = pool
                .iter()
                .copied()
                .max_by(|&i, &j| modes[i].1.total_cmp(&modes[j].1))
                .unwrap_or(0);
            Ok((
                modes.iter().map(|m| m.0).collect(),
                modes.iter().map(|m| m.1).collect(),
                phys,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = DispersionResult {
        k: ks.to_vec(),
        omega: Vec::with_capacity(ks.len()),
        physical: Vec::with_capacity(ks.len()),
        correlation: Vec::with_capacity(ks.len()),
    };
    for (o, c, p) in rows {
        out.omega.push(o);
        out.correlation.push(c);
        out.physical.push(p);
    }
    Ok(out)
}

/// Role of one Bloch mode at phase `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    /// `Ω = 0`: piecewise-constant displacement, invisible to the energy.
    Stationary,
    /// Tracks `±K'` for some alias `K' = K + 2πj/elements` within the
    /// relative tolerance, i.e. a resolved left- or right-going wave.
    Resolved,
    Spurious,
}

/// Classify `omega` (scaled so the exact branches are `Ω = ±K'`) by its
/// distance to the aliased exact dispersion relation.
pub fn classify_mode(omega: Complex64, k: f64, elements: usize, rel_tol: f64) -> ModeClass {
    if omega.norm() <= 1e-8 {
        return ModeClass::Stationary;
    }
    let period = 2.0 * std::f64::consts::PI / elements as f64;
    let w = omega.re.abs();
    // nearest alias of ±K to |Ω_r|
    let resolved = [k, -k].iter().any(|&kk| {
        let j = ((w - kk) / period).round();
        let alias = kk + j * period;
        (w - alias).abs() <= rel_tol * alias.abs().max(1.0)
    });
    if resolved {
        ModeClass::Resolved
    } else {
        ModeClass::Spurious
    }
}

/// Boundary set-up for spectral-radius studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumBoundary {
    Periodic,
    /// Dirichlet on the left end, Neumann on the right.
    DirichletNeumann,
}

/// Dense global operator `ℒ` with `dZ/dt = ℒZ`, assembled column by column
/// from the right-hand side of a nodal semi-discretisation.
pub fn global_operator(semi: &Semidiscretization) -> Result<DenseMatrix> {
    let nelem = semi.mesh().element_count();
    let len = semi.mesh().element_len();
    let size = 2 * nelem * len;
    let cols: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let mut s = semi.zero_state();
            let (e, r) = (j / (2 * len), j % (2 * len));
            if r < len {
                s.u[e][r] = 1.0;
            } else {
                s.v[e][r - len] = 1.0;
            }
            let mut out: FieldState = s.zeros_like();
            semi.rhs(&s, &mut out)?;
            let mut col = Vec::with_capacity(size);
            for e in 0..nelem {
                col.extend_from_slice(&out.u[e]);
                col.extend_from_slice(&out.v[e]);
            }
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseMatrix::from_fn(size, size, |i, j| cols[j][i]))
}

/// Eigenvalues of `ℒ` for a 1D problem on `[0, 1]` with `c = 1`.
pub fn operator_spectrum(
    p: usize,
    cells: usize,
    elements: usize,
    scheme: &FluxScheme,
    bc: SpectrumBoundary,
) -> Result<Vec<Complex64>> {
    let bcs = match bc {
        SpectrumBoundary::Periodic => vec![Boundary::Periodic, Boundary::Periodic],
        SpectrumBoundary::DirichletNeumann => vec![Boundary::Dirichlet, Boundary::Neumann],
    };
    let mesh = Mesh::new(vec![elements], cells, vec![0.0], vec![1.0], bcs)?;
    let semi = Semidiscretization::new(
        mesh,
        p,
        *scheme,
        Medium::Constant(1.0),
        Arc::new(NoSource),
        Path::Direct,
    )?;
    let l = global_operator(&semi)?;
    eigenvalues(&ComplexMatrix::from_real(&l))
}

/// `ρ(ℒ) = max |λ|`.
pub fn spectral_radius(
    p: usize,
    cells: usize,
    elements: usize,
    scheme: &FluxScheme,
    bc: SpectrumBoundary,
) -> Result<f64> {
    Ok(operator_spectrum(p, cells, elements, scheme, bc)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Largest real part over eigenvalues with `|λ| > null_tol · ρ`, and the
/// number of eigenvalues in the excluded cluster around zero. On periodic
/// meshes the constant displacement/velocity pair forms a Jordan block at
/// zero, which a backward-stable eigensolver splits by `O(√ε ρ)` in an
/// arbitrary direction.
pub fn max_real_part(ev: &[Complex64], null_tol: f64) -> (f64, usize) {
    let rho = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut nulls = 0;
    let mut max_re = f64::NEG_INFINITY;
    for z in ev {
        if z.norm() <= null_tol * rho {
            nulls += 1;
        } else {
            max_re = max_re.max(z.re);
        }
    }
    (max_re, nulls)
}

/// Largest RK4-stable CFL number (`dt = cfl · h / c`) for a spectral radius
/// `rho` measured on cells of width `h`, reduced by `safety`. Uses the RK4
/// imaginary-axis stability limit `2√2` and a `d`-fold growth of `ρ` in
/// `d` dimensions.
pub fn stable_cfl(rho: f64, h: f64, dims: usize, safety: f64) -> f64 {
    safety * 2.0 * std::f64::consts::SQRT_2 / (dims as f64 * rho * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops() -> ElementOps1d {
        ElementOps1d::new(GdBasis::new(3, 9).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn bloch_matrix_is_two_pi_periodic() {
        let o = ops();
        let s = FluxScheme::upwind(1.0).unwrap();
        let a = bloch_matrix(&o, &s, 0.7, 1.0).unwrap();
        let b = bloch_matrix(&o, &s, 0.7 + 2.0 * std::f64::consts::PI, 1.0).unwrap();
        for i in 0..a.size() {
            for j in 0..a.size() {
                assert!((a[(i, j)] - b[(i, j)]).norm() < 1e-10 * (1.0 + a[(i, j)].norm()));
            }
        }
    }

    #[test]
    fn zero_phase_has_stationary_constants() {
        let o = ops();
        let a = bloch_matrix(&o, &FluxScheme::central(), 0.0, 1.0).unwrap();
        let n = o.len();
        let z: Vec<Complex64> = (0..2 * n)
            .map(|i| Complex64::new(if i < n { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let az = a.matvec(&z);
        assert!(az.iter().all(|x| x.norm() < 1e-9));
    }

    #[test]
    fn omega_mapping() {
        // eigenvalue −iΩ with Ω = 2 − 0.1i
        let omega = Complex64::new(2.0, -0.1);
        let mu = Complex64::new(0.0, -1.0) * omega;
        assert!((omega_from_eigenvalue(mu) - omega).norm() < 1e-15);
    }
}
