//! Element kernels: the per-element linear algebra behind the three
//! evolution paths.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use super::{Face, FaceFlux, Medium, Mesh, Telemetry};
use crate::basis::GdBasis;
use crate::error::{Error, Result};
use crate::fastpath::{diagonalize, from_modal, to_modal, volume_eigenvalues, DiagonalBasis};
use crate::linalg::augment::default_sigma;
use crate::linalg::banded::BandCholesky;
use crate::linalg::kron::kron_apply;
use crate::linalg::{
    pcg_solve, AugmentedOperator, CsrMatrix, IncompleteCholesky, KroneckerFactorization, SymBand,
};
use crate::operators::{
    assemble_variable_stiffness, assemble_weighted, ElementOps1d, WeightedKind,
};
use crate::tensor::{contract_axis, expand_axis, unravel};

/// How element systems are solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Path {
    /// Modal state in the simultaneously diagonalised basis; constant `c`.
    Fast,
    /// Nodal state, banded Cholesky solves; constant `c`.
    Direct,
    /// Nodal state, PCG with IC(0) on `S_{c²}` and `M`; any medium.
    Iterative { rel_tol: f64, max_iter: usize },
}

pub(crate) trait Kernel: Send + Sync {
    fn basis(&self) -> &GdBasis;
    /// `(v, ∇u·n)` on a face in the kernel's tangential representation.
    fn traces(&self, elem: usize, u: &[f64], v: &[f64], face: Face) -> (Vec<f64>, Vec<f64>);
    fn face_from_nodal(&self, face: Face, g: &[f64]) -> Vec<f64>;
    fn from_nodal(&self, x: &[f64]) -> Vec<f64>;
    fn to_nodal(&self, x: &[f64]) -> Vec<f64>;
    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        elem: usize,
        u: &[f64],
        v: &[f64],
        fluxes: &[FaceFlux],
        forcing: Option<&[f64]>,
        du: &mut [f64],
        dv: &mut [f64],
    ) -> Result<()>;
    fn energy(&self, elem: usize, u: &[f64], v: &[f64]) -> f64;
    fn counters(&self) -> &Counters;

    fn telemetry(&self) -> Telemetry {
        self.counters().snapshot()
    }
    fn reset_telemetry(&self) {
        self.counters().reset();
    }
    fn count_rhs(&self) {
        self.counters().rhs.fetch_add(1, Ordering::Relaxed);
    }
}

#[derive(Debug, Default)]
pub(crate) struct Counters {
    rhs: AtomicU64,
    u_solves: AtomicU64,
    u_iters: AtomicU64,
    v_solves: AtomicU64,
    v_iters: AtomicU64,
    flops: AtomicU64,
}

impl Counters {
    fn snapshot(&self) -> Telemetry {
        Telemetry {
            rhs_evaluations: self.rhs.load(Ordering::Relaxed),
            pcg_u_solves: self.u_solves.load(Ordering::Relaxed),
            pcg_u_iterations: self.u_iters.load(Ordering::Relaxed),
            pcg_v_solves: self.v_solves.load(Ordering::Relaxed),
            pcg_v_iterations: self.v_iters.load(Ordering::Relaxed),
            flops: self.flops.load(Ordering::Relaxed),
        }
    }

    fn reset(&self) {
        for c in [
            &self.rhs,
            &self.u_solves,
            &self.u_iters,
            &self.v_solves,
            &self.v_iters,
            &self.flops,
        ] {
            c.store(0, Ordering::Relaxed);
        }
    }

    fn add_flops(&self, n: u64) {
        self.flops.fetch_add(n, Ordering::Relaxed);
    }
}

pub(crate) fn build_kernel(
    mesh: &Mesh,
    basis: GdBasis,
    medium: &Medium,
    path: Path,
) -> Result<Box<dyn Kernel>> {
    let ops = (0..mesh.dims())
        .map(|a| ElementOps1d::new(basis.clone(), mesh.element_size(a)))
        .collect::<Result<Vec<_>>>()?;
    let constant = match medium {
        Medium::Constant(c) => Some(*c),
        Medium::Variable { .. } => None,
    };
    if let Some(c) = constant {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonpositiveCoefficient {
                value: c * c,
                location: vec![],
            });
        }
    }
    Ok(match (path, constant) {
        (Path::Fast, Some(c)) => Box::new(FastKernel::new(basis, ops, c)?),
        (Path::Direct, Some(c)) => Box::new(DirectKernel::new(basis, ops, c)?),
        (Path::Fast | Path::Direct, None) => {
            return Err(Error::FastPathUnavailable(
                "variable sound speed requires the iterative path".into(),
            ))
        }
        (Path::Iterative { rel_tol, max_iter }, _) => {
            if !(rel_tol > 0.0 && rel_tol < 1.0) || max_iter == 0 {
                return Err(Error::InvalidConfig(format!(
                    "PCG tolerance must lie in (0,1) and iterations be positive, got {rel_tol}, {max_iter}"
                )));
            }
            Box::new(IterativeKernel::new(
                mesh, basis, ops, medium, rel_tol, max_iter,
            )?)
        }
    })
}

/// Tensor product of 1D vectors, axis 0 fastest.
fn outer(vectors: &[&[f64]]) -> Vec<f64> {
    let shape: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
    let total: usize = shape.iter().product();
    let mut idx = vec![0; shape.len()];
    (0..total)
        .map(|flat| {
            unravel(flat, &shape, &mut idx);
            idx.iter().zip(vectors).map(|(&i, v)| v[i]).product()
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Ŝ = Σ_j M ⊗ … ⊗ S_j ⊗ … ⊗ M` as a symmetric band matrix.
pub(crate) fn stiffness_band(ops: &[ElementOps1d]) -> SymBand {
    let shape: Vec<usize> = ops.iter().map(ElementOps1d::len).collect();
    let total: usize = shape.iter().product();
    let p = ops[0].basis().degree();
    let d = shape.len();
    let strides: Vec<usize> = (0..d).map(|a| shape[..a].iter().product()).collect();
    let bw: usize = strides.iter().map(|s| p * s).sum();
    let mut out = SymBand::zeros(total, bw.min(total.saturating_sub(1)));
    let mut i = vec![0; d];
    let mut j = vec![0; d];
    for fi in 0..total {
        unravel(fi, &shape, &mut i);
        for fj in fi..(fi + bw + 1).min(total) {
            unravel(fj, &shape, &mut j);
            if (0..d).any(|a| i[a].abs_diff(j[a]) > p) {
                continue;
            }
            let mut sum = 0.0;
            for axis in 0..d {
                let mut term = 1.0;
                for a in 0..d {
                    term *= if a == axis {
                        ops[a].stiffness().get(i[a], j[a])
                    } else {
                        ops[a].mass().get(i[a], j[a])
                    };
                }
                sum += term;
            }
            if sum != 0.0 {
                out.set(fi, fj, sum);
            }
        }
    }
    out
}

/// Nodal traces shared by the direct and iterative kernels.
struct NodalGeometry {
    basis: GdBasis,
    ops: Vec<ElementOps1d>,
    shape: Vec<usize>,
}

impl NodalGeometry {
    fn traces(&self, u: &[f64], v: &[f64], face: Face) -> (Vec<f64>, Vec<f64>) {
        let a = face.axis;
        let n = u.len() / self.shape[a];
        let mut tv = vec![0.0; n];
        let mut tdn = vec![0.0; n];
        contract_axis(
            v,
            &self.shape,
            a,
            self.ops[a].value_trace(face.side),
            &mut tv,
        );
        contract_axis(
            u,
            &self.shape,
            a,
            self.ops[a].deriv_trace(face.side),
            &mut tdn,
        );
        let s = face.normal();
        tdn.iter_mut().for_each(|x| *x *= s);
        (tv, tdn)
    }
}

struct FastKernel {
    basis: GdBasis,
    bases: Vec<DiagonalBasis>,
    shape: Vec<usize>,
    c2: f64,
    lambda: Vec<f64>,
    inv_lambda: Vec<f64>,
    counters: Counters,
}

impl FastKernel {
    fn new(basis: GdBasis, ops: Vec<ElementOps1d>, c: f64) -> Result<Self> {
        let bases = ops.iter().map(diagonalize).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&DiagonalBasis> = bases.iter().collect();
        let lambda = volume_eigenvalues(&refs);
        let inv_lambda = lambda
            .iter()
            .enumerate()
            .map(|(i, &l)| if i == 0 { 0.0 } else { 1.0 / l })
            .collect();
        let shape = bases.iter().map(DiagonalBasis::len).collect();
        Ok(Self {
            basis,
            bases,
            shape,
            c2: c * c,
            lambda,
            inv_lambda,
            counters: Counters::default(),
        })
    }

    fn refs(&self) -> Vec<&DiagonalBasis> {
        self.bases.iter().collect()
    }
}

impl Kernel for FastKernel {
    fn basis(&self) -> &GdBasis {
        &self.basis
    }

    fn traces(&self, _elem: usize, u: &[f64], v: &[f64], face: Face) -> (Vec<f64>, Vec<f64>) {
        let a = face.axis;
        let b = &self.bases[a];
        let n = u.len() / self.shape[a];
        let mut tv = vec![0.0; n];
        let mut tdn = vec![0.0; n];
        contract_axis(v, &self.shape, a, b.modal_value_trace(face.side), &mut tv);
        contract_axis(u, &self.shape, a, b.modal_deriv_trace(face.side), &mut tdn);
        let s = face.normal();
        tdn.iter_mut().for_each(|x| *x *= s);
        self.counters.add_flops(4 * u.len() as u64 + n as u64);
        (tv, tdn)
    }

    fn face_from_nodal(&self, face: Face, g: &[f64]) -> Vec<f64> {
        let tang: Vec<&DiagonalBasis> = (0..self.bases.len())
            .filter(|&a| a != face.axis)
            .map(|a| &self.bases[a])
            .collect();
        to_modal(&tang, g).expect("face data length")
    }

    fn from_nodal(&self, x: &[f64]) -> Vec<f64> {
        to_modal(&self.refs(), x).expect("element vector length")
    }

    fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        from_modal(&self.refs(), x).expect("element vector length")
    }

    fn finish(
        &self,
        _elem: usize,
        u: &[f64],
        v: &[f64],
        fluxes: &[FaceFlux],
        forcing: Option<&[f64]>,
        du: &mut [f64],
        dv: &mut [f64],
    ) -> Result<()> {
        let len = u.len();
        du.fill(0.0);
        dv.fill(0.0);
        for (f, fl) in Face::all(self.shape.len()).zip(fluxes) {
            let b = &self.bases[f.axis];
            expand_axis(
                &fl.fu,
                &self.shape,
                f.axis,
                b.modal_deriv_trace(f.side),
                f.normal(),
                du,
            );
            expand_axis(
                &fl.fv,
                &self.shape,
                f.axis,
                b.modal_value_trace(f.side),
                self.c2,
                dv,
            );
        }
        for i in 0..len {
            du[i] = v[i] + du[i] * self.inv_lambda[i];
            dv[i] -= self.c2 * self.lambda[i] * u[i];
        }
        // the constant mode obeys dŪ₀/dt = V̄₀ alone
        du[0] = v[0];
        if let Some(f) = forcing {
            for (x, y) in dv.iter_mut().zip(f) {
                *x += y;
            }
        }
        self.counters
            .add_flops((fluxes.len() as u64) * 4 * len as u64 + 5 * len as u64);
        Ok(())
    }

    fn energy(&self, _elem: usize, u: &[f64], v: &[f64]) -> f64 {
        0.5 * u
            .iter()
            .zip(v)
            .zip(&self.lambda)
            .map(|((a, b), l)| b * b + self.c2 * l * a * a)
            .sum::<f64>()
    }

    fn counters(&self) -> &Counters {
        &self.counters
    }
}

struct DirectKernel {
    geo: NodalGeometry,
    c2: f64,
    mass: KroneckerFactorization,
    stiffness: SymBand,
    pinned: BandCholesky,
    mean: Vec<f64>,
    mean_total: f64,
    counters: Counters,
}

impl DirectKernel {
    fn new(basis: GdBasis, ops: Vec<ElementOps1d>, c: f64) -> Result<Self> {
        let masses: Vec<SymBand> = ops.iter().map(|o| o.mass().clone()).collect();
        let mass = KroneckerFactorization::new(&masses)?;
        let stiffness = stiffness_band(&ops);
        let mut pinned_matrix = stiffness.clone();
        pinned_matrix.add(0, 0, stiffness.get(0, 0).abs().max(1.0));
        let pinned = pinned_matrix.cholesky()?;
        let means: Vec<&[f64]> = ops.iter().map(ElementOps1d::mean_vector).collect();
        let mean = outer(&means);
        let mean_total = mean.iter().sum();
        let shape = ops.iter().map(ElementOps1d::len).collect();
        Ok(Self {
            geo: NodalGeometry { basis, ops, shape },
            c2: c * c,
            mass,
            stiffness,
            pinned,
            mean,
            mean_total,
            counters: Counters::default(),
        })
    }

    fn tangential_mass(&self, face: Face, x: &[f64]) -> Vec<f64> {
        let tang: Vec<&SymBand> = (0..self.geo.ops.len())
            .filter(|&a| a != face.axis)
            .map(|a| self.geo.ops[a].mass())
            .collect();
        kron_apply(&tang, x)
    }
}

impl Kernel for DirectKernel {
    fn basis(&self) -> &GdBasis {
        &self.geo.basis
    }

    fn traces(&self, _elem: usize, u: &[f64], v: &[f64], face: Face) -> (Vec<f64>, Vec<f64>) {
        self.geo.traces(u, v, face)
    }

    fn face_from_nodal(&self, _face: Face, g: &[f64]) -> Vec<f64> {
        g.to_vec()
    }

    fn from_nodal(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn finish(
        &self,
        _elem: usize,
        u: &[f64],
        v: &[f64],
        fluxes: &[FaceFlux],
        forcing: Option<&[f64]>,
        du: &mut [f64],
        dv: &mut [f64],
    ) -> Result<()> {
        let shape = &self.geo.shape;
        let mut fu = vec![0.0; u.len()];
        let mut fv = vec![0.0; u.len()];
        for (f, fl) in Face::all(shape.len()).zip(fluxes) {
            let o = &self.geo.ops[f.axis];
            expand_axis(
                &self.tangential_mass(f, &fl.fu),
                shape,
                f.axis,
                o.deriv_trace(f.side),
                f.normal(),
                &mut fu,
            );
            expand_axis(
                &self.tangential_mass(f, &fl.fv),
                shape,
                f.axis,
                o.value_trace(f.side),
                self.c2,
                &mut fv,
            );
        }
        // Ŝ W = F_u with mᵀW = 0, solved through a pinned factorisation
        self.pinned.solve_in_place(&mut fu);
        let shift = dot(&self.mean, &fu) / self.mean_total;
        for i in 0..u.len() {
            du[i] = v[i] + fu[i] - shift;
        }
        let su = self.stiffness.matvec(u);
        for i in 0..u.len() {
            dv[i] = fv[i] - self.c2 * su[i];
        }
        self.mass.solve_in_place(dv)?;
        if let Some(f) = forcing {
            for (x, y) in dv.iter_mut().zip(f) {
                *x += y;
            }
        }
        Ok(())
    }

    fn energy(&self, _elem: usize, u: &[f64], v: &[f64]) -> f64 {
        let masses: Vec<&SymBand> = self.geo.ops.iter().map(|o| o.mass()).collect();
        let mv = kron_apply(&masses, v);
        let su = self.stiffness.matvec(u);
        0.5 * (dot(v, &mv) + self.c2 * dot(u, &su))
    }

    fn counters(&self) -> &Counters {
        &self.counters
    }
}

struct IterativeElement {
    stiffness: CsrMatrix,
    precond: IncompleteCholesky,
    sigma: f64,
    face_mass: Vec<CsrMatrix>,
    warm_u: Mutex<Vec<f64>>,
    warm_v: Mutex<Vec<f64>>,
}

struct IterativeKernel {
    geo: NodalGeometry,
    mass: CsrMatrix,
    mass_precond: IncompleteCholesky,
    mean: Vec<f64>,
    elements: Vec<IterativeElement>,
    rel_tol: f64,
    max_iter: usize,
    counters: Counters,
}

impl IterativeKernel {
    fn new(
        mesh: &Mesh,
        basis: GdBasis,
        ops: Vec<ElementOps1d>,
        medium: &Medium,
        rel_tol: f64,
        max_iter: usize,
    ) -> Result<Self> {
        let d = mesh.dims();
        let shape: Vec<usize> = ops.iter().map(ElementOps1d::len).collect();
        let total: usize = shape.iter().product();
        let bases: Vec<&GdBasis> = vec![&basis; d];
        let lengths: Vec<f64> = (0..d).map(|a| mesh.element_size(a)).collect();
        let points = basis.degree() + 1;
        let mass = assemble_weighted(
            &bases,
            &vec![0.0; d],
            &lengths,
            &|_| 1.0,
            WeightedKind::Mass,
            points,
        )?;
        let mass_precond = IncompleteCholesky::new(&mass)?;
        let means: Vec<&[f64]> = ops.iter().map(ElementOps1d::mean_vector).collect();
        let mean = outer(&means);
        let m2: Vec<f64> = mean.iter().map(|m| m * m).collect();
        let elements = (0..mesh.element_count())
            .into_par_iter()
            .map(|e| {
                let origin = mesh.element_origin(e);
                let c2 = |x: &[f64]| medium.c2_at(x);
                let stiffness = assemble_variable_stiffness(&bases, &origin, &lengths, &c2)?;
                let sigma = default_sigma(stiffness.diagonal().iter().sum(), total, &mean);
                let scaled: Vec<f64> = m2.iter().map(|v| sigma * v).collect();
                let precond = IncompleteCholesky::new(&stiffness.with_added_diagonal(&scaled))?;
                let face_mass = Face::all(d)
                    .map(|f| {
                        let tang: Vec<usize> = (0..d).filter(|&a| a != f.axis).collect();
                        let tb: Vec<&GdBasis> = tang.iter().map(|_| &basis).collect();
                        let to: Vec<f64> = tang.iter().map(|&a| origin[a]).collect();
                        let tl: Vec<f64> = tang.iter().map(|&a| lengths[a]).collect();
                        let fixed = origin[f.axis]
                            + if f.normal() > 0.0 {
                                lengths[f.axis]
                            } else {
                                0.0
                            };
                        let weight = |xt: &[f64]| {
                            let mut x = vec![0.0; d];
                            let mut k = 0;
                            for (a, xa) in x.iter_mut().enumerate() {
                                if a == f.axis {
                                    *xa = fixed;
                                } else {
                                    *xa = xt[k];
                                    k += 1;
                                }
                            }
                            medium.c2_at(&x)
                        };
                        assemble_weighted(
                            &tb,
                            &to,
                            &tl,
                            &weight,
                            WeightedKind::Mass,
                            basis.degree() + 3,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(IterativeElement {
                    stiffness,
                    precond,
                    sigma,
                    face_mass,
                    warm_u: Mutex::new(vec![0.0; total]),
                    warm_v: Mutex::new(vec![0.0; total]),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            geo: NodalGeometry { basis, ops, shape },
            mass,
            mass_precond,
            mean,
            elements,
            rel_tol,
            max_iter,
            counters: Counters::default(),
        })
    }
}

impl Kernel for IterativeKernel {
    fn basis(&self) -> &GdBasis {
        &self.geo.basis
    }

    fn traces(&self, _elem: usize, u: &[f64], v: &[f64], face: Face) -> (Vec<f64>, Vec<f64>) {
        self.geo.traces(u, v, face)
    }

    fn face_from_nodal(&self, _face: Face, g: &[f64]) -> Vec<f64> {
        g.to_vec()
    }

    fn from_nodal(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn to_nodal(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn finish(
        &self,
        elem: usize,
        u: &[f64],
        v: &[f64],
        fluxes: &[FaceFlux],
        forcing: Option<&[f64]>,
        du: &mut [f64],
        dv: &mut [f64],
    ) -> Result<()> {
        let el = &self.elements[elem];
        let shape = &self.geo.shape;
        let n = u.len();
        let mut fu = vec![0.0; n];
        let mut fv = vec![0.0; n];
        for (f, fl) in Face::all(shape.len()).zip(fluxes) {
            let o = &self.geo.ops[f.axis];
            let fm = &el.face_mass[f.index()];
            expand_axis(
                &fm.matvec(&fl.fu),
                shape,
                f.axis,
                o.deriv_trace(f.side),
                f.normal(),
                &mut fu,
            );
            expand_axis(
                &fm.matvec(&fl.fv),
                shape,
                f.axis,
                o.value_trace(f.side),
                1.0,
                &mut fv,
            );
        }
        // (S + σmmᵀ) dU/dt = S V + F_u + σ m (mᵀV)
        let sv = el.stiffness.matvec(v);
        let mv = el.sigma * dot(&self.mean, v);
        let b: Vec<f64> = (0..n).map(|i| sv[i] + fu[i] + mv * self.mean[i]).collect();
        let op = AugmentedOperator::new(&el.stiffness, &self.mean, el.sigma);
        {
            let mut warm = el.warm_u.lock().expect("warm start lock");
            du.copy_from_slice(&warm);
            let out = pcg_solve(&op, &el.precond, &b, du, self.rel_tol, self.max_iter)?;
            warm.copy_from_slice(du);
            self.counters.u_solves.fetch_add(1, Ordering::Relaxed);
            self.counters
                .u_iters
                .fetch_add(out.iterations as u64, Ordering::Relaxed);
            self.counters.add_flops(out.flops);
        }
        let su = el.stiffness.matvec(u);
        let rhs: Vec<f64> = (0..n).map(|i| fv[i] - su[i]).collect();
        {
            let mut warm = el.warm_v.lock().expect("warm start lock");
            dv.copy_from_slice(&warm);
            let out = pcg_solve(
                &self.mass,
                &self.mass_precond,
                &rhs,
                dv,
                self.rel_tol,
                self.max_iter,
            )?;
            warm.copy_from_slice(dv);
            self.counters.v_solves.fetch_add(1, Ordering::Relaxed);
            self.counters
                .v_iters
                .fetch_add(out.iterations as u64, Ordering::Relaxed);
            self.counters.add_flops(out.flops);
        }
        if let Some(f) = forcing {
            for (x, y) in dv.iter_mut().zip(f) {
                *x += y;
            }
        }
        Ok(())
    }

    fn energy(&self, elem: usize, u: &[f64], v: &[f64]) -> f64 {
        let el = &self.elements[elem];
        0.5 * (dot(v, &self.mass.matvec(v)) + dot(u, &el.stiffness.matvec(u)))
    }

    fn counters(&self) -> &Counters {
        &self.counters
    }
}
