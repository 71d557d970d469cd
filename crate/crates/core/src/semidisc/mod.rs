//! Energy-based DG semi-discretisation on uniform Cartesian element meshes.
//!
//! Each right-hand side evaluation runs in two phases: every element
//! publishes its face traces (`v` and the outward normal derivative of `u`)
//! from the frozen stage state, then every element combines its own traces
//! with its neighbours' (or boundary ghosts') into single-valued fluxes and
//! lifts them into the volume. Both phases are parallel over elements.

mod kernels;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{GdBasis, Side};
use crate::error::{Error, Result};
use crate::tensor::unravel;

pub use kernels::Path;
use kernels::{build_kernel, Kernel};

/// Flux parameters. Conservative when `β = τ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxScheme {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    /// Splitting parameter the upwind preset was built from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
}

impl FluxScheme {
    pub fn new(alpha: f64, beta: f64, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(beta >= 0.0) || !(tau >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "flux parameters out of range: alpha={alpha}, beta={beta}, tau={tau}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            tau,
            xi: None,
        })
    }

    pub fn central() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.0,
            tau: 0.0,
            xi: None,
        }
    }

    pub fn alternating() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            tau: 0.0,
            xi: None,
        }
    }

    pub fn upwind(xi: f64) -> Result<Self> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "upwind splitting parameter must be positive, got {xi}"
            )));
        }
        Ok(Self {
            alpha: 0.5,
            beta: xi / 2.0,
            tau: 1.0 / (2.0 * xi),
            xi: Some(xi),
        })
    }

    /// Parse a preset name: `central`, `alternating` or `upwind`.
    pub fn preset(name: &str, xi: f64) -> Result<Self> {
        match name {
            "central" => Ok(Self::central()),
            "alternating" => Ok(Self::alternating()),
            "upwind" => Self::upwind(xi),
            other => Err(Error::InvalidConfig(format!(
                "unknown flux preset `{other}`"
            ))),
        }
    }

    pub fn is_conservative(&self) -> bool {
        self.beta == 0.0 && self.tau == 0.0
    }
}

/// Trace of the solution on one side of a face: `v` and `∇u·n` with `n`
/// the outward normal of that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trace {
    pub v: f64,
    pub dn: f64,
}

/// `(v*, (∇u)*·n¹)` with weight `a` on the interior side.
#[inline]
pub(crate) fn flux_weighted(a: f64, beta: f64, tau: f64, own: Trace, other: Trace) -> (f64, f64) {
    let vstar = a * own.v + (1.0 - a) * other.v - beta * (own.dn + other.dn);
    let gstar = (1.0 - a) * own.dn - a * other.dn - tau * (own.v - other.v);
    (vstar, gstar)
}

/// Numerical fluxes `v*` and `(∇u)*·n¹` seen from the interior side, which
/// carries weight `α`.
pub fn numerical_flux(scheme: &FluxScheme, own: Trace, other: Trace) -> (f64, f64) {
    flux_weighted(scheme.alpha, scheme.beta, scheme.tau, own, other)
}

/// Boundary condition tag of a mesh face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "dirichlet" => Ok(Self::Dirichlet),
            "neumann" => Ok(Self::Neumann),
            other => Err(Error::InvalidConfig(format!(
                "unknown boundary condition `{other}`"
            ))),
        }
    }
}

/// Data closing a boundary face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryValue {
    /// Trace from the matching periodic face.
    Periodic(Trace),
    /// `u = g`; carries `g′(t)`.
    Dirichlet { velocity: f64 },
    /// `∇u·n = g` with `n` outward.
    Neumann { flux: f64 },
}

/// Exterior ghost trace that imposes the boundary condition through the
/// ordinary flux formula.
pub fn apply_bc(own: Trace, value: BoundaryValue) -> Trace {
    match value {
        BoundaryValue::Periodic(t) => t,
        BoundaryValue::Dirichlet { velocity } => Trace {
            v: 2.0 * velocity - own.v,
            dn: -own.dn,
        },
        BoundaryValue::Neumann { flux } => Trace {
            v: own.v,
            dn: own.dn - 2.0 * flux,
        },
    }
}

/// Face of an element: axis and side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub side: Side,
}

impl Face {
    pub fn all(dims: usize) -> impl Iterator<Item = Face> {
        (0..dims).flat_map(|axis| [Side::Left, Side::Right].map(move |side| Face { axis, side }))
    }

    pub fn index(&self) -> usize {
        2 * self.axis + usize::from(self.side == Side::Right)
    }

    pub fn normal(&self) -> f64 {
        match self.side {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    pub fn opposite(&self) -> Face {
        Face {
            axis: self.axis,
            side: match self.side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            },
        }
    }
}

/// Uniform Cartesian mesh of box elements, each carrying `cells` GD cells
/// per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    elements: Vec<usize>,
    cells: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    boundaries: Vec<Boundary>,
}

impl Mesh {
    /// `boundaries` lists the lower and upper face of axis 0, then axis 1, ...
    pub fn new(
        elements: Vec<usize>,
        cells: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        boundaries: Vec<Boundary>,
    ) -> Result<Self> {
        let d = elements.len();
        if !(1..=3).contains(&d)
            || lower.len() != d
            || upper.len() != d
            || boundaries.len() != 2 * d
        {
            return Err(Error::InvalidConfig(format!(
                "mesh description inconsistent with dimension {d}"
            )));
        }
        if elements.contains(&0) || cells == 0 {
            return Err(Error::InvalidConfig(
                "element and cell counts must be positive".into(),
            ));
        }
        for a in 0..d {
            if !(upper[a] > lower[a]) {
                return Err(Error::InvalidConfig(format!("empty extent on axis {a}")));
            }
            let (l, r) = (boundaries[2 * a], boundaries[2 * a + 1]);
            if (l == Boundary::Periodic) != (r == Boundary::Periodic) {
                return Err(Error::InvalidConfig(format!(
                    "periodic faces on axis {a} must come in pairs"
                )));
            }
        }
        Ok(Self {
            elements,
            cells,
            lower,
            upper,
            boundaries,
        })
    }

    /// Unit box `[0,1]^d` with the same condition on every face.
    pub fn unit(dims: usize, elements: usize, cells: usize, bc: Boundary) -> Result<Self> {
        Self::new(
            vec![elements; dims],
            cells,
            vec![0.0; dims],
            vec![1.0; dims],
            vec![bc; 2 * dims],
        )
    }

    pub fn dims(&self) -> usize {
        self.elements.len()
    }

    pub fn elements_per_axis(&self) -> &[usize] {
        &self.elements
    }

    pub fn element_count(&self) -> usize {
        self.elements.iter().product()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn boundary(&self, face: Face) -> Boundary {
        self.boundaries[face.index()]
    }

    pub fn element_size(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.elements[axis] as f64
    }

    pub fn cell_size(&self, axis: usize) -> f64 {
        self.element_size(axis) / self.cells as f64
    }

    /// Smallest cell width over all axes.
    pub fn min_cell_size(&self) -> f64 {
        (0..self.dims())
            .map(|a| self.cell_size(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nodes per element.
    pub fn element_len(&self) -> usize {
        (self.cells + 1).pow(self.dims() as u32)
    }

    pub fn total_dofs(&self) -> usize {
        self.element_len() * self.element_count()
    }

    pub fn element_coords(&self, elem: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        unravel(elem, &self.elements, &mut idx);
        idx
    }

    pub fn element_origin(&self, elem: usize) -> Vec<f64> {
        self.element_coords(elem)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.lower[a] + k as f64 * self.element_size(a))
            .collect()
    }

    /// Neighbour across `face`, wrapping periodic faces; `None` on a
    /// Dirichlet or Neumann boundary.
    pub fn neighbor(&self, elem: usize, face: Face) -> Option<usize> {
        let mut idx = self.element_coords(elem);
        let n = self.elements[face.axis];
        let k = idx[face.axis];
        let periodic = self.boundary(face) == Boundary::Periodic;
        let next = match face.side {
            Side::Left if k > 0 => k - 1,
            Side::Left if periodic => n - 1,
            Side::Right if k + 1 < n => k + 1,
            Side::Right if periodic => 0,
            _ => return None,
        };
        idx[face.axis] = next;
        Some(crate::tensor::ravel(&idx, &self.elements))
    }

    /// Physical coordinates of all nodes of an element, flat with axis 0
    /// fastest, `dims` coordinates per node.
    pub fn element_nodes(&self, elem: usize) -> Vec<f64> {
        let d = self.dims();
        let origin = self.element_origin(elem);
        let shape = vec![self.cells + 1; d];
        let total = self.element_len();
        let mut out = Vec::with_capacity(total * d);
        let mut idx = vec![0; d];
        for flat in 0..total {
            unravel(flat, &shape, &mut idx);
            for a in 0..d {
                out.push(origin[a] + idx[a] as f64 * self.cell_size(a));
            }
        }
        out
    }

    /// Physical coordinates of the nodes on one face of an element, in the
    /// tangential ordering used for face data.
    pub fn face_nodes(&self, elem: usize, face: Face) -> Vec<f64> {
        let d = self.dims();
        let origin = self.element_origin(elem);
        let tangential: Vec<usize> = (0..d).filter(|&a| a != face.axis).collect();
        let shape = vec![self.cells + 1; d - 1];
        let total: usize = shape.iter().product();
        let mut out = Vec::with_capacity(total * d);
        let mut idx = vec![0; d - 1];
        let fixed = origin[face.axis]
            + match face.side {
                Side::Left => 0.0,
                Side::Right => self.element_size(face.axis),
            };
        for flat in 0..total {
            unravel(flat, &shape, &mut idx);
            for a in 0..d {
                if a == face.axis {
                    out.push(fixed);
                } else {
                    let t = tangential.iter().position(|&m| m == a).unwrap();
                    out.push(origin[a] + idx[t] as f64 * self.cell_size(a));
                }
            }
        }
        out
    }
}

/// Squared sound speed as a function of position.
pub type CoefficientFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Medium {
    Constant(f64),
    Variable { c2: CoefficientFn, c_max: f64 },
}

impl std::fmt::Debug for Medium {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Medium::Constant(c) => write!(f, "Constant({c})"),
            Medium::Variable { c_max, .. } => write!(f, "Variable {{ c_max: {c_max} }}"),
        }
    }
}

impl Medium {
    /// Variable medium with `c_max` estimated from samples on a fine grid
    /// over the mesh box.
    pub fn variable(c2: CoefficientFn, mesh: &Mesh) -> Self {
        let d = mesh.dims();
        let samples = 4 * mesh.cells() + 1;
        let shape: Vec<usize> = (0..d)
            .map(|a| mesh.elements_per_axis()[a] * samples)
            .collect();
        let total: usize = shape.iter().product();
        let mut idx = vec![0; d];
        let mut x = vec![0.0; d];
        let mut c2max: f64 = 0.0;
        for flat in 0..total {
            unravel(flat, &shape, &mut idx);
            for a in 0..d {
                x[a] = mesh.lower()[a]
                    + (mesh.upper()[a] - mesh.lower()[a]) * idx[a] as f64 / (shape[a] - 1) as f64;
            }
            c2max = c2max.max(c2(&x));
        }
        Medium::Variable {
            c2,
            c_max: c2max.sqrt(),
        }
    }

    pub fn max_speed(&self) -> f64 {
        match self {
            Medium::Constant(c) => *c,
            Medium::Variable { c_max, .. } => *c_max,
        }
    }

    pub fn c2_at(&self, x: &[f64]) -> f64 {
        match self {
            Medium::Constant(c) => c * c,
            Medium::Variable { c2, .. } => c2(x),
        }
    }
}

/// Forcing and boundary data. Defaults describe a homogeneous problem.
pub trait Source: Send + Sync {
    fn has_forcing(&self) -> bool {
        false
    }
    /// Right-hand side `f` of `u_tt = ∇·(c²∇u) + f`.
    fn forcing(&self, _x: &[f64], _t: f64) -> f64 {
        0.0
    }
    fn has_boundary_data(&self) -> bool {
        false
    }
    /// `∂g/∂t` on Dirichlet faces.
    fn boundary_velocity(&self, _x: &[f64], _t: f64) -> f64 {
        0.0
    }
    /// Outward `∇u·n` on Neumann faces.
    fn boundary_normal_derivative(&self, _x: &[f64], _t: f64, _face: Face) -> f64 {
        0.0
    }
}

/// Homogeneous problem.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSource;

impl Source for NoSource {}

/// Per-element vectors `U`, `V` in the representation of the path that
/// produced them (nodal, or modal for the fast path).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(elements: usize, len: usize) -> Self {
        Self {
            u: vec![vec![0.0; len]; elements],
            v: vec![vec![0.0; len]; elements],
            t: 0.0,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.u.len(), self.u.first().map_or(0, Vec::len))
    }

    /// `self += a · other` on `U` and `V`.
    pub fn axpy(&mut self, a: f64, other: &FieldState) {
        for (x, y) in self
            .u
            .iter_mut()
            .zip(&other.u)
            .chain(self.v.iter_mut().zip(&other.v))
        {
            for (xi, yi) in x.iter_mut().zip(y) {
                *xi += a * yi;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.v)
            .all(|x| x.iter().all(|v| v.is_finite()))
    }

    pub fn max_abs_diff(&self, other: &FieldState) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Counters accumulated by right-hand side evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Telemetry {
    pub rhs_evaluations: u64,
    pub pcg_u_solves: u64,
    pub pcg_u_iterations: u64,
    pub pcg_v_solves: u64,
    pub pcg_v_iterations: u64,
    pub flops: u64,
}

impl Telemetry {
    pub fn mean_u_iterations(&self) -> f64 {
        self.pcg_u_iterations as f64 / self.pcg_u_solves.max(1) as f64
    }

    pub fn mean_v_iterations(&self) -> f64 {
        self.pcg_v_iterations as f64 / self.pcg_v_solves.max(1) as f64
    }
}

/// Fluxes `(v* − v¹, (∇u)*·n¹)` on one face, in the kernel's tangential
/// representation.
#[derive(Debug, Clone, Default)]
pub(crate) struct FaceFlux {
    pub fu: Vec<f64>,
    pub fv: Vec<f64>,
}

/// Semi-discrete operator for one problem set-up.
pub struct Semidiscretization {
    mesh: Mesh,
    scheme: FluxScheme,
    medium: Medium,
    source: Arc<dyn Source>,
    kernel: Box<dyn Kernel>,
    path: Path,
}

impl std::fmt::Debug for Semidiscretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Semidiscretization")
            .field("mesh", &self.mesh)
            .field("scheme", &self.scheme)
            .field("medium", &self.medium)
            .field("path", &self.path)
            .finish()
    }
}

impl Semidiscretization {
    pub fn new(
        mesh: Mesh,
        degree: usize,
        scheme: FluxScheme,
        medium: Medium,
        source: Arc<dyn Source>,
        path: Path,
    ) -> Result<Self> {
        let basis = GdBasis::new(degree, mesh.cells())?;
        let kernel = build_kernel(&mesh, basis, &medium, path)?;
        Ok(Self {
            mesh,
            scheme,
            medium,
            source,
            kernel,
            path,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn scheme(&self) -> &FluxScheme {
        &self.scheme
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn path(&self) -> Path {
        self.path
    }

    pub fn degree(&self) -> usize {
        self.kernel.basis().degree()
    }

    pub fn basis(&self) -> &GdBasis {
        self.kernel.basis()
    }

    pub fn telemetry(&self) -> Telemetry {
        self.kernel.telemetry()
    }

    pub fn reset_telemetry(&self) {
        self.kernel.reset_telemetry();
    }

    /// Sample `u0`, `v0` at the nodes and convert to the path's representation.
    pub fn project(
        &self,
        u0: &(dyn Fn(&[f64]) -> f64 + Sync),
        v0: &(dyn Fn(&[f64]) -> f64 + Sync),
        t: f64,
    ) -> FieldState {
        let d = self.mesh.dims();
        let (u, v): (Vec<_>, Vec<_>) = (0..self.mesh.element_count())
            .into_par_iter()
            .map(|e| {
                let nodes = self.mesh.element_nodes(e);
                let un: Vec<f64> = nodes.chunks(d).map(u0).collect();
                let vn: Vec<f64> = nodes.chunks(d).map(v0).collect();
                (self.kernel.from_nodal(&un), self.kernel.from_nodal(&vn))
            })
            .unzip();
        FieldState { u, v, t }
    }

    /// Build a state from nodal vectors.
    pub fn from_nodal(&self, u: &[Vec<f64>], v: &[Vec<f64>], t: f64) -> FieldState {
        FieldState {
            u: u.iter().map(|x| self.kernel.from_nodal(x)).collect(),
            v: v.iter().map(|x| self.kernel.from_nodal(x)).collect(),
            t,
        }
    }

    /// Nodal `(U, V)` per element.
    pub fn to_nodal(&self, state: &FieldState) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let u = state
            .u
            .par_iter()
            .map(|x| self.kernel.to_nodal(x))
            .collect();
        let v = state
            .v
            .par_iter()
            .map(|x| self.kernel.to_nodal(x))
            .collect();
        (u, v)
    }

    pub fn zero_state(&self) -> FieldState {
        FieldState::zeros(self.mesh.element_count(), self.mesh.element_len())
    }

    /// `E = ½ Σ_k (VᵀMV + UᵀS_{c²}U)`.
    pub fn discrete_energy(&self, state: &FieldState) -> f64 {
        let parts: Vec<f64> = (0..self.mesh.element_count())
            .into_par_iter()
            .map(|e| self.kernel.energy(e, &state.u[e], &state.v[e]))
            .collect();
        parts.iter().sum()
    }

    /// Time derivatives of all element vectors at `state.t`.
    pub fn rhs(&self, state: &FieldState, out: &mut FieldState) -> Result<()> {
        let d = self.mesh.dims();
        let nelem = self.mesh.element_count();
        let t = state.t;
        let traces: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..nelem)
            .into_par_iter()
            .map(|e| {
                Face::all(d)
                    .map(|f| self.kernel.traces(e, &state.u[e], &state.v[e], f))
                    .collect()
            })
            .collect();
        let results: Vec<Result<()>> = out
            .u
            .par_iter_mut()
            .zip(out.v.par_iter_mut())
            .enumerate()
            .map(|(e, (du, dv))| {
                let fluxes: Vec<FaceFlux> = Face::all(d)
                    .map(|f| self.face_flux(e, f, &traces, t))
                    .collect();
                let forcing = if self.source.has_forcing() {
                    let nodes = self.mesh.element_nodes(e);
                    let f: Vec<f64> = nodes.chunks(d).map(|x| self.source.forcing(x, t)).collect();
                    Some(self.kernel.from_nodal(&f))
                } else {
                    None
                };
                self.kernel.finish(
                    e,
                    &state.u[e],
                    &state.v[e],
                    &fluxes,
                    forcing.as_deref(),
                    du,
                    dv,
                )
            })
            .collect();
        out.t = t;
        self.kernel.count_rhs();
        results.into_iter().collect()
    }

    fn face_flux(
        &self,
        e: usize,
        f: Face,
        traces: &[Vec<(Vec<f64>, Vec<f64>)>],
        t: f64,
    ) -> FaceFlux {
        let (own_v, own_dn) = &traces[e][f.index()];
        let n = own_v.len();
        let mut out = FaceFlux {
            fu: vec![0.0; n],
            fv: vec![0.0; n],
        };
        let (beta, tau) = (self.scheme.beta, self.scheme.tau);
        match self.mesh.neighbor(e, f) {
            Some(nb) => {
                let (oth_v, oth_dn) = &traces[nb][f.opposite().index()];
                // single-valued flux: the lower element of each face carries α
                let a = match f.side {
                    Side::Right => self.scheme.alpha,
                    Side::Left => 1.0 - self.scheme.alpha,
                };
                for i in 0..n {
                    let own = Trace {
                        v: own_v[i],
                        dn: own_dn[i],
                    };
                    let other = Trace {
                        v: oth_v[i],
                        dn: oth_dn[i],
                    };
                    let (vs, gs) = flux_weighted(a, beta, tau, own, other);
                    out.fu[i] = vs - own.v;
                    out.fv[i] = gs;
                }
            }
            None => {
                let bc = self.mesh.boundary(f);
                let data = if self.source.has_boundary_data() {
                    let d = self.mesh.dims();
                    let nodes = self.mesh.face_nodes(e, f);
                    let g: Vec<f64> = match bc {
                        Boundary::Dirichlet => nodes
                            .chunks(d)
                            .map(|x| self.source.boundary_velocity(x, t))
                            .collect(),
                        _ => nodes
                            .chunks(d)
                            .map(|x| self.source.boundary_normal_derivative(x, t, f))
                            .collect(),
                    };
                    self.kernel.face_from_nodal(f, &g)
                } else {
                    vec![0.0; n]
                };
                for i in 0..n {
                    let own = Trace {
                        v: own_v[i],
                        dn: own_dn[i],
                    };
                    let value = match bc {
                        Boundary::Dirichlet => BoundaryValue::Dirichlet { velocity: data[i] },
                        _ => BoundaryValue::Neumann { flux: data[i] },
                    };
                    let ghost = apply_bc(own, value);
                    let (vs, gs) = flux_weighted(0.5, beta, tau, own, ghost);
                    out.fu[i] = vs - own.v;
                    out.fv[i] = gs;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let u = FluxScheme::upwind(2.0).unwrap();
        assert_eq!((u.alpha, u.beta, u.tau), (0.5, 1.0, 0.25));
        assert!(FluxScheme::central().is_conservative());
        assert!(FluxScheme::upwind(0.0).is_err());
        assert!(FluxScheme::preset("sideways", 1.0).is_err());
    }

    #[test]
    fn consistent_traces_pass_through() {
        let own = Trace { v: 0.3, dn: 1.7 };
        let other = Trace { v: 0.3, dn: -1.7 };
        for s in [
            FluxScheme::central(),
            FluxScheme::alternating(),
            FluxScheme::upwind(0.7).unwrap(),
        ] {
            let (vs, gs) = numerical_flux(&s, own, other);
            assert!((vs - 0.3).abs() < 1e-15 && (gs - 1.7).abs() < 1e-15);
        }
    }

    #[test]
    fn central_average_and_upwind_example() {
        let (vs, _) = numerical_flux(
            &FluxScheme::central(),
            Trace { v: 1.0, dn: 0.0 },
            Trace { v: 0.0, dn: 0.0 },
        );
        assert_eq!(vs, 0.5);
        let up = FluxScheme::upwind(1.0).unwrap();
        let (vs, gs) = numerical_flux(&up, Trace { v: 1.0, dn: 1.0 }, Trace { v: 0.0, dn: 0.0 });
        assert!(vs.abs() < 1e-15 && gs.abs() < 1e-15);
    }

    #[test]
    fn boundary_ghosts() {
        let own = Trace { v: 3.0, dn: 2.0 };
        assert_eq!(
            apply_bc(own, BoundaryValue::Dirichlet { velocity: 0.0 }).v,
            -3.0
        );
        let ghost = apply_bc(own, BoundaryValue::Neumann { flux: 0.0 });
        let (_, gs) = numerical_flux(&FluxScheme::central(), own, ghost);
        assert_eq!(gs, 0.0);
        let nb = Trace { v: 1.0, dn: -4.0 };
        assert_eq!(apply_bc(own, BoundaryValue::Periodic(nb)), nb);
    }

    #[test]
    fn mesh_neighbors_wrap_periodically() {
        let m = Mesh::new(
            vec![3, 2],
            4,
            vec![0.0; 2],
            vec![1.0; 2],
            vec![
                Boundary::Periodic,
                Boundary::Periodic,
                Boundary::Dirichlet,
                Boundary::Neumann,
            ],
        )
        .unwrap();
        let left = Face {
            axis: 0,
            side: Side::Left,
        };
        let up = Face {
            axis: 1,
            side: Side::Right,
        };
        assert_eq!(m.neighbor(0, left), Some(2));
        assert_eq!(m.neighbor(0, up), Some(3));
        assert_eq!(m.neighbor(3, up), None);
        assert_eq!(m.face_nodes(4, up).len(), 10);
        let nodes = m.face_nodes(4, up);
        assert!((nodes[1] - 1.0).abs() < 1e-15 && (nodes[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unpaired_periodic_rejected() {
        let err = Mesh::new(
            vec![2],
            4,
            vec![0.0],
            vec![1.0],
            vec![Boundary::Periodic, Boundary::Dirichlet],
        );
        assert!(err.is_err());
    }
}
