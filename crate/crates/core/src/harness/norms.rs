//! Discrete error norms and convergence-rate regression.

use rayon::prelude::*;

use super::solutions::ExactValues;
use crate::quadrature::GaussLegendre;
use crate::semidisc::{FieldState, Semidiscretization};
use crate::tensor::unravel;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorNorms {
    /// `‖u − uʰ‖`
    pub l2: f64,
    /// `(‖∇(u − uʰ)‖² + ‖v − vʰ‖²)^{1/2}`
    pub energy: f64,
}

/// Errors of `state` against `exact`, integrated with `p + 3` Gauss points
/// per cell and axis.
pub fn error_norms(
    semi: &Semidiscretization,
    state: &FieldState,
    exact: &(dyn Fn(&[f64]) -> ExactValues + Sync),
) -> ErrorNorms {
    let mesh = semi.mesh();
    let basis = semi.basis();
    let d = mesh.dims();
    let p = basis.degree();
    let width = p + 1;
    let cells = mesh.cells();
    let quad = GaussLegendre::new(p + 3);
    let nq = quad.len();
    let (u_nodal, v_nodal) = semi.to_nodal(state);

    // per-axis tables: [cell][point] -> (first, values, derivs)
    let mut table = Vec::with_capacity(cells * nq);
    for k in 0..cells {
        for &s in &quad.nodes {
            let mut vals = vec![0.0; width];
            let mut ders = vec![0.0; width];
            let first = basis.eval_cell(k, s, &mut vals, Some(&mut ders));
            table.push((first, vals, ders));
        }
    }
    let hs: Vec<f64> = (0..d).map(|a| mesh.cell_size(a)).collect();
    let big: Vec<f64> = (0..d).map(|a| mesh.element_size(a)).collect();
    let n1 = cells + 1;
    let cell_shape = vec![cells; d];
    let point_shape = vec![nq; d];
    let local_shape = vec![width; d];
    let n_cells: usize = cell_shape.iter().product();
    let n_points: usize = point_shape.iter().product();
    let n_local: usize = local_shape.iter().product();

    let (l2, en): (f64, f64) = (0..mesh.element_count())
        .into_par_iter()
        .map(|e| {
            let origin = mesh.element_origin(e);
            let (u, v) = (&u_nodal[e], &v_nodal[e]);
            let mut cidx = vec![0; d];
            let mut pidx = vec![0; d];
            let mut lidx = vec![0; d];
            let mut x = vec![0.0; d];
            let mut gh = vec![0.0; d];
            let (mut l2, mut en) = (0.0, 0.0);
            for fc in 0..n_cells {
                unravel(fc, &cell_shape, &mut cidx);
                for fp in 0..n_points {
                    unravel(fp, &point_shape, &mut pidx);
                    let rows: Vec<&(usize, Vec<f64>, Vec<f64>)> =
                        (0..d).map(|a| &table[cidx[a] * nq + pidx[a]]).collect();
                    let mut w = 1.0;
                    for a in 0..d {
                        x[a] = origin[a] + (cidx[a] as f64 + quad.nodes[pidx[a]]) * hs[a];
                        w *= quad.weights[pidx[a]] * hs[a];
                    }
                    let (mut uh, mut vh) = (0.0, 0.0);
                    gh.fill(0.0);
                    for fl in 0..n_local {
                        unravel(fl, &local_shape, &mut lidx);
                        let mut node = 0;
                        let mut stride = 1;
                        let mut phi = 1.0;
                        for a in 0..d {
                            node += (rows[a].0 + lidx[a]) * stride;
                            stride *= n1;
                            phi *= rows[a].1[lidx[a]];
                        }
                        uh += phi * u[node];
                        vh += phi * v[node];
                        for (g, gv) in gh.iter_mut().enumerate() {
                            let mut dphi = 1.0;
                            for a in 0..d {
                                dphi *= if a == g {
                                    rows[a].2[lidx[a]] / big[a]
                                } else {
                                    rows[a].1[lidx[a]]
                                };
                            }
                            *gv += dphi * u[node];
                        }
                    }
                    let ex = exact(&x);
                    l2 += w * (ex.u - uh).powi(2);
                    let grad_err: f64 = ex.grad.iter().zip(&gh).map(|(a, b)| (a - b).powi(2)).sum();
                    en += w * (grad_err + (ex.v - vh).powi(2));
                }
            }
            (l2, en)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    ErrorNorms {
        l2: l2.sqrt(),
        energy: en.sqrt(),
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn convergence_rate(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_of_exact_power_law() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powf(4.3)).collect();
        assert!((convergence_rate(&h, &e) - 4.3).abs() < 1e-10);
    }
}
