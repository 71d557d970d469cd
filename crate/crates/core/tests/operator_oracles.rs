use gdwave::linalg::DenseMatrix;
use gdwave::operators::{assemble_weighted, ElementOps1d, SurfaceKind, WeightedKind};
use gdwave::quadrature::GaussLegendre;
use gdwave::{GdBasis, Side};
use nalgebra::DMatrix;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Dense `∫ φ_i φ_j` and `∫ φ_i' φ_j'` on `[0, length]` by brute-force
/// Gauss quadrature of point evaluations.
fn brute_force(basis: &GdBasis, length: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = basis.len();
    let cells = basis.cells();
    let gl = GaussLegendre::new(basis.degree() + 4);
    let mut m = DMatrix::zeros(n, n);
    let mut s = DMatrix::zeros(n, n);
    for k in 0..cells {
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            let x = (k as f64 + t) / cells as f64;
            let vals: Vec<f64> = (0..n).map(|i| basis.eval(i, x).unwrap()).collect();
            let ders: Vec<f64> = (0..n)
                .map(|i| basis.eval_deriv(i, x, Side::Right).unwrap() / length)
                .collect();
            let wt = w * length / cells as f64;
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += wt * vals[i] * vals[j];
                    s[(i, j)] += wt * ders[i] * ders[j];
                }
            }
        }
    }
    (m, s)
}

#[test]
fn mass_and_stiffness_match_brute_force_quadrature() {
    for p in [1, 3, 5, 7] {
        for cells in [p.max(3), 12] {
            let length = 0.7;
            let basis = GdBasis::new(p, cells).unwrap();
            let ops = ElementOps1d::new(basis.clone(), length).unwrap();
            let (m, s) = brute_force(&basis, length);
            let dm = (to_na(&ops.mass().to_dense()) - &m).abs().max();
            let ds = (to_na(&ops.stiffness().to_dense()) - &s).abs().max();
            assert!(dm < 1e-13 * m.abs().max(), "p={p} N={cells}: mass {dm:e}");
            assert!(
                ds < 1e-11 * s.abs().max(),
                "p={p} N={cells}: stiffness {ds:e}"
            );
        }
    }
}

#[test]
fn constants_span_null_space_and_mass_integrates_length() {
    let ops = ElementOps1d::new(GdBasis::new(5, 11).unwrap(), 2.5).unwrap();
    let ones = vec![1.0; ops.len()];
    let s1 = ops.stiffness().matvec(&ones);
    assert!(s1.iter().all(|v| v.abs() < 1e-10));
    let m1 = ops.mass().matvec(&ones);
    assert!((m1.iter().sum::<f64>() - 2.5).abs() < 1e-12);
    assert!((ops.mean_vector().iter().sum::<f64>() - 2.5).abs() < 1e-12);
}

#[test]
fn derivative_traces_match_finite_differences() {
    let length = 1.3;
    let basis = GdBasis::new(3, 9).unwrap();
    let ops = ElementOps1d::new(basis.clone(), length).unwrap();
    let eps = 1e-6;
    for i in 0..basis.len() {
        let left = (basis.eval(i, eps).unwrap() - basis.eval(i, 0.0).unwrap()) / eps / length;
        let right =
            (basis.eval(i, 1.0).unwrap() - basis.eval(i, 1.0 - eps).unwrap()) / eps / length;
        assert!((ops.deriv_trace(Side::Left)[i] - left).abs() < 1e-4 * (1.0 + left.abs()));
        assert!((ops.deriv_trace(Side::Right)[i] - right).abs() < 1e-4 * (1.0 + right.abs()));
    }
}

#[test]
fn surface_matrices_are_trace_outer_products() {
    let ops = ElementOps1d::new(GdBasis::new(5, 11).unwrap(), 1.0).unwrap();
    for x in [Side::Left, Side::Right] {
        for y in [Side::Left, Side::Right] {
            let cases = [
                (SurfaceKind::B, ops.value_trace(x), ops.value_trace(y)),
                (SurfaceKind::C, ops.deriv_trace(x), ops.deriv_trace(y)),
                (SurfaceKind::D, ops.deriv_trace(x), ops.value_trace(y)),
                (SurfaceKind::E, ops.value_trace(x), ops.deriv_trace(y)),
            ];
            for (kind, l, r) in cases {
                let k = ops.surface_matrix(kind, x, y);
                for a in 0..ops.len() {
                    for b in 0..ops.len() {
                        assert_eq!(k[(a, b)], l[a] * r[b]);
                    }
                }
            }
        }
    }
}

#[test]
fn constant_weight_assembly_is_kronecker_sum() {
    let (p, cells) = (3, 6);
    let (lx, ly) = (0.5, 0.25);
    let b = GdBasis::new(p, cells).unwrap();
    let ox = ElementOps1d::new(b.clone(), lx).unwrap();
    let oy = ElementOps1d::new(b.clone(), ly).unwrap();
    let (mx, sx) = (
        to_na(&ox.mass().to_dense()),
        to_na(&ox.stiffness().to_dense()),
    );
    let (my, sy) = (
        to_na(&oy.mass().to_dense()),
        to_na(&oy.stiffness().to_dense()),
    );
    let c = 2.5;
    let w = move |_: &[f64]| c;
    // first axis varies fastest, so x-factors sit on the right
    let mass_oracle = my.kronecker(&mx) * c;
    let stiff_oracle = (my.kronecker(&sx) + sy.kronecker(&mx)) * c;
    let mass = assemble_weighted(
        &[&b, &b],
        &[1.0, -1.0],
        &[lx, ly],
        &w,
        WeightedKind::Mass,
        p + 1,
    )
    .unwrap();
    let stiff = assemble_weighted(
        &[&b, &b],
        &[1.0, -1.0],
        &[lx, ly],
        &w,
        WeightedKind::Stiffness,
        p + 1,
    )
    .unwrap();
    let dm = (to_na(&mass.to_dense()) - &mass_oracle).abs().max();
    let ds = (to_na(&stiff.to_dense()) - &stiff_oracle).abs().max();
    assert!(dm < 1e-13 * mass_oracle.abs().max(), "{dm:e}");
    assert!(ds < 1e-12 * stiff_oracle.abs().max(), "{ds:e}");
    assert!(stiff.max_asymmetry() < 1e-12);
}

#[test]
fn nonpositive_weight_is_rejected() {
    let b = GdBasis::new(1, 4).unwrap();
    let w = |x: &[f64]| x[0] - 0.5;
    assert!(assemble_weighted(&[&b], &[0.0], &[1.0], &w, WeightedKind::Mass, 2).is_err());
}
