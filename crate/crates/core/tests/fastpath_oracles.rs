use gdwave::fastpath::{
    apply_transformed_lift, apply_transformed_volume, diagonalize, from_modal, to_modal,
};
use gdwave::linalg::DenseMatrix;
use gdwave::operators::{ElementOps1d, SurfaceKind};
use gdwave::{GdBasis, Side};
use nalgebra::{DMatrix, DVector};

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

fn ops(p: usize, cells: usize, length: f64) -> ElementOps1d {
    ElementOps1d::new(GdBasis::new(p, cells).unwrap(), length).unwrap()
}

fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

#[test]
fn eigenvalues_match_cholesky_reduced_problem() {
    for (p, cells) in [(1, 9), (3, 9), (5, 19), (7, 19), (9, 20)] {
        let o = ops(p, cells, 0.8);
        let db = diagonalize(&o).unwrap();
        let m = to_na(&o.mass().to_dense());
        let s = to_na(&o.stiffness().to_dense());
        let l = m.cholesky().unwrap().l();
        let linv = l.clone().try_inverse().unwrap();
        let c = &linv * s * linv.transpose();
        let mut oracle: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let lmax = oracle.last().copied().unwrap();
        for (a, b) in db.eigenvalues().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10 * lmax, "p={p}: {a} vs {b}");
        }
        assert_eq!(db.zero_index(), 0);
        assert_eq!(db.eigenvalues()[0], 0.0);
    }
}

#[test]
fn modal_round_trip_in_two_dimensions() {
    let (a, b) = (ops(3, 9, 0.5), ops(3, 9, 0.25));
    let (da, dbb) = (diagonalize(&a).unwrap(), diagonalize(&b).unwrap());
    let x = pseudo_random(a.len() * b.len(), 3);
    let modal = to_modal(&[&da, &dbb], &x).unwrap();
    let back = from_modal(&[&da, &dbb], &modal).unwrap();
    for (u, v) in back.iter().zip(&x) {
        assert!((u - v).abs() < 1e-12);
    }
    assert!(to_modal(&[&da], &x).is_err());
}

#[test]
fn transformed_volume_is_kronecker_sum_bilinear_form() {
    let (a, b) = (ops(3, 9, 0.5), ops(5, 11, 0.5));
    let (da, dbb) = (diagonalize(&a).unwrap(), diagonalize(&b).unwrap());
    let bases = [&da, &dbb];
    let n = a.len() * b.len();
    let (x1, x2) = (pseudo_random(n, 1), pseudo_random(n, 2));
    // modal → nodal, then the nodal stiffness S⊗M + M⊗S (x fastest)
    let y1 = DVector::from_vec(from_modal(&bases, &x1).unwrap());
    let y2 = DVector::from_vec(from_modal(&bases, &x2).unwrap());
    let (ma, sa) = (
        to_na(&a.mass().to_dense()),
        to_na(&a.stiffness().to_dense()),
    );
    let (mb, sb) = (
        to_na(&b.mass().to_dense()),
        to_na(&b.stiffness().to_dense()),
    );
    let k = mb.kronecker(&sa) + sb.kronecker(&ma);
    let nodal = y1.dot(&(&k * &y2));
    let lx2 = apply_transformed_volume(&bases, &x2).unwrap();
    let modal: f64 = x1.iter().zip(&lx2).map(|(p, q)| p * q).sum();
    assert!(
        (nodal - modal).abs() < 1e-10 * nodal.abs().max(1.0),
        "{nodal} vs {modal}"
    );
}

#[test]
fn transformed_lift_matches_dense_surface_matrix() {
    let o = ops(5, 11, 0.6);
    let d = diagonalize(&o).unwrap();
    let n = o.len();
    let (x1, x2) = (pseudo_random(n, 5), pseudo_random(n, 6));
    let y1 = DVector::from_vec(from_modal(&[&d], &x1).unwrap());
    let y2 = DVector::from_vec(from_modal(&[&d], &x2).unwrap());
    for kind in [
        SurfaceKind::B,
        SurfaceKind::C,
        SurfaceKind::D,
        SurfaceKind::E,
    ] {
        for xs in [Side::Left, Side::Right] {
            for ys in [Side::Left, Side::Right] {
                let k = to_na(&o.surface_matrix(kind, xs, ys));
                let nodal = y1.dot(&(&k * &y2));
                let mut out = vec![0.0; n];
                apply_transformed_lift(kind, &[&d], 0, xs, ys, &x2, 1.5, &mut out).unwrap();
                let modal: f64 = x1.iter().zip(&out).map(|(p, q)| p * q).sum::<f64>() / 1.5;
                assert!(
                    (nodal - modal).abs() < 1e-9 * nodal.abs().max(1.0),
                    "{kind:?} {xs:?} {ys:?}"
                );
            }
        }
    }
}
