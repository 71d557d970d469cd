use gdwave::{GdBasis, Side};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn degree_and_cells() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(vec![1usize, 3, 5, 7, 9]).prop_flat_map(|p| (Just(p), p..=3 * p + 12))
}

/// Weights of the degree-`p` interpolant through nodes `0..=p` evaluated at
/// `target`, from a Vandermonde solve in coordinates mapped to `[-1, 1]`.
fn vandermonde_weights(p: usize, target: f64) -> Vec<f64> {
    let map = |x: f64| (2.0 * x - p as f64) / p as f64;
    let v = DMatrix::from_fn(p + 1, p + 1, |m, j| map(j as f64).powi(m as i32));
    let rhs = DVector::from_fn(p + 1, |m, _| map(target).powi(m as i32));
    v.lu().solve(&rhs).unwrap().iter().copied().collect()
}

#[test]
fn extrapolation_weights_match_vandermonde() {
    for p in [3, 5, 7, 9] {
        let b = GdBasis::new(p, 2 * p + 2).unwrap();
        let w = b.extrapolation_weights();
        assert_eq!(w.len(), p.div_ceil(2) - 1);
        for (g, row) in w.iter().enumerate() {
            let oracle = vandermonde_weights(p, -(g as f64) - 1.0);
            for (a, o) in row.iter().zip(&oracle) {
                assert!(
                    (a - o).abs() <= 1e-9 * o.abs().max(1.0),
                    "p={p} g={g}: {a} vs {o}"
                );
            }
        }
    }
}

#[test]
fn linear_basis_is_hat_functions() {
    let b = GdBasis::new(1, 4).unwrap();
    assert!((b.eval(1, 0.125).unwrap() - 0.5).abs() < 1e-15);
    assert!((b.eval(2, 0.125).unwrap()).abs() < 1e-15);
    assert!((b.eval_deriv(1, 0.25, Side::Left).unwrap() - 4.0).abs() < 1e-12);
    assert!((b.eval_deriv(1, 0.25, Side::Right).unwrap() + 4.0).abs() < 1e-12);
}

#[test]
fn rejects_even_degree_and_coarse_mesh() {
    assert!(GdBasis::new(2, 10).is_err());
    assert!(GdBasis::new(0, 10).is_err());
    assert!(GdBasis::new(7, 6).is_err());
    assert!(GdBasis::new(7, 7).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cardinal_at_nodes((p, cells) in degree_and_cells(), i in 0usize..64, j in 0usize..64) {
        let b = GdBasis::new(p, cells).unwrap();
        let (i, j) = (i % (cells + 1), j % (cells + 1));
        let v = b.eval(i, j as f64 / cells as f64).unwrap();
        let expect = if i == j { 1.0 } else { 0.0 };
        prop_assert!((v - expect).abs() < 1e-11);
    }

    #[test]
    fn partition_of_unity((p, cells) in degree_and_cells(), x in 0.0f64..=1.0) {
        let b = GdBasis::new(p, cells).unwrap();
        let sum: f64 = (0..=cells).map(|i| b.eval(i, x).unwrap()).sum();
        let dsum: f64 = (0..=cells).map(|i| b.eval_deriv(i, x, Side::Right).unwrap()).sum();
        prop_assert!((sum - 1.0).abs() < 1e-11);
        prop_assert!(dsum.abs() < 1e-8 * cells as f64);
    }

    #[test]
    fn reproduces_polynomials((p, cells) in degree_and_cells(), coeffs in prop::collection::vec(-1.0f64..1.0, 10), x in 0.0f64..=1.0) {
        let b = GdBasis::new(p, cells).unwrap();
        let poly = |t: f64| coeffs[..=p].iter().rev().fold(0.0, |acc, c| acc * t + c);
        let nodal: Vec<f64> = (0..=cells).map(|j| poly(j as f64 / cells as f64)).collect();
        prop_assert!((b.interpolate(&nodal, x).unwrap() - poly(x)).abs() < 1e-11);
    }

    #[test]
    fn interior_functions_are_translates(p in prop::sample::select(vec![1usize, 3, 5, 7]), s in 0.0f64..1.0) {
        let cells = 8 * p + 8;
        let b = GdBasis::new(p, cells).unwrap();
        let h = b.spacing();
        let i = cells / 2;
        let q = p.div_ceil(2) as f64;
        let x = (i as f64 - q + 2.0 * q * s) * h;
        let a = b.eval(i, x).unwrap();
        let c = b.eval(i + 1, x + h).unwrap();
        prop_assert!((a - c).abs() < 1e-11);
    }

    #[test]
    fn compact_support((p, cells) in degree_and_cells(), i in 0usize..64, x in 0.0f64..=1.0) {
        let b = GdBasis::new(p, cells).unwrap();
        let i = i % (cells + 1);
        let q = p.div_ceil(2) as f64;
        let dist = (x * cells as f64 - i as f64).abs();
        // ghost nodes are extrapolated from the first/last p + 1 nodes, widening their support
        let near_boundary = i <= p || i + p >= cells;
        if dist >= q && !near_boundary {
            prop_assert_eq!(b.eval(i, x).unwrap(), 0.0);
        }
    }
}
