use gdwave::linalg::kron::kron_apply;
use gdwave::linalg::{
    pcg_solve, AugmentedOperator, CsrMatrix, DenseMatrix, IncompleteCholesky,
    KroneckerFactorization, LinearOperator, SymBand,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Diagonally dominant symmetric band matrix from raw off-diagonal values.
fn spd_band(n: usize, bw: usize, raw: &[f64]) -> SymBand {
    let mut a = SymBand::zeros(n, bw);
    let mut k = 0;
    for i in 0..n {
        for j in i.saturating_sub(bw)..i {
            a.set(i, j, raw[k % raw.len()]);
            k += 1;
        }
    }
    for i in 0..n {
        let row: f64 = (0..n)
            .filter(|&j| j != i && i.abs_diff(j) <= bw)
            .map(|j| a.get(i, j).abs())
            .sum();
        a.set(i, i, row + 1.0 + (i % 3) as f64);
    }
    a
}

fn band_strategy() -> impl Strategy<Value = SymBand> {
    (
        2usize..30,
        0usize..5,
        prop::collection::vec(-1.0f64..1.0, 1..40),
    )
        .prop_map(|(n, bw, raw)| spd_band(n, bw.min(n - 1), &raw))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn band_cholesky_matches_dense_solve(a in band_strategy(), seed in 0u64..1000) {
        let n = a.size();
        let b: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 17) as f64 - 8.0).collect();
        let x = a.cholesky().unwrap().solve(&b);
        let oracle = to_na(&a.to_dense()).cholesky().unwrap().solve(&DVector::from_vec(b.clone()));
        for (u, v) in x.iter().zip(oracle.iter()) {
            prop_assert!((u - v).abs() < 1e-10 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn band_factor_is_dense_factor(a in band_strategy()) {
        let l = to_na(&a.cholesky().unwrap().lower());
        let oracle = to_na(&a.to_dense()).cholesky().unwrap().l();
        prop_assert!((l - oracle).abs().max() < 1e-12 * to_na(&a.to_dense()).abs().max());
    }

    #[test]
    fn kronecker_apply_and_solve(a in band_strategy(), b in band_strategy(), x0 in prop::collection::vec(-1.0f64..1.0, 1..8)) {
        let (na, nb) = (a.size(), b.size());
        let x: Vec<f64> = (0..na * nb).map(|i| x0[i % x0.len()] + i as f64 * 1e-3).collect();
        // first factor acts on the fastest index
        let oracle = to_na(&b.to_dense()).kronecker(&to_na(&a.to_dense()));
        let y = kron_apply(&[&a, &b], &x);
        let yo = &oracle * DVector::from_vec(x.clone());
        for (u, v) in y.iter().zip(yo.iter()) {
            prop_assert!((u - v).abs() < 1e-11 * (1.0 + v.abs()));
        }
        let f = KroneckerFactorization::new(&[a.clone(), b.clone()]).unwrap();
        let back = f.solve(&y).unwrap();
        for (u, v) in back.iter().zip(&x) {
            prop_assert!((u - v).abs() < 1e-9 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn pcg_with_ic0_solves_spd(a in band_strategy(), seed in 0u64..1000) {
        let csr = CsrMatrix::from_dense(&a.to_dense());
        let ic = IncompleteCholesky::new(&csr).unwrap();
        let n = a.size();
        let b: Vec<f64> = (0..n).map(|i| (((i as u64 + 1) * 104729 + seed) % 23) as f64 - 11.0).collect();
        let mut x = vec![0.0; n];
        pcg_solve(&csr, &ic, &b, &mut x, 1e-12, 200).unwrap();
        let oracle = to_na(&a.to_dense()).lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for (u, v) in x.iter().zip(oracle.iter()) {
            prop_assert!((u - v).abs() < 1e-8 * (1.0 + oracle.abs().max()));
        }
    }
}

#[test]
fn ic0_is_exact_without_fill() {
    // tridiagonal: Cholesky creates no fill, so IC(0) is the exact factor
    let a = spd_band(12, 1, &[-0.4, 0.3, -0.9]);
    let csr = CsrMatrix::from_dense(&a.to_dense());
    let ic = IncompleteCholesky::new(&csr).unwrap();
    assert_eq!(ic.shift(), 0.0);
    let oracle = to_na(&a.to_dense()).cholesky().unwrap().l();
    assert!((to_na(&ic.lower()) - oracle).abs().max() < 1e-13);
}

#[test]
fn augmentation_removes_constant_null_space() {
    let n = 8;
    let lap = DenseMatrix::from_fn(n, n, |i, j| {
        let d = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
        match i.abs_diff(j) {
            0 => d,
            1 => -1.0,
            _ => 0.0,
        }
    });
    let s = CsrMatrix::from_dense(&lap);
    let m = vec![1.0 / n as f64; n];
    let aug = AugmentedOperator::new(&s, &m, 3.0);
    let ones = vec![1.0; n];
    let mut y = vec![0.0; n];
    aug.apply(&ones, &mut y);
    // S·1 = 0, so only σ m (mᵀ1) remains
    for v in &y {
        assert!((v - 3.0 / n as f64).abs() < 1e-14);
    }
    let dense = to_na(&lap) + DMatrix::from_fn(n, n, |i, j| 3.0 * m[i] * m[j]);
    assert!(dense.cholesky().is_some());
    assert!(to_na(&lap).cholesky().is_none());
}
