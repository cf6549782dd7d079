mod common;

use common::*;
use proptest::prelude::*;
use randsolve::linalg::{
    condition_number, matmul, pseudoinverse, singular_values, svd_checked, symmetric_eigenvalues,
    weighted_norm,
};
use randsolve::{DenseMatrix, DenseVector, RngState, SpdMatrix};

fn seeded(seed: u64, m: usize, n: usize) -> DenseMatrix {
    RngState::new(seed).gaussian_matrix(m, n)
}

#[test]
fn eigenvalues_agree_with_jacobi() {
    let mut rng = RngState::new(41);
    for n in [1, 2, 5, 9, 16] {
        let s = random_spd(&mut rng, n);
        let ours = symmetric_eigenvalues(&s).unwrap();
        let oracle = jacobi_eigenvalues(&s);
        for (x, y) in ours.iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-10 * oracle[n - 1], "n={n}: {x} vs {y}");
        }
    }
}

#[test]
fn condition_number_agrees_with_gram_oracle() {
    for (seed, m, n) in [(1, 8, 3), (2, 5, 5), (3, 3, 7), (4, 30, 12)] {
        let a = seeded(seed, m, n);
        let ours = condition_number(&a);
        let oracle = oracle_condition(&a);
        assert!((ours / oracle - 1.0).abs() < 1e-8, "{ours} vs {oracle}");
    }
}

#[test]
fn pseudoinverse_of_full_column_rank_is_left_inverse() {
    let a = seeded(9, 12, 5);
    let at = naive_transpose(&a);
    let oracle = naive_matmul(&gauss_inverse(&naive_matmul(&at, &a)), &at);
    assert!(max_abs(&(pseudoinverse(&a) - oracle)) < 1e-12);
}

#[test]
fn singular_values_descend() {
    let s = singular_values(&seeded(5, 9, 6));
    assert!(s.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn spd_sqrt_and_inverse_against_oracles() {
    let mut rng = RngState::new(17);
    let raw = random_spd(&mut rng, 7);
    let s = SpdMatrix::new(raw.clone()).unwrap();
    let r = s.sqrt();
    assert!(max_abs(&(naive_matmul(&r, &r) - &raw)) < 1e-12);
    assert!(max_abs(&(s.inverse().into_inner() - gauss_inverse(&raw))) < 1e-12);
    let ir = s.inv_sqrt();
    assert!(max_abs(&(naive_matmul(&naive_matmul(&ir, &raw), &ir) - DenseMatrix::identity(7, 7))) < 1e-12);
}

#[test]
fn weighted_norm_matches_quadratic_form() {
    let mut rng = RngState::new(2);
    let w = random_spd(&mut rng, 6);
    let v = DenseVector::from_iterator(6, (0..6).map(|i| i as f64 - 2.5));
    let ours = weighted_norm(&v, &SpdMatrix::new(w.clone()).unwrap()).unwrap();
    assert!((ours - quad(&v, &w).sqrt()).abs() < 1e-13);
}

fn rank_r(seed: u64, m: usize, n: usize, r: usize) -> DenseMatrix {
    if r == 0 {
        return DenseMatrix::zeros(m, n);
    }
    let mut rng = RngState::new(seed);
    let u = rng.gaussian_matrix(m, r);
    let v = rng.gaussian_matrix(r, n);
    naive_matmul(&u, &v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checked_svd_reconstructs(seed in any::<u64>(), m in 1usize..9, n in 1usize..9, exp in -20i32..20) {
        let a = seeded(seed, m, n) * 2f64.powi(exp);
        let (u, s, vt) = svd_checked(&a);
        let rebuilt = naive_matmul(&naive_matmul(&u, &DenseMatrix::from_diagonal(&s)), &vt);
        prop_assert!(max_abs(&(rebuilt - &a)) <= 1e-12 * max_abs(&a).max(f64::MIN_POSITIVE));
    }

    #[test]
    fn matmul_matches_triple_loop(seed in any::<u64>(), m in 1usize..9, k in 1usize..9, n in 1usize..9) {
        let mut rng = RngState::new(seed);
        let a = rng.gaussian_matrix(m, k);
        let b = rng.gaussian_matrix(k, n);
        prop_assert!(max_abs(&(matmul(&a, &b).unwrap() - naive_matmul(&a, &b))) < 1e-12);
    }

    #[test]
    fn matmul_rejects_mismatched_inner_dims(m in 1usize..6, k in 1usize..6, n in 1usize..6) {
        let a = DenseMatrix::zeros(m, k);
        let b = DenseMatrix::zeros(k + 1, n);
        prop_assert!(matmul(&a, &b).is_err());
    }

    #[test]
    fn moore_penrose_identities(seed in any::<u64>(), m in 1usize..10, n in 1usize..10, which in 0usize..3) {
        let r = match which { 0 => 0, 1 => 1, _ => m.min(n) };
        let a = rank_r(seed, m, n, r);
        let p = pseudoinverse(&a);
        let scale = 1.0 + max_abs(&a) * max_abs(&p);
        let tol = 1e-9 * scale * scale;
        prop_assert!(max_abs(&(naive_matmul(&naive_matmul(&a, &p), &a) - &a)) <= tol * (1.0 + max_abs(&a)));
        prop_assert!(max_abs(&(naive_matmul(&naive_matmul(&p, &a), &p) - &p)) <= tol * (1.0 + max_abs(&p)));
        let ap = naive_matmul(&a, &p);
        let pa = naive_matmul(&p, &a);
        prop_assert!(max_abs(&(&ap - naive_transpose(&ap))) <= tol);
        prop_assert!(max_abs(&(&pa - naive_transpose(&pa))) <= tol);
    }

    #[test]
    fn rayleigh_quotients_are_bracketed(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = RngState::new(seed);
        let b = rng.gaussian_matrix(n, n);
        let s = (&b + naive_transpose(&b)) * 0.5;
        let ev = symmetric_eigenvalues(&s).unwrap();
        let (lo, hi) = (ev[0], ev[n - 1]);
        for _ in 0..5 {
            let v = DenseVector::from_iterator(n, (0..n).map(|_| rng.standard_normal()));
            let q = quad(&v, &s) / v.norm_squared();
            let slack = 1e-12 * (lo.abs() + hi.abs() + 1.0);
            prop_assert!(q >= lo - slack && q <= hi + slack);
        }
    }

    #[test]
    fn weighted_square_root_commutes(seed in any::<u64>(), n in 1usize..9) {
        let mut rng = RngState::new(seed);
        let raw = random_spd(&mut rng, n);
        let r = SpdMatrix::new(raw.clone()).unwrap().sqrt();
        prop_assert!(max_abs(&(naive_matmul(&raw, &r) - naive_matmul(&r, &raw))) < 1e-11);
        prop_assert!(max_abs(&(&r - naive_transpose(&r))) < 1e-13);
        prop_assert!(jacobi_eigenvalues(&r)[0] > 0.0);
    }
}
