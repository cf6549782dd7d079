mod common;

use common::*;
use proptest::prelude::*;
use randsolve::problems::{
    read_matrixmarket, sparse_normal_pattern, write_matrixmarket, MmFormat,
};
use randsolve::{generate, load_matrixmarket, DenseMatrix, ProblemKind, ProblemSpec, RngState, SpdMatrix};

#[test]
fn sparse_spd_hits_condition_target() {
    let spec = ProblemSpec::new(ProblemKind::SparseSpd, 50, 50, 2024);
    let g = generate(&spec).unwrap();
    let a = g.problem.a();
    SpdMatrix::new(a.clone()).unwrap();
    let ev = jacobi_eigenvalues(a);
    assert!(ev[0] > 0.0);
    let kappa = ev[49] / ev[0];
    let target = 1.0 / spec.effective_rc();
    assert!((kappa / target - 1.0).abs() < 0.05, "{kappa} vs {target}");
}

#[test]
fn sparse_normal_pattern_density_near_default() {
    let density = ProblemSpec::default_density(100, 100);
    let p = sparse_normal_pattern(100, 100, density, &mut RngState::new(5));
    let nnz = p.iter().filter(|&&v| v != 0.0).count() as f64 / 1e4;
    let target = 1.0 / 1e4f64.ln();
    assert!((nnz / target - 1.0).abs() < 0.2, "{nnz} vs {target}");

    let g = generate(&ProblemSpec::new(ProblemKind::SparseNormal, 100, 100, 5)).unwrap();
    assert!((g.stats.pattern_density / target - 1.0).abs() < 0.2);
}

#[test]
fn sparse_normal_condition_within_five_percent() {
    let spec = ProblemSpec::new(ProblemKind::SparseNormal, 60, 25, 8);
    let g = generate(&spec).unwrap();
    let kappa = oracle_condition(g.problem.a());
    let target = 1.0 / spec.effective_rc();
    assert!((kappa / target - 1.0).abs() < 0.05, "{kappa} vs {target}");
    assert!((g.stats.condition_number.unwrap() / kappa - 1.0).abs() < 1e-6);
}

#[test]
fn file_problems_load_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mtx");
    let a = DenseMatrix::from_row_slice(3, 2, &[2.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    write_matrixmarket(&path, &a, MmFormat::Coordinate).unwrap();
    let g = generate(&ProblemSpec::from_file(&path)).unwrap();
    assert_eq!(g.problem.a(), &a);
    assert_eq!(g.problem.b().as_slice(), &[2.0, 1.0, 2.0]);
    assert!((g.stats.pattern_density - 4.0 / 6.0).abs() < 1e-15);
}

#[test]
fn missing_file_is_an_error() {
    assert!(load_matrixmarket("/nonexistent/definitely/missing.mtx").is_err());
}

#[test]
fn array_file_entries_follow_column_major_order() {
    let text = "%%MatrixMarket matrix array real general\n% generated\n3 2\n1.5\n-2\n0\n4e-3\n5\n6\n";
    let a = read_matrixmarket(text.as_bytes(), "x.mtx").unwrap();
    assert_eq!(a, DenseMatrix::from_column_slice(3, 2, &[1.5, -2.0, 0.0, 4e-3, 5.0, 6.0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matrixmarket_round_trip_is_exact(seed in any::<u64>(), m in 1usize..8, n in 1usize..8, coord in any::<bool>()) {
        let mut rng = RngState::new(seed);
        let a = DenseMatrix::from_fn(m, n, |_, _| {
            if rng.open01() < 0.3 { 0.0 } else { rng.standard_normal() * 10f64.powi(rng.index(40) as i32 - 20) }
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mtx");
        let format = if coord { MmFormat::Coordinate } else { MmFormat::Array };
        write_matrixmarket(&path, &a, format).unwrap();
        let back = load_matrixmarket(&path).unwrap();
        prop_assert_eq!(back.shape(), a.shape());
        for (x, y) in a.iter().zip(back.iter()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn generated_problems_are_consistent_and_deterministic(seed in any::<u64>(), kind in 0usize..3, m in 2usize..14, n in 2usize..14) {
        let kind = [ProblemKind::UniformDense, ProblemKind::SparseNormal, ProblemKind::SparseSpd][kind];
        let m = if kind == ProblemKind::SparseSpd { n } else { m };
        let spec = ProblemSpec::new(kind, m, n, seed);
        let one = generate(&spec).unwrap();
        let two = generate(&spec).unwrap();
        prop_assert_eq!(one.problem.a(), two.problem.a());
        let a = one.problem.a();
        let x = one.problem.x_star().unwrap();
        prop_assert!(x.iter().all(|&v| v == 1.0));
        prop_assert_eq!(&(a * x), one.problem.b());
        if kind == ProblemKind::SparseSpd {
            prop_assert!(SpdMatrix::new(a.clone()).is_ok());
        }
        if kind == ProblemKind::UniformDense {
            prop_assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }
}
