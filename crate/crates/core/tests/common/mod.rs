//! Test-side reference implementations. Nothing here calls into the
//! library's linear algebra, so agreement is a genuine cross-check.

#![allow(dead_code)]

use randsolve::schemes::Family;
use randsolve::sketch::Sample;
use randsolve::{DenseMatrix, DenseVector, RngState, Scheme, SchemeId, SketchDraw, SpdMatrix};

pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut c = DenseMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut s = 0.0;
            for k in 0..a.ncols() {
                s += a[(i, k)] * b[(k, j)];
            }
            c[(i, j)] = s;
        }
    }
    c
}

pub fn naive_transpose(a: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)])
}

/// Cyclic Jacobi rotations; eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(s: &DenseMatrix) -> Vec<f64> {
    let n = s.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| s[(i, j)]).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>() + off;
        if off <= 1e-30 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `σ_max/σ_min` through the Gram eigenvalues.
pub fn oracle_condition(a: &DenseMatrix) -> f64 {
    let g = if a.nrows() >= a.ncols() {
        naive_matmul(&naive_transpose(a), a)
    } else {
        naive_matmul(a, &naive_transpose(a))
    };
    let ev = jacobi_eigenvalues(&g);
    (ev[ev.len() - 1] / ev[0]).sqrt()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_inverse(a: &DenseMatrix) -> DenseMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut inv = DenseMatrix::identity(n, n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs()))
            .unwrap();
        assert!(m[(piv, col)].abs() > 1e-300, "singular matrix");
        m.swap_rows(col, piv);
        inv.swap_rows(col, piv);
        let d = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[(i, col)];
                if f != 0.0 {
                    for j in 0..n {
                        m[(i, j)] -= f * m[(col, j)];
                        inv[(i, j)] -= f * inv[(col, j)];
                    }
                }
            }
        }
    }
    inv
}

pub fn max_abs(m: &DenseMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

pub fn gaussian(rng: &mut RngState, m: usize, n: usize) -> DenseMatrix {
    rng.gaussian_matrix(m, n)
}

/// `BBᵀ/n + I`, comfortably conditioned.
pub fn random_spd(rng: &mut RngState, n: usize) -> DenseMatrix {
    let b = rng.gaussian_matrix(n, n);
    let mut s = naive_matmul(&b, &naive_transpose(&b)) / n as f64;
    for i in 0..n {
        s[(i, i)] += 1.0;
    }
    (&s + naive_transpose(&s)) * 0.5
}

/// Explicit test matrix of a draw built from its raw sample.
pub fn oracle_test_matrix(draw: &SketchDraw, dim: usize) -> DenseMatrix {
    match &draw.sample {
        Sample::Index(i) => DenseMatrix::from_fn(dim, 1, |r, _| if r == *i { 1.0 } else { 0.0 }),
        Sample::Subset(ix) => {
            DenseMatrix::from_fn(dim, ix.len(), |r, c| if r == ix[c] { 1.0 } else { 0.0 })
        }
        Sample::Gaussian(g) => g.clone(),
    }
}

fn oracle_y_z(scheme: &Scheme, a: &DenseMatrix, draw: &SketchDraw) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    let at = naive_transpose(a);
    let g = scheme.g().map(|g| g.as_matrix().clone());
    match scheme.id().family() {
        Family::K => {
            let y = oracle_test_matrix(draw, m);
            let mut z = naive_matmul(&at, &y);
            if let Some(g) = &g {
                z = naive_matmul(g, &z);
            }
            (y, z)
        }
        Family::C => {
            let z = oracle_test_matrix(draw, n);
            let mut y = naive_matmul(a, &z);
            if let Some(g) = &g {
                y = naive_matmul(g, &y);
            }
            (y, z)
        }
        Family::S => {
            let z = oracle_test_matrix(draw, n);
            (z.clone(), z)
        }
    }
}

/// `κ(YᵀAZ)` for the draw.
pub fn sketched_condition(scheme: &Scheme, a: &DenseMatrix, draw: &SketchDraw) -> f64 {
    let (y, z) = oracle_y_z(scheme, a, draw);
    oracle_condition(&naive_matmul(&naive_transpose(&y), &naive_matmul(a, &z)))
}

/// First-order rounding scale `κ_F(E)·‖Z‖·‖E⁻¹‖·‖W‖` for `Ξ` (`W = Y`) or
/// `ΞA` (`W = YᵀA`, when `times_a`), with `E = YᵀAZ` and Frobenius norms.
pub fn xi_error_scale(scheme: &Scheme, a: &DenseMatrix, draw: &SketchDraw, times_a: bool) -> f64 {
    let (y, z) = oracle_y_z(scheme, a, draw);
    let yta = naive_matmul(&naive_transpose(&y), a);
    let e = naive_matmul(&yta, &z);
    let w = if times_a { yta.norm() } else { y.norm() };
    let e_inv = gauss_inverse(&e).norm();
    e.norm() * e_inv * z.norm() * e_inv * w
}

/// `Ξ = Z (YᵀAZ)⁻¹ Yᵀ` with `(Y, Z)` from the scheme catalog, inverted by
/// Gauss-Jordan. Valid when `YᵀAZ` is nonsingular.
pub fn oracle_xi(scheme: &Scheme, a: &DenseMatrix, draw: &SketchDraw) -> DenseMatrix {
    let (y, z) = oracle_y_z(scheme, a, draw);
    let e = naive_matmul(&naive_transpose(&y), &naive_matmul(a, &z));
    naive_matmul(&naive_matmul(&z, &gauss_inverse(&e)), &naive_transpose(&y))
}

/// A scheme on an `m x n` (or `n x n` SPD for type S) instance with block
/// size `l` where applicable and a random SPD weight when required.
pub fn build_scheme(id: SchemeId, m: usize, n: usize, l: usize, rng: &mut RngState) -> Scheme {
    let scheme = if id.requires_g() {
        let dim = match id.family() {
            Family::C => m,
            _ => n,
        };
        Scheme::with_weight(id, SpdMatrix::new(random_spd(rng, dim)).unwrap()).unwrap()
    } else {
        Scheme::new(id).unwrap()
    };
    if id.is_block() {
        scheme.with_block_size(l).unwrap()
    } else {
        scheme
    }
}

/// Coefficient matrix suited to `id`: SPD for type S, Gaussian otherwise.
pub fn instance(id: SchemeId, m: usize, n: usize, rng: &mut RngState) -> DenseMatrix {
    match id.family() {
        Family::S => random_spd(rng, n),
        _ => gaussian(rng, m, n),
    }
}

pub fn ones(n: usize) -> DenseVector {
    DenseVector::from_element(n, 1.0)
}

pub fn quad(v: &DenseVector, w: &DenseMatrix) -> f64 {
    let wv = naive_matmul(w, &DenseMatrix::from_column_slice(v.len(), 1, v.as_slice()));
    (0..v.len()).map(|i| v[i] * wv[(i, 0)]).sum()
}
