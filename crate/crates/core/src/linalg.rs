//! Dense linear algebra primitives.
//!
//! Storage is `nalgebra`'s column-major `DMatrix<f64>` / `DVector<f64>`. The
//! decompositions (SVD, symmetric eigendecomposition) come from `nalgebra`;
//! this module adds the conventions the solvers rely on: the pseudoinverse
//! rank cutoff, the symmetry tolerance, and an SPD wrapper that caches its
//! eigendecomposition so square roots and inverses are cheap to form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type DenseVector = DVector<f64>;

/// Relative tolerance used for every symmetry check in the crate.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn shape(m: &DenseMatrix) -> String {
    format!("{}x{}", m.nrows(), m.ncols())
}

/// Dense product with a dimension check.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::dims(
            "matmul",
            format!("{} rows on the right", a.ncols()),
            shape(b),
        ));
    }
    Ok(a * b)
}

/// Singular values below this are treated as zero by [`pseudoinverse`].
pub fn pinv_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * sigma_max * f64::EPSILON
}

/// Thin SVD `(U, σ, Vᵀ)` with a reconstruction check.
///
/// `nalgebra`'s SVD occasionally returns orthogonal factors that do not
/// reproduce the input. The input is scaled by a power of two (exact) and
/// the factorization verified; on failure the transpose is factored instead
/// and the more accurate of the two is kept.
pub fn svd_checked(m: &DenseMatrix) -> (DenseMatrix, DenseVector, DenseMatrix) {
    let amax = m.amax();
    if amax == 0.0 || !amax.is_finite() {
        let svd = m.clone().svd(true, true);
        return (svd.u.expect("u"), svd.singular_values, svd.v_t.expect("v_t"));
    }
    let scale = 2f64.powi(amax.log2().floor() as i32);
    let scaled = m / scale;
    let tol = 1e3 * m.nrows().max(m.ncols()) as f64 * f64::EPSILON * scaled.amax();
    let factor = |x: &DenseMatrix| {
        let svd = x.clone().svd(true, true);
        let (u, s, v_t) = (svd.u.expect("u"), svd.singular_values, svd.v_t.expect("v_t"));
        let err = (&u * DenseMatrix::from_diagonal(&s) * &v_t - x).amax();
        (u, s, v_t, err)
    };
    let (mut u, mut s, mut v_t, err) = factor(&scaled);
    if err > tol {
        let (ut, st, vt_t, err_t) = factor(&scaled.transpose());
        if err_t < err {
            u = vt_t.transpose();
            s = st;
            v_t = ut.transpose();
        }
    }
    (u, s * scale, v_t)
}

/// Moore–Penrose pseudoinverse via the SVD.
///
/// Singular values `σ ≤ max(rows, cols)·σ_max·ε` are dropped, so a zero
/// matrix maps to the zero matrix of transposed shape.
pub fn pseudoinverse(m: &DenseMatrix) -> DenseMatrix {
    let (rows, cols) = m.shape();
    if rows == 1 && cols == 1 {
        let v = m[(0, 0)];
        // For 1x1 the cutoff is |v|·ε < |v|, so only an exact zero is dropped.
        let inv = if v != 0.0 { 1.0 / v } else { 0.0 };
        return DenseMatrix::from_element(1, 1, inv);
    }
    let (u, sigma, v_t) = svd_checked(m);
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = pinv_cutoff(rows, cols, sigma_max);

    // M† = V Σ† Uᵀ, accumulated one retained singular triple at a time.
    let mut out = DenseMatrix::zeros(cols, rows);
    for (k, &s) in sigma.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let vk = v_t.row(k).transpose();
        let uk = u.column(k);
        out.ger(1.0 / s, &vk, &uk, 1.0);
    }
    out
}

/// Largest entrywise asymmetry relative to the largest entry magnitude.
pub fn relative_asymmetry(s: &DenseMatrix) -> f64 {
    if !s.is_square() {
        return f64::INFINITY;
    }
    let scale = s.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let n = s.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    worst / scale
}

fn check_symmetric(s: &DenseMatrix, op: &'static str) -> Result<()> {
    if !s.is_square() {
        return Err(Error::dims(op, "square matrix", shape(s)));
    }
    let asymmetry = relative_asymmetry(s);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// `(S + Sᵀ)/2`.
pub fn symmetrize(s: &DenseMatrix) -> DenseMatrix {
    (s + s.transpose()) * 0.5
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Result<Vec<f64>> {
    check_symmetric(s, "symmetric_eigenvalues")?;
    let mut vals: Vec<f64> = symmetrize(s).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn extremal_eigs(s: &DenseMatrix) -> Result<(f64, f64)> {
    let vals = symmetric_eigenvalues(s)?;
    Ok((vals[0], vals[vals.len() - 1]))
}

/// Largest eigenvalue of `(S + Sᵀ)/2`, no symmetry check. Used on Monte-Carlo
/// averages whose asymmetry is sampling noise.
pub fn lambda_max_sym_part(s: &DenseMatrix) -> f64 {
    symmetrize(s)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = svd_checked(m).1.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 2-norm condition number `σ_max/σ_min`; infinite when rank deficient.
pub fn condition_number(m: &DenseMatrix) -> f64 {
    let s = singular_values(m);
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo <= pinv_cutoff(m.nrows(), m.ncols(), hi) {
        f64::INFINITY
    } else {
        hi / lo
    }
}

pub fn frobenius_norm_sq(m: &DenseMatrix) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// `√(vᵀ W v)`.
pub fn weighted_norm(v: &DenseVector, w: &SpdMatrix) -> Result<f64> {
    if v.len() != w.dim() {
        return Err(Error::dims(
            "weighted_norm",
            format!("vector of length {}", w.dim()),
            format!("length {}", v.len()),
        ));
    }
    Ok(quad_form(v, w.as_matrix()).max(0.0).sqrt())
}

/// `vᵀ M v` without any checks.
pub(crate) fn quad_form(v: &DenseVector, m: &DenseMatrix) -> f64 {
    v.dot(&(m * v))
}

/// Symmetric square root of an SPD matrix.
pub fn spd_sqrt(w: &SpdMatrix) -> DenseMatrix {
    w.power(0.5)
}

/// Symmetric positive definite matrix with its eigendecomposition cached.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    inner: DenseMatrix,
    eigenvalues: DenseVector,
    eigenvectors: DenseMatrix,
}

impl SpdMatrix {
    /// Validates symmetry (1e-12 relative) and positive definiteness. The
    /// stored matrix is the symmetrized input.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        check_symmetric(&m, "SpdMatrix::new")?;
        let inner = symmetrize(&m);
        let eig = inner.clone().symmetric_eigen();
        let lambda_min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        // Eigenvalues at roundoff level relative to the spectrum are not
        // evidence of definiteness.
        let floor = inner.nrows() as f64 * f64::EPSILON * lambda_max;
        if !(lambda_min > floor) {
            return Err(Error::NotPositiveDefinite { lambda_min });
        }
        Ok(Self {
            inner,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DenseMatrix::identity(n, n),
            eigenvalues: DenseVector::from_element(n, 1.0),
            eigenvectors: DenseMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.inner
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.iter().cloned().fold(0.0, f64::max)
    }

    pub fn condition_number(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    /// `Q diag(λ^p) Qᵀ`.
    pub fn power(&self, p: f64) -> DenseMatrix {
        let q = &self.eigenvectors;
        let scaled = DenseMatrix::from_fn(q.nrows(), q.ncols(), |i, j| {
            q[(i, j)] * self.eigenvalues[j].powf(p)
        });
        symmetrize(&(scaled * q.transpose()))
    }

    pub fn inverse(&self) -> SpdMatrix {
        let inv = self.power(-1.0);
        Self {
            inner: inv,
            eigenvalues: self.eigenvalues.map(|l| 1.0 / l),
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    pub fn sqrt(&self) -> DenseMatrix {
        self.power(0.5)
    }

    pub fn inv_sqrt(&self) -> DenseMatrix {
        self.power(-0.5)
    }
}
