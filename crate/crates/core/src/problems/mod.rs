//! Test-problem generators and MatrixMarket I/O.
//!
//! Every generated problem has `x* = ones` and `b = A x*`.

mod matrix_market;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, symmetrize, DenseMatrix, DenseVector, SpdMatrix};
use crate::sketch::RngState;
use crate::solver::Problem;

pub use matrix_market::{load_matrixmarket, read_matrixmarket, write_matrixmarket, write_matrixmarket_to, MmFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    /// i.i.d. uniform entries on (0, 1).
    UniformDense,
    /// Sparse standard-normal pattern, then singular values reassigned to a
    /// geometric grid from `σ_max` down to `rc·σ_max`.
    SparseNormal,
    /// `Q Λ Qᵀ`, `Q` the eigenvectors of a sparse symmetric normal matrix and
    /// `Λ` geometric on `[rc, 1]`.
    SparseSpd,
    /// MatrixMarket file at `path`.
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rc: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, m: usize, n: usize, seed: u64) -> Self {
        Self {
            kind,
            m,
            n,
            density: None,
            rc: None,
            seed,
            path: None,
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Self {
        Self {
            path: Some(path.into()),
            ..Self::new(ProblemKind::FromFile, 0, 0, 0)
        }
    }

    /// `1/ln(mn)`, clamped to `(0, 1]`.
    pub fn default_density(m: usize, n: usize) -> f64 {
        let mn = (m * n) as f64;
        if mn <= std::f64::consts::E {
            1.0
        } else {
            (1.0 / mn.ln()).min(1.0)
        }
    }

    /// `1/√(mn)`.
    pub fn default_rc(m: usize, n: usize) -> f64 {
        (1.0 / ((m * n) as f64).sqrt()).min(1.0)
    }

    pub fn effective_density(&self) -> f64 {
        self.density.unwrap_or_else(|| Self::default_density(self.m, self.n))
    }

    pub fn effective_rc(&self) -> f64 {
        self.rc.unwrap_or_else(|| Self::default_rc(self.m, self.n))
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ProblemKind::FromFile {
            return match self.path {
                Some(_) => Ok(()),
                None => Err(Error::InvalidProblem("FromFile needs a path".into())),
            };
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidProblem(format!("empty problem {}x{}", self.m, self.n)));
        }
        if self.kind == ProblemKind::SparseSpd && self.m != self.n {
            return Err(Error::InvalidProblem(format!(
                "SparseSpd needs m = n, got {}x{}",
                self.m, self.n
            )));
        }
        for (name, v) in [("density", self.density), ("rc", self.rc)] {
            if let Some(v) = v {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::InvalidProblem(format!("{name} = {v} is outside (0, 1]")));
                }
            }
        }
        Ok(())
    }
}

/// Achieved properties of a generated matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemStats {
    pub kind: ProblemKind,
    pub m: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_target: Option<f64>,
    /// Nonzero fraction of the sparse pattern before any reshaping; the
    /// actual nonzero fraction for dense and file inputs.
    pub pattern_density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rc_target: Option<f64>,
    /// `σ_max/σ_min` of the final matrix; `None` when rank deficient.
    pub condition_number: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub problem: Problem,
    pub stats: ProblemStats,
}

fn nonzero_fraction(a: &DenseMatrix) -> f64 {
    let total = a.len().max(1);
    a.iter().filter(|&&v| v != 0.0).count() as f64 / total as f64
}

/// Each entry independently nonzero with probability `density`, nonzeros
/// standard normal.
pub fn sparse_normal_pattern(m: usize, n: usize, density: f64, rng: &mut RngState) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            if rng.open01() < density {
                a[(i, j)] = rng.standard_normal();
            }
        }
    }
    a
}

/// Symmetric pattern: upper triangle (with diagonal) drawn at `density`,
/// mirrored below.
pub fn sparse_symmetric_pattern(n: usize, density: f64, rng: &mut RngState) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            if rng.open01() < density {
                let v = rng.standard_normal();
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
    }
    a
}

/// `σ_i = σ_max · rc^{i/(k−1)}`, `i = 0..k`.
fn geometric_grid(k: usize, hi: f64, rc: f64) -> Vec<f64> {
    if k == 1 {
        return vec![hi];
    }
    (0..k).map(|i| hi * rc.powf(i as f64 / (k - 1) as f64)).collect()
}

fn reshape_singular_values(a: &DenseMatrix, rc: f64) -> DenseMatrix {
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let hi = svd.singular_values.max();
    let hi = if hi > 0.0 { hi } else { 1.0 };
    let grid = geometric_grid(svd.singular_values.len(), hi, rc);
    // nalgebra does not sort singular values; map by rank.
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut sigma = DenseVector::zeros(grid.len());
    for (rank, &idx) in order.iter().enumerate() {
        sigma[idx] = grid[rank];
    }
    &u * DenseMatrix::from_diagonal(&sigma) * vt
}

fn generate_matrix(spec: &ProblemSpec, warnings: &mut Vec<String>) -> Result<(DenseMatrix, f64)> {
    let mut rng = RngState::new(spec.seed);
    let (m, n) = (spec.m, spec.n);
    let density = spec.effective_density();
    if matches!(spec.kind, ProblemKind::SparseNormal | ProblemKind::SparseSpd)
        && density * ((m * n) as f64) < (m.max(n) as f64)
    {
        warnings.push(format!(
            "density {density:.3e} gives fewer expected nonzeros than max(m, n) = {}; the pattern is likely structurally rank deficient",
            m.max(n)
        ));
    }
    Ok(match spec.kind {
        ProblemKind::UniformDense => {
            let a = DenseMatrix::from_fn(m, n, |_, _| rng.open01());
            let d = nonzero_fraction(&a);
            (a, d)
        }
        ProblemKind::SparseNormal => {
            let pattern = sparse_normal_pattern(m, n, density, &mut rng);
            let d = nonzero_fraction(&pattern);
            (reshape_singular_values(&pattern, spec.effective_rc()), d)
        }
        ProblemKind::SparseSpd => {
            let pattern = sparse_symmetric_pattern(n, density, &mut rng);
            let d = nonzero_fraction(&pattern);
            let q = pattern.symmetric_eigen().eigenvectors;
            let lambda = DenseVector::from_vec(geometric_grid(n, 1.0, spec.effective_rc()));
            let a = symmetrize(&(&q * DenseMatrix::from_diagonal(&lambda) * q.transpose()));
            (a, d)
        }
        ProblemKind::FromFile => {
            let path = spec.path.as_ref().expect("validated");
            let a = load_matrixmarket(path)?;
            let d = nonzero_fraction(&a);
            (a, d)
        }
    })
}

/// Builds the matrix, `x* = ones`, and `b = A x*`.
pub fn generate(spec: &ProblemSpec) -> Result<GeneratedProblem> {
    spec.validate()?;
    let mut warnings = Vec::new();
    let (a, pattern_density) = generate_matrix(spec, &mut warnings)?;
    let (m, n) = a.shape();
    let kappa = condition_number(&a);
    let sparse = matches!(spec.kind, ProblemKind::SparseNormal | ProblemKind::SparseSpd);
    if spec.kind == ProblemKind::SparseSpd {
        SpdMatrix::new(a.clone())?;
    }
    let stats = ProblemStats {
        kind: spec.kind,
        m,
        n,
        density_target: sparse.then(|| spec.effective_density()),
        pattern_density,
        rc_target: sparse.then(|| spec.effective_rc()),
        condition_number: kappa.is_finite().then_some(kappa),
        warnings,
    };
    let problem = Problem::from_solution(a, DenseVector::from_element(n, 1.0))?;
    Ok(GeneratedProblem { problem, stats })
}
