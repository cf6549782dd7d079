//! Convergence-rate formulas and Monte-Carlo / enumeration estimators used to
//! check them numerically.
//!
//! Spectral rates (exact for single-coordinate schemes under matching
//! sampling):
//!
//! ```text
//! K1, rows  ∝ ‖A_i:‖²   E‖e‖₂²     ≤ (1 − λ_min(AᵀA)/‖A‖_F²)^k ‖e⁰‖₂²
//! C1, cols  ∝ ‖A_:j‖²   E‖e‖²_AᵀA  ≤ (1 − λ_min(AᵀA)/‖A‖_F²)^k ‖e⁰‖²_AᵀA
//! S1, i     ∝ A_ii      E‖e‖²_A    ≤ (1 − λ_min(A)/trace(A))^k ‖e⁰‖²_A
//! ```
//!
//! Gaussian-sketch bounds (full column rank `A`, `m ≥ n`):
//!
//! ```text
//! type K: ρ = 1 − 1/(m κ(G^½AᵀAG^½))   in ‖·‖_{G⁻¹}
//! type C: ρ = 1 − 1/(n κ(AᵀGA))        in ‖·‖_{AᵀGA}
//! type S: ρ = 1 − 1/(n κ(A))           in ‖·‖_A
//! ```
//!
//! The type-K bound comes from `E[T̂] ≤ I − G^½AᵀAG^½ / (m λ_max(AGAᵀ))` with
//! `T̂ = G^{-½} T G^½`, which [`estimate_expectation_t`] checks directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, extremal_eigs, frobenius_norm_sq, lambda_max_sym_part, pinv_cutoff,
    pseudoinverse, singular_values, symmetrize, DenseMatrix, DenseVector, SpdMatrix,
};
use crate::schemes::{Family, Residual, Scheme, SchemeId};
use crate::sketch::{realize_y_z, Distribution, RngState};
use crate::solver::Problem;

/// A rate `ρ`; `degenerate` marks a rank-deficient input where the formula
/// gives no contraction and `ρ` is reported as 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub rho: f64,
    pub degenerate: bool,
}

impl Rate {
    fn degenerate() -> Self {
        Self {
            rho: 1.0,
            degenerate: true,
        }
    }

    fn of(rho: f64) -> Self {
        Self {
            rho,
            degenerate: false,
        }
    }
}

fn is_rank_deficient(lambda_min: f64, lambda_max: f64, n: usize) -> bool {
    lambda_min <= n as f64 * f64::EPSILON * lambda_max
}

/// `1 − λ_min(AᵀA)/‖A‖_F²`.
pub fn rate_k1(a: &DenseMatrix) -> Rate {
    let n = a.ncols();
    let gram = symmetrize(&a.tr_mul(a));
    let (lo, hi) = extremal_eigs(&gram).expect("symmetrized Gram matrix");
    if a.nrows() < n || is_rank_deficient(lo, hi, n) {
        return Rate::degenerate();
    }
    Rate::of(1.0 - lo / frobenius_norm_sq(a))
}

/// `1 − λ_min(A)/trace(A)` for SPD `A`.
pub fn rate_s1(a: &DenseMatrix) -> Result<f64> {
    let spd = SpdMatrix::new(a.clone())?;
    Ok(1.0 - spd.lambda_min() / a.trace())
}

fn g_or_identity(g: Option<&SpdMatrix>, dim: usize) -> Result<SpdMatrix> {
    match g {
        Some(g) if g.dim() != dim => Err(Error::dims(
            "theory",
            format!("{dim}x{dim} weight"),
            format!("{0}x{0}", g.dim()),
        )),
        Some(g) => Ok(g.clone()),
        None => Ok(SpdMatrix::identity(dim)),
    }
}

/// Condition number from the singular values of a symmetric PSD product.
fn kappa_of(sym: &DenseMatrix) -> f64 {
    condition_number(&symmetrize(sym))
}

/// The Gaussian-sketch bound for a family. `G` is `n x n` for type K,
/// `m x m` for type C, ignored for type S; `None` means the identity.
pub fn rate_projection_bound(a: &DenseMatrix, g: Option<&SpdMatrix>, family: Family) -> Result<Rate> {
    let (m, n) = a.shape();
    let (kappa, dim) = match family {
        Family::K => {
            let gh = g_or_identity(g, n)?.sqrt();
            (kappa_of(&(&gh * a.tr_mul(a) * &gh)), m)
        }
        Family::C => {
            let g = g_or_identity(g, m)?;
            (kappa_of(&a.tr_mul(&(g.as_matrix() * a))), n)
        }
        Family::S => {
            let spd = SpdMatrix::new(a.clone())?;
            (spd.condition_number(), n)
        }
    };
    if !kappa.is_finite() {
        return Ok(Rate::degenerate());
    }
    Ok(Rate::of(1.0 - 1.0 / (dim as f64 * kappa)))
}

/// Monte-Carlo average of `T̂` with its bound and a bootstrap error bar.
#[derive(Debug, Clone)]
pub struct ExpectationEstimate {
    pub matrix: DenseMatrix,
    pub samples: usize,
    pub bound_matrix: DenseMatrix,
    /// `λ_max(matrix − bound_matrix)`; the bound holds when this is ≤ 0 up
    /// to sampling error.
    pub max_violation: f64,
    /// Bootstrap standard deviation of `max_violation`.
    pub std_error: f64,
    pub bootstrap_replicates: usize,
}

impl ExpectationEstimate {
    /// The 3σ acceptance rule.
    pub fn bound_holds(&self) -> bool {
        self.max_violation <= 3.0 * self.std_error
    }
}

/// Estimates `E[T̂]`, `T̂ = G^{-½} T G^½`, for a Gaussian type-K scheme
/// (K2, K4, or K6; `G = I` unless the scheme carries one).
pub fn estimate_expectation_t(
    a: &DenseMatrix,
    scheme: &Scheme,
    samples: usize,
    bootstrap: usize,
    rng: &mut RngState,
) -> Result<ExpectationEstimate> {
    if !matches!(scheme.id(), SchemeId::K2 | SchemeId::K4 | SchemeId::K6) {
        return Err(Error::InvalidScheme(format!(
            "E[T̂] estimation is defined for the Gaussian type-K schemes, not {}",
            scheme.id()
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidProblem("need at least two samples".into()));
    }
    scheme.check_problem(a)?;
    let (m, n) = a.shape();
    let g = g_or_identity(scheme.g(), n)?;
    let (gh, gih) = (g.sqrt(), g.inv_sqrt());
    let sampler = scheme.sampler(a)?;

    let mut draws: Vec<DenseMatrix> = Vec::with_capacity(samples);
    let mut mean = DenseMatrix::zeros(n, n);
    for _ in 0..samples {
        let draw = sampler.draw(rng);
        let t_hat = &gih * scheme.projector_t(a, &draw)? * &gh;
        mean += &t_hat;
        draws.push(t_hat);
    }
    mean /= samples as f64;

    let lam = lambda_max_sym_part(&(a * g.as_matrix() * a.transpose()));
    let bound = DenseMatrix::identity(n, n) - (&gh * a.tr_mul(a) * &gh) / (m as f64 * lam);
    let max_violation = lambda_max_sym_part(&(&mean - &bound));

    let mut stats = Vec::with_capacity(bootstrap);
    for _ in 0..bootstrap {
        let mut resampled = DenseMatrix::zeros(n, n);
        for _ in 0..samples {
            resampled += &draws[rng.index(samples)];
        }
        resampled /= samples as f64;
        stats.push(lambda_max_sym_part(&(resampled - &bound)));
    }
    let std_error = std_dev(&stats);

    Ok(ExpectationEstimate {
        matrix: mean,
        samples,
        bound_matrix: bound,
        max_violation,
        std_error,
        bootstrap_replicates: bootstrap,
    })
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Exactly enumerated `E[W]` for a discrete column-sketch distribution.
#[derive(Debug, Clone)]
pub struct ExpectedW {
    pub matrix: DenseMatrix,
    pub lambda_min: f64,
    /// `λ_min(E[W]) > 1e-10`.
    pub positive_definite: bool,
    /// Every `AΩ_j` has full column rank and `p_j > 0`.
    pub assumption_i: bool,
    /// The stacked `[Ω_1, …, Ω_s]` has full row rank.
    pub assumption_ii: bool,
    /// `1 − λ_min(Ĝ^½ E[W] Ĝ^½)` with `Ĝ = AᵀGA`.
    pub rho: f64,
}

pub const POSITIVITY_TOL: f64 = 1e-10;

fn numerical_rank(m: &DenseMatrix) -> usize {
    let s = singular_values(m);
    let hi = s.first().copied().unwrap_or(0.0);
    let cut = pinv_cutoff(m.nrows(), m.ncols(), hi);
    s.iter().filter(|&&v| v > cut && v > 0.0).count()
}

/// `E[W] = Σ p_j Ω_j (Ω_jᵀ AᵀGA Ω_j)† Ω_jᵀ` over a finite family of `n x l_j`
/// test matrices. Violated assumptions are reported, not raised.
pub fn estimate_expectation_w(
    a: &DenseMatrix,
    g: Option<&SpdMatrix>,
    family: &[(DenseMatrix, f64)],
) -> Result<ExpectedW> {
    let (m, n) = a.shape();
    if family.is_empty() {
        return Err(Error::InvalidSketch("empty sketch family".into()));
    }
    let total: f64 = family.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSketch(format!("probabilities sum to {total}, not 1")));
    }
    let g = g_or_identity(g, m)?;
    let g_hat = symmetrize(&a.tr_mul(&(g.as_matrix() * a)));

    let mut assumption_i = true;
    let mut ew = DenseMatrix::zeros(n, n);
    for (omega, p) in family {
        if omega.nrows() != n {
            return Err(Error::dims("estimate_expectation_w", format!("{n} rows"), format!("{}", omega.nrows())));
        }
        let a_omega = a * omega;
        if *p <= 0.0 || numerical_rank(&a_omega) < omega.ncols() {
            assumption_i = false;
        }
        let inner = omega.tr_mul(&(&g_hat * omega));
        ew += omega * pseudoinverse(&inner) * omega.transpose() * *p;
    }
    let ew = symmetrize(&ew);

    let stacked_cols: usize = family.iter().map(|(o, _)| o.ncols()).sum();
    let mut stacked = DenseMatrix::zeros(n, stacked_cols);
    let mut c = 0;
    for (omega, _) in family {
        stacked.view_mut((0, c), (n, omega.ncols())).copy_from(omega);
        c += omega.ncols();
    }
    let assumption_ii = numerical_rank(&stacked) == n;

    let (lambda_min, _) = extremal_eigs(&ew)?;
    let rho = match SpdMatrix::new(g_hat.clone()) {
        Ok(gh) => {
            let root = gh.sqrt();
            let (lo, _) = extremal_eigs(&symmetrize(&(&root * &ew * &root)))?;
            1.0 - lo
        }
        Err(_) => 1.0,
    };
    Ok(ExpectedW {
        matrix: ew,
        lambda_min,
        positive_definite: lambda_min > POSITIVITY_TOL,
        assumption_i,
        assumption_ii,
        rho,
    })
}

/// Monte-Carlo `E[V]`, `V = AᵀY(YᵀAGAᵀY)†YᵀA`, for a type-K scheme, and
/// the resulting spectral rate `1 − λ_min(G^½ E[V] G^½)`.
#[derive(Debug, Clone)]
pub struct ExpectedV {
    pub matrix: DenseMatrix,
    pub samples: usize,
    pub lambda_min: f64,
    pub positive_definite: bool,
    pub rho: f64,
}

pub fn estimate_expectation_v(
    a: &DenseMatrix,
    scheme: &Scheme,
    samples: usize,
    rng: &mut RngState,
) -> Result<ExpectedV> {
    if scheme.id().family() != Family::K {
        return Err(Error::InvalidScheme(format!("E[V] is defined for type-K schemes, not {}", scheme.id())));
    }
    scheme.check_problem(a)?;
    let n = a.ncols();
    let g = g_or_identity(scheme.g(), n)?;
    let sampler = scheme.sampler(a)?;
    let mut ev = DenseMatrix::zeros(n, n);
    for _ in 0..samples.max(1) {
        let draw = sampler.draw(rng);
        let (y, z) = realize_y_z(scheme, &draw, a)?;
        let at_y = a.tr_mul(&y);
        let e = y.tr_mul(&(a * &z));
        ev += &at_y * pseudoinverse(&e) * at_y.transpose();
    }
    ev /= samples.max(1) as f64;
    let ev = symmetrize(&ev);
    let gh = g.sqrt();
    let (lambda_min, _) = extremal_eigs(&ev)?;
    let (lo, _) = extremal_eigs(&symmetrize(&(&gh * &ev * &gh)))?;
    Ok(ExpectedV {
        matrix: ev,
        samples: samples.max(1),
        lambda_min,
        positive_definite: lambda_min > POSITIVITY_TOL,
        rho: 1.0 - lo,
    })
}

/// Norm in which the iteration error is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorNorm {
    /// `‖e‖₂`
    Euclid,
    /// `‖e‖_{G⁻¹}` (type-K energy norm)
    Ginv,
    /// `‖e‖_{AᵀGA}` (type-C energy norm)
    Ghat,
    /// `‖e‖_A` for SPD `A`
    A,
}

/// The `n x n` matrix `W` with `‖e‖² = eᵀWe`.
pub fn norm_matrix(a: &DenseMatrix, scheme: &Scheme, norm: ErrorNorm) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    Ok(match norm {
        ErrorNorm::Euclid => DenseMatrix::identity(n, n),
        ErrorNorm::Ginv => match scheme.g() {
            Some(g) if scheme.id().family() == Family::K => g.inverse().into_inner(),
            _ => DenseMatrix::identity(n, n),
        },
        ErrorNorm::Ghat => match scheme.g() {
            Some(g) if scheme.id().family() == Family::C => {
                symmetrize(&a.tr_mul(&(g.as_matrix() * a)))
            }
            _ => {
                let _ = m;
                symmetrize(&a.tr_mul(a))
            }
        },
        ErrorNorm::A => {
            if m != n {
                return Err(Error::InvalidProblem("A-norm needs a square matrix".into()));
            }
            a.clone()
        }
    })
}

fn all_equal(xs: &[f64]) -> bool {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo <= 1e-12 * hi.abs()
}

/// The applicable theoretical rate for a scheme on `A` and the norm it is
/// stated in. `None` when no formula covers the configuration (uniform
/// sampling with unequal norms, the discrete block schemes).
pub fn theoretical_rate(a: &DenseMatrix, scheme: &Scheme) -> Result<Option<(Rate, ErrorNorm)>> {
    use SchemeId::*;
    let d = scheme.sketch().distribution;
    let row_norms: Vec<f64> = a.row_iter().map(|r| r.norm_squared()).collect();
    let col_norms: Vec<f64> = a.column_iter().map(|c| c.norm_squared()).collect();
    Ok(match scheme.id() {
        K1 if d == Distribution::NormProportional || (d == Distribution::Uniform && all_equal(&row_norms)) => {
            Some((rate_k1(a), ErrorNorm::Euclid))
        }
        C1 if d == Distribution::NormProportional || (d == Distribution::Uniform && all_equal(&col_norms)) => {
            Some((rate_k1(a), ErrorNorm::Ghat))
        }
        S1 if d == Distribution::TraceProportional
            || (d == Distribution::Uniform && a.is_square() && all_equal(&a.diagonal().as_slice().to_vec())) =>
        {
            Some((Rate::of(rate_s1(a)?), ErrorNorm::A))
        }
        K2 | K4 | K6 => Some((rate_projection_bound(a, scheme.g(), Family::K)?, ErrorNorm::Ginv)),
        C2 | C4 | C6 => Some((rate_projection_bound(a, scheme.g(), Family::C)?, ErrorNorm::Ghat)),
        S2 | S4 => Some((rate_projection_bound(a, None, Family::S)?, ErrorNorm::A)),
        _ => None,
    })
}

/// Empirical rate from `trials` independent runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub scheme: SchemeId,
    pub rho_theory: Option<f64>,
    /// Per-step geometric contraction of the mean squared error.
    pub rho_fit: Option<f64>,
    /// Same fit applied to `‖E[e^k]‖²` (norm of the mean error).
    pub rho_fit_norm_of_mean: Option<f64>,
    pub trials: usize,
    pub iterations: usize,
    /// Iterations actually used in the fit.
    pub fit_iterations: usize,
    pub norm_used: ErrorNorm,
    /// No usable error decay (e.g. started at the solution).
    pub degenerate: bool,
}

/// Neumaier-compensated accumulator, so per-iteration averages do not depend
/// on the order trials are folded in beyond roundoff of the final sum.
#[derive(Debug, Clone, Copy, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Geometric-mean contraction `(M_K/M_0)^{1/K}`, with `K` the last index
/// before the sequence falls to `100·ε·M_0`.
pub fn fit_contraction(mean_sq: &[f64]) -> (Option<f64>, usize) {
    let Some(&m0) = mean_sq.first() else {
        return (None, 0);
    };
    if !(m0 > 0.0) {
        return (None, 0);
    }
    let floor = 100.0 * f64::EPSILON * m0;
    let k = mean_sq
        .iter()
        .position(|&v| !(v > floor))
        .map(|p| p.saturating_sub(1))
        .unwrap_or(mean_sq.len() - 1);
    if k == 0 {
        return (None, 0);
    }
    let ratio = mean_sq[k] / m0;
    (Some(ratio.powf(1.0 / k as f64)), k)
}

/// Runs `trials` independent solves of `iterations` steps from `x⁰ = 0`
/// (trial `t` uses stream `t` of `seed`), averaging the squared error in
/// `norm` at every step, and fits the per-step contraction.
pub fn fit_empirical_rate(
    problem: &Problem,
    scheme: &Scheme,
    trials: usize,
    iterations: usize,
    norm: ErrorNorm,
    seed: u64,
) -> Result<RateReport> {
    let x_star = problem
        .x_star()
        .ok_or_else(|| Error::InvalidProblem("rate fitting needs a known solution".into()))?;
    if trials == 0 || iterations == 0 {
        return Err(Error::InvalidProblem("trials and iterations must be positive".into()));
    }
    let (a, b) = (problem.a(), problem.b());
    scheme.check_problem(a)?;
    let sampler = scheme.sampler(a)?;
    let w = norm_matrix(a, scheme, norm)?;
    let (m, n) = a.shape();

    let mut sq = vec![KahanSum::default(); iterations + 1];
    let mut mean_err = vec![DenseVector::zeros(n); iterations + 1];
    for t in 0..trials {
        let mut rng = RngState::with_stream(seed, t as u64);
        let mut x = DenseVector::zeros(n);
        let mut res = Residual::stale(m);
        for k in 0..=iterations {
            if k > 0 {
                let draw = sampler.draw(&mut rng);
                match scheme.step(a, b, &mut x, &mut res, &draw) {
                    Ok(()) => {}
                    Err(e) if e.is_degenerate_step() => {}
                    Err(e) => return Err(e),
                }
            }
            let e = &x - x_star;
            sq[k].add(e.dot(&(&w * &e)));
            mean_err[k] += &e;
        }
    }
    let mean_sq: Vec<f64> = sq.iter().map(|s| s.value() / trials as f64).collect();
    let norm_of_mean: Vec<f64> = mean_err
        .iter()
        .map(|e| {
            let e = e / trials as f64;
            e.dot(&(&w * &e))
        })
        .collect();
    let (rho_fit, fit_iterations) = fit_contraction(&mean_sq);
    let (rho_fit_norm_of_mean, _) = fit_contraction(&norm_of_mean);

    let rho_theory = theoretical_rate(a, scheme)?
        .filter(|(_, theory_norm)| *theory_norm == norm)
        .map(|(rate, _)| rate.rho);

    Ok(RateReport {
        scheme: scheme.id(),
        rho_theory,
        rho_fit,
        rho_fit_norm_of_mean,
        trials,
        iterations,
        fit_iterations,
        norm_used: norm,
        degenerate: rho_fit.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn k1_rate_closed_forms() {
        let r = rate_k1(&DenseMatrix::identity(4, 4));
        assert!((r.rho - 0.75).abs() < 1e-15 && !r.degenerate);
        let r = rate_k1(&dmatrix![1.0, 0.0; 0.0, 2.0]);
        assert!((r.rho - 0.8).abs() < 1e-15);
    }

    #[test]
    fn k1_rate_flags_rank_deficiency() {
        let r = rate_k1(&dmatrix![1.0, 1.0; 2.0, 2.0]);
        assert!(r.degenerate);
        assert_eq!(r.rho, 1.0);
        assert!(rate_k1(&DenseMatrix::from_element(1, 3, 1.0)).degenerate);
    }

    #[test]
    fn s1_rate_closed_forms() {
        assert!((rate_s1(&DenseMatrix::identity(5, 5)).unwrap() - 0.8).abs() < 1e-15);
        assert!((rate_s1(&dmatrix![1.0, 0.0; 0.0, 3.0]).unwrap() - 0.75).abs() < 1e-15);
        assert!(rate_s1(&dmatrix![1.0, 0.0; 0.0, -3.0]).is_err());
    }

    #[test]
    fn projection_bound_identity_and_gram_weight() {
        let r = rate_projection_bound(&DenseMatrix::identity(6, 6), None, Family::S).unwrap();
        assert!((r.rho - (1.0 - 1.0 / 6.0)).abs() < 1e-14);

        // G⁻¹ = AᵀA makes G^½AᵀAG^½ = I, so κ = 1 and ρ = 1 − 1/m.
        let mut rng = RngState::new(5);
        let a = rng.gaussian_matrix(7, 3);
        let g = SpdMatrix::new(a.tr_mul(&a)).unwrap().inverse();
        let r = rate_projection_bound(&a, Some(&g), Family::K).unwrap();
        assert!((r.rho - (1.0 - 1.0 / 7.0)).abs() < 1e-10, "{}", r.rho);
    }

    #[test]
    fn projection_bound_flags_rank_deficiency() {
        let a = dmatrix![1.0, 2.0; 2.0, 4.0; 3.0, 6.0];
        assert!(rate_projection_bound(&a, None, Family::C).unwrap().degenerate);
    }

    #[test]
    fn contraction_fit_on_exact_geometric_sequence() {
        let seq: Vec<f64> = (0..50).map(|k| 0.9f64.powi(k)).collect();
        let (rho, k) = fit_contraction(&seq);
        assert_eq!(k, 49);
        assert!((rho.unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn contraction_fit_stops_at_roundoff_floor() {
        let mut seq: Vec<f64> = (0..10).map(|k| 0.1f64.powi(k)).collect();
        seq.extend([0.0; 5]);
        let (rho, k) = fit_contraction(&seq);
        // 1e-13 is the last value above 100ε ≈ 2.2e-14.
        assert_eq!(k, 9);
        assert!((rho.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(fit_contraction(&[0.0, 0.0]), (None, 0));
    }

    #[test]
    fn w_family_with_bad_probabilities_is_an_error() {
        let a = DenseMatrix::identity(2, 2);
        let e0 = dmatrix![1.0; 0.0];
        assert!(estimate_expectation_w(&a, None, &[(e0, 0.5)]).is_err());
    }

    #[test]
    fn kahan_sum_recovers_small_terms() {
        let mut s = KahanSum::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 10.0);
    }
}
