//! Iteration driver: runs a scheme on a problem until the relative residual
//! drops below `tol` or `itmax` steps have been taken.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::schemes::{Residual, Scheme};
use crate::sketch::RngState;

/// Tolerance for the consistency check `‖Ax* − b‖ ≤ CONSISTENCY_TOL·‖b‖`.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Problem {
    a: DenseMatrix,
    b: DenseVector,
    x_star: Option<DenseVector>,
}

impl Problem {
    /// With `x_star` present the system must be consistent with it.
    pub fn new(a: DenseMatrix, b: DenseVector, x_star: Option<DenseVector>) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidProblem("matrix must be at least 1x1".into()));
        }
        if b.len() != m {
            return Err(Error::dims("Problem::new", format!("b of length {m}"), format!("{}", b.len())));
        }
        if let Some(xs) = &x_star {
            if xs.len() != n {
                return Err(Error::dims("Problem::new", format!("x* of length {n}"), format!("{}", xs.len())));
            }
            let gap = (&a * xs - &b).norm();
            if gap > CONSISTENCY_TOL * b.norm() {
                return Err(Error::InvalidProblem(format!(
                    "x* does not solve the system (‖Ax* − b‖ = {gap:.3e})"
                )));
            }
        }
        Ok(Self { a, b, x_star })
    }

    /// Problem with a known solution; `b` is formed as `A x*`.
    pub fn from_solution(a: DenseMatrix, x_star: DenseVector) -> Result<Self> {
        if x_star.len() != a.ncols() {
            return Err(Error::dims(
                "Problem::from_solution",
                format!("x* of length {}", a.ncols()),
                format!("{}", x_star.len()),
            ));
        }
        let b = &a * &x_star;
        Self::new(a, b, Some(x_star))
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseVector {
        &self.b
    }

    pub fn x_star(&self) -> Option<&DenseVector> {
        self.x_star.as_ref()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.a.shape()
    }

    pub fn relative_residual(&self, x: &DenseVector) -> f64 {
        let mut r = self.b.clone();
        r.gemv(-1.0, &self.a, x, 1.0);
        r.norm() / nonzero(self.b.norm())
    }

    pub fn relative_error(&self, x: &DenseVector) -> Option<f64> {
        self.x_star
            .as_ref()
            .map(|xs| (x - xs).norm() / nonzero(xs.norm()))
    }
}

fn nonzero(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopRule {
    pub itmax: usize,
    /// Stop once `‖b − Ax‖ < tol·‖b‖`.
    pub tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            itmax: 100_000,
            tol: 1e-6,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.itmax == 0 {
            return Err(Error::InvalidProblem("itmax must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidProblem(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub rel_residual: f64,
    pub rel_error: Option<f64>,
    pub elapsed_seconds: f64,
    /// Degenerate steps skipped up to and including `iter`.
    pub skips: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveTrace {
    pub points: Vec<TracePoint>,
    pub status: SolveStatus,
    /// Number of steps taken (skipped steps included).
    pub iterations: usize,
    pub skip_count: usize,
}

impl SolveTrace {
    pub fn last(&self) -> &TracePoint {
        self.points.last().expect("a trace always holds the initial point")
    }
}

/// 10 for single-vector schemes, 1 for block schemes.
pub fn default_trace_every(scheme: &Scheme) -> usize {
    if scheme.id().is_block() {
        1
    } else {
        10
    }
}

/// Runs `scheme` from `x0` (zero when `None`). The residual is recomputed
/// from scratch every `trace_every` steps, where it is also recorded and
/// tested against the stop rule; the final iterate is always recorded.
pub fn solve(
    problem: &Problem,
    scheme: &Scheme,
    stop: &StopRule,
    x0: Option<&DenseVector>,
    rng: &mut RngState,
    trace_every: usize,
) -> Result<(DenseVector, SolveTrace)> {
    solve_observed(problem, scheme, stop, x0, rng, trace_every, |_, _| {})
}

/// [`solve`] with a callback invoked with `(k, x^k)` at every trace point.
pub fn solve_observed<F>(
    problem: &Problem,
    scheme: &Scheme,
    stop: &StopRule,
    x0: Option<&DenseVector>,
    rng: &mut RngState,
    trace_every: usize,
    mut observe: F,
) -> Result<(DenseVector, SolveTrace)>
where
    F: FnMut(usize, &DenseVector),
{
    let (a, b) = (problem.a(), problem.b());
    let (m, n) = a.shape();
    stop.validate()?;
    if trace_every == 0 {
        return Err(Error::InvalidProblem("trace_every must be at least 1".into()));
    }
    scheme.check_problem(a)?;
    let sampler = scheme.sampler(a)?;
    let mut x = match x0 {
        Some(x0) if x0.len() != n => {
            return Err(Error::dims("solve", format!("x0 of length {n}"), format!("{}", x0.len())))
        }
        Some(x0) => x0.clone(),
        None => DenseVector::zeros(n),
    };

    let b_norm = nonzero(b.norm());
    let start = Instant::now();
    let mut res = Residual::stale(m);
    let mut points = Vec::new();
    let mut skips = 0;

    let mut record = |k: usize, x: &DenseVector, res: &mut Residual, skips: usize| -> f64 {
        let rel_residual = res_norm(res, a, b, x) / b_norm;
        points.push(TracePoint {
            iter: k,
            rel_residual,
            rel_error: problem.relative_error(x),
            elapsed_seconds: start.elapsed().as_secs_f64(),
            skips,
        });
        rel_residual
    };

    observe(0, &x);
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    if record(0, &x, &mut res, 0) < stop.tol {
        status = SolveStatus::Converged;
    } else {
        for k in 1..=stop.itmax {
            let draw = sampler.draw(rng);
            match scheme.step(a, b, &mut x, &mut res, &draw) {
                Ok(()) => {}
                Err(e) if e.is_degenerate_step() => skips += 1,
                Err(e) => return Err(e),
            }
            iterations = k;
            if k % trace_every == 0 || k == stop.itmax {
                observe(k, &x);
                if record(k, &x, &mut res, skips) < stop.tol {
                    status = SolveStatus::Converged;
                    break;
                }
            }
        }
    }

    Ok((
        x,
        SolveTrace {
            points,
            status,
            iterations,
            skip_count: skips,
        },
    ))
}

fn res_norm(res: &mut Residual, a: &DenseMatrix, b: &DenseVector, x: &DenseVector) -> f64 {
    res.refresh(a, b, x);
    res.norm()
}

/// `‖Aᵀ(Ax − b)‖ / ‖Aᵀb‖`, zero exactly at a least-squares solution.
pub fn normal_equation_residual(a: &DenseMatrix, b: &DenseVector, x: &DenseVector) -> f64 {
    let r = a * x - b;
    a.tr_mul(&r).norm() / nonzero(a.tr_mul(b).norm())
}

#[derive(Debug, Clone)]
pub struct LsCheck {
    pub x: DenseVector,
    pub trace: SolveTrace,
    pub normal_eq_residual: f64,
}

/// [`solve`] on a possibly inconsistent system, additionally reporting how
/// far the final iterate is from satisfying the normal equations.
pub fn solve_ls_check(
    problem: &Problem,
    scheme: &Scheme,
    stop: &StopRule,
    x0: Option<&DenseVector>,
    rng: &mut RngState,
    trace_every: usize,
) -> Result<LsCheck> {
    let (x, trace) = solve(problem, scheme, stop, x0, rng, trace_every)?;
    let normal_eq_residual = normal_equation_residual(problem.a(), problem.b(), &x);
    Ok(LsCheck {
        x,
        trace,
        normal_eq_residual,
    })
}
