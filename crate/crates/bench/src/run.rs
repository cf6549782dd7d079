//! The four subcommands. Each writes its files under `output_dir` and
//! returns the process exit code alongside the in-memory report.

use std::path::PathBuf;
use std::time::Instant;

use randsolve::problems::{write_matrixmarket, MmFormat};
use randsolve::solver::default_trace_every;
use randsolve::theory::{estimate_expectation_t, fit_empirical_rate, theoretical_rate, ErrorNorm, RateReport};
use randsolve::{
    generate, DenseMatrix, GeneratedProblem, ProblemSpec, ProblemStats, RngState, Scheme, SchemeId,
    SolveStatus,
};
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, SCHEMA_VERSION};
use crate::output::{ensure_dir, finite, write_json, write_trace_csv};
use crate::{HarnessError, EXIT_BOUND_VIOLATED, EXIT_OK, EXIT_SCHEME_FAILED};

/// A finished command: exit code, report, and the files written.
#[derive(Debug, Clone)]
pub struct Outcome<R> {
    pub exit_code: i32,
    pub report: R,
    pub files: Vec<PathBuf>,
}

/// RNG stream for a `(scheme, trial)` cell: depends only on the scheme id
/// and trial index, so reordering or adding schemes leaves other cells
/// untouched.
pub fn cell_stream(id: SchemeId, trial: usize) -> u64 {
    let index = SchemeId::ALL.iter().position(|&s| s == id).expect("listed") as u64;
    (index << 32) | trial as u64
}

struct Prepared {
    generated: GeneratedProblem,
    schemes: Vec<(String, Scheme)>,
}

fn prepare(config: &BenchConfig) -> Result<Prepared, HarnessError> {
    config.validate()?;
    let generated = generate(&config.problem).map_err(|e| HarnessError::Config(format!("problem: {e}")))?;
    let schemes = config.build_schemes(generated.problem.a())?;
    for (label, scheme) in &schemes {
        if scheme.id().family() == randsolve::Family::S {
            scheme
                .check_problem(generated.problem.a())
                .map_err(|e| HarnessError::Config(format!("{label}: {e}")))?;
        }
    }
    ensure_dir(&config.output_dir)?;
    Ok(Prepared { generated, schemes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellStatus {
    Converged,
    MaxIters,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scheme: SchemeId,
    pub label: String,
    pub trial: usize,
    pub status: CellStatus,
    pub iters: Option<usize>,
    pub final_res: Option<f64>,
    pub final_err: Option<f64>,
    pub skip_count: usize,
    pub wall_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub config_echo: BenchConfig,
    pub per_scheme: Vec<CellSummary>,
    pub problem_stats: ProblemStats,
}

pub fn run_bench(config: &BenchConfig) -> Result<Outcome<BenchSummary>, HarnessError> {
    let Prepared { generated, schemes } = prepare(config)?;
    let problem = &generated.problem;
    let mut cells = Vec::new();
    let mut files = Vec::new();
    for (label, scheme) in &schemes {
        let every = config.trace_every.unwrap_or_else(|| default_trace_every(scheme));
        for trial in 0..config.trials {
            let mut rng = RngState::with_stream(config.seed, cell_stream(scheme.id(), trial));
            let start = Instant::now();
            let result = randsolve::solve(problem, scheme, &config.stop, None, &mut rng, every);
            let wall_s = start.elapsed().as_secs_f64();
            let cell = match result {
                Ok((_, trace)) => {
                    let name = format!("{label}_trial{trial}.csv");
                    let path = config.output_dir.join(&name);
                    write_trace_csv(&path, &trace)?;
                    files.push(path);
                    let last = trace.last();
                    CellSummary {
                        scheme: scheme.id(),
                        label: label.clone(),
                        trial,
                        status: match trace.status {
                            SolveStatus::Converged => CellStatus::Converged,
                            SolveStatus::MaxIters => CellStatus::MaxIters,
                        },
                        iters: Some(trace.iterations),
                        final_res: finite(last.rel_residual),
                        final_err: last.rel_error.and_then(finite),
                        skip_count: trace.skip_count,
                        wall_s,
                        csv: Some(name),
                        error: None,
                    }
                }
                Err(e) => CellSummary {
                    scheme: scheme.id(),
                    label: label.clone(),
                    trial,
                    status: CellStatus::Failed,
                    iters: None,
                    final_res: None,
                    final_err: None,
                    skip_count: 0,
                    wall_s,
                    csv: None,
                    error: Some(e.to_string()),
                },
            };
            cells.push(cell);
        }
    }
    let failed = cells.iter().any(|c| c.status == CellStatus::Failed);
    let summary = BenchSummary {
        schema_version: SCHEMA_VERSION,
        config_echo: config.clone(),
        per_scheme: cells,
        problem_stats: generated.stats,
    };
    let path = config.output_dir.join("summary.json");
    write_json(&path, &summary)?;
    files.push(path);
    Ok(Outcome {
        exit_code: if failed { EXIT_SCHEME_FAILED } else { EXIT_OK },
        report: summary,
        files,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateEntry {
    pub label: String,
    pub scheme: SchemeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RateReport>,
    /// `rho_theory + tolerance` when a formula applies.
    pub limit: Option<f64>,
    pub violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatesSummary {
    pub schema_version: u32,
    pub config_echo: BenchConfig,
    pub reports: Vec<RateEntry>,
    pub problem_stats: ProblemStats,
}

fn rate_entry(config: &BenchConfig, problem: &randsolve::Problem, label: &str, scheme: &Scheme) -> RateEntry {
    let attempt = || -> randsolve::Result<RateReport> {
        let norm = theoretical_rate(problem.a(), scheme)?
            .map(|(_, norm)| norm)
            .unwrap_or(ErrorNorm::Euclid);
        fit_empirical_rate(problem, scheme, config.trials, config.rates.iterations, norm, config.seed)
    };
    match attempt() {
        Ok(report) => {
            let limit = report.rho_theory.map(|r| r + config.rates.tolerance);
            let violated = match (report.rho_fit, limit) {
                (Some(fit), Some(limit)) => fit > limit,
                _ => false,
            };
            RateEntry {
                label: label.to_string(),
                scheme: scheme.id(),
                report: Some(report),
                limit,
                violated,
                error: None,
            }
        }
        Err(e) => RateEntry {
            label: label.to_string(),
            scheme: scheme.id(),
            report: None,
            limit: None,
            violated: false,
            error: Some(e.to_string()),
        },
    }
}

pub fn run_rates(config: &BenchConfig) -> Result<Outcome<RatesSummary>, HarnessError> {
    let Prepared { generated, schemes } = prepare(config)?;
    let reports: Vec<RateEntry> = schemes
        .iter()
        .map(|(label, scheme)| rate_entry(config, &generated.problem, label, scheme))
        .collect();
    let exit_code = if reports.iter().any(|r| r.violated) {
        EXIT_BOUND_VIOLATED
    } else if reports.iter().any(|r| r.error.is_some()) {
        EXIT_SCHEME_FAILED
    } else {
        EXIT_OK
    };
    let summary = RatesSummary {
        schema_version: SCHEMA_VERSION,
        config_echo: config.clone(),
        reports,
        problem_stats: generated.stats,
    };
    let path = config.output_dir.join("rates.json");
    write_json(&path, &summary)?;
    Ok(Outcome {
        exit_code,
        report: summary,
        files: vec![path],
    })
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectationEntry {
    pub label: String,
    pub scheme: SchemeId,
    pub samples: usize,
    pub bootstrap: usize,
    pub max_violation: Option<f64>,
    pub std_error: Option<f64>,
    pub bound_holds: bool,
    /// Row-major `E[T̂]` estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<Vec<f64>>>,
    /// Row-major bound matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectationSummary {
    pub schema_version: u32,
    pub config_echo: BenchConfig,
    pub entries: Vec<ExpectationEntry>,
    pub problem_stats: ProblemStats,
}

pub fn verify_expectation(config: &BenchConfig) -> Result<Outcome<ExpectationSummary>, HarnessError> {
    let Prepared { generated, schemes } = prepare(config)?;
    let a = generated.problem.a();
    let s = &config.expectation;
    let entries: Vec<ExpectationEntry> = schemes
        .iter()
        .map(|(label, scheme)| {
            let mut rng = RngState::with_stream(config.seed, cell_stream(scheme.id(), 0));
            match estimate_expectation_t(a, scheme, s.samples, s.bootstrap, &mut rng) {
                Ok(est) => ExpectationEntry {
                    label: label.clone(),
                    scheme: scheme.id(),
                    samples: est.samples,
                    bootstrap: est.bootstrap_replicates,
                    max_violation: finite(est.max_violation),
                    std_error: finite(est.std_error),
                    bound_holds: est.bound_holds(),
                    mean: Some(rows(&est.matrix)),
                    bound: Some(rows(&est.bound_matrix)),
                    error: None,
                },
                Err(e) => ExpectationEntry {
                    label: label.clone(),
                    scheme: scheme.id(),
                    samples: s.samples,
                    bootstrap: s.bootstrap,
                    max_violation: None,
                    std_error: None,
                    bound_holds: false,
                    mean: None,
                    bound: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let exit_code = if entries.iter().any(|e| e.error.is_some()) {
        EXIT_SCHEME_FAILED
    } else if entries.iter().any(|e| !e.bound_holds) {
        EXIT_BOUND_VIOLATED
    } else {
        EXIT_OK
    };
    let summary = ExpectationSummary {
        schema_version: SCHEMA_VERSION,
        config_echo: config.clone(),
        entries,
        problem_stats: generated.stats,
    };
    let path = config.output_dir.join("expectation.json");
    write_json(&path, &summary)?;
    Ok(Outcome {
        exit_code,
        report: summary,
        files: vec![path],
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemReport {
    pub schema_version: u32,
    pub spec: ProblemSpec,
    pub stats: ProblemStats,
    pub matrix_file: String,
    pub rhs_file: String,
}

/// Writes `A.mtx`, `b.mtx` (array format) and `problem.json`. Only the
/// `problem` section of the config is used.
pub fn gen_problem(config: &BenchConfig) -> Result<Outcome<ProblemReport>, HarnessError> {
    config
        .problem
        .validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let generated = generate(&config.problem).map_err(|e| HarnessError::Config(format!("problem: {e}")))?;
    ensure_dir(&config.output_dir)?;
    let a_path = config.output_dir.join("A.mtx");
    let b_path = config.output_dir.join("b.mtx");
    let io = |p: &PathBuf, e: randsolve::Error| HarnessError::output(p, e);
    write_matrixmarket(&a_path, generated.problem.a(), MmFormat::Array).map_err(|e| io(&a_path, e))?;
    let b = generated.problem.b();
    let b_mat = DenseMatrix::from_column_slice(b.len(), 1, b.as_slice());
    write_matrixmarket(&b_path, &b_mat, MmFormat::Array).map_err(|e| io(&b_path, e))?;
    let report = ProblemReport {
        schema_version: SCHEMA_VERSION,
        spec: config.problem.clone(),
        stats: generated.stats,
        matrix_file: "A.mtx".into(),
        rhs_file: "b.mtx".into(),
    };
    let json_path = config.output_dir.join("problem.json");
    write_json(&json_path, &report)?;
    Ok(Outcome {
        exit_code: EXIT_OK,
        report,
        files: vec![a_path, b_path, json_path],
    })
}
