//! Experiment harness for `randsolve`: convergence traces, empirical rate
//! checks, expectation-bound checks and problem export, all driven by a
//! JSON [`config::BenchConfig`].

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::BenchConfig;
pub use run::{gen_problem, run_bench, run_rates, verify_expectation, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SCHEME_FAILED: i32 = 2;
pub const EXIT_BOUND_VIOLATED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }

    pub(crate) fn output(path: impl Into<PathBuf>, e: impl std::fmt::Display) -> Self {
        HarnessError::Output {
            path: path.into(),
            message: e.to_string(),
        }
    }
}
