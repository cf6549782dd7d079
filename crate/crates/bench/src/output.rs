//! CSV traces and JSON reports.

use std::fs;
use std::path::Path;

use randsolve::SolveTrace;
use serde::Serialize;

use crate::HarnessError;

pub const TRACE_HEADER: [&str; 4] = ["iter", "res", "err", "time_s"];

/// Shortest round-trip form, so reruns compare byte for byte.
fn fmt(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_trace_csv(path: &Path, trace: &SolveTrace) -> Result<(), HarnessError> {
    let err = |e: csv::Error| HarnessError::output(path, e);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(err)?;
    w.write_record(TRACE_HEADER).map_err(err)?;
    for p in &trace.points {
        let e = p.rel_error.map(fmt).unwrap_or_default();
        w.write_record([p.iter.to_string(), fmt(p.rel_residual), e, fmt(p.elapsed_seconds)])
            .map_err(err)?;
    }
    w.flush().map_err(|e| HarnessError::output(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::output(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::output(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::output(dir, e))
}

/// `None` for NaN and infinities so every emitted number is finite.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use randsolve::{SolveStatus, TracePoint};

    #[test]
    fn csv_schema_and_empty_error_column() {
        let trace = SolveTrace {
            points: vec![
                TracePoint { iter: 0, rel_residual: 1.0, rel_error: None, elapsed_seconds: 0.0, skips: 0 },
                TracePoint { iter: 10, rel_residual: 2.5e-7, rel_error: Some(0.5), elapsed_seconds: 0.125, skips: 0 },
            ],
            status: SolveStatus::Converged,
            iterations: 10,
            skip_count: 0,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace_csv(&path, &trace).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "iter,res,err,time_s\n0,1e0,,0e0\n10,2.5e-7,5e-1,1.25e-1\n");
    }

    #[test]
    fn finite_filter() {
        assert_eq!(finite(1.0), Some(1.0));
        assert_eq!(finite(f64::NAN), None);
        assert_eq!(finite(f64::INFINITY), None);
    }
}
