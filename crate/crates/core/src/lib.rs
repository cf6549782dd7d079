//! Randomized sketch-and-project solvers for `Ax = b`.
//!
//! One iteration projects the current iterate onto the solution set of a
//! randomly sketched subsystem `YᵀAx = Yᵀb`:
//!
//! ```text
//! x ← x + Z (YᵀAZ)† Yᵀ (b − Ax)
//! ```
//!
//! Sixteen schemes ([`SchemeId`]) cover row action (type K, `Z = GAᵀY`),
//! column action (type C, `Y = GAZ`), and symmetric action on SPD systems
//! (type S, `Y = Z`), each with coordinate, subset, and Gaussian sketches.
//!
//! ```
//! use randsolve::{solve, Problem, RngState, Scheme, SchemeId, StopRule};
//! use nalgebra::{DMatrix, DVector};
//!
//! let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
//! let problem = Problem::from_solution(a, DVector::from_element(2, 1.0)).unwrap();
//! let scheme = Scheme::new(SchemeId::K1).unwrap();
//! let (x, trace) = solve(&problem, &scheme, &StopRule::default(), None, &mut RngState::new(1), 10).unwrap();
//! assert!(trace.last().rel_residual < 1e-6);
//! assert!((x[0] - 1.0).abs() < 1e-5);
//! ```

pub mod error;
pub mod linalg;
pub mod problems;
pub mod schemes;
pub mod sketch;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector, SpdMatrix};
pub use problems::{generate, load_matrixmarket, GeneratedProblem, ProblemKind, ProblemSpec, ProblemStats};
pub use schemes::{Family, Scheme, SchemeId};
pub use sketch::{Distribution, RngState, SketchDraw, SketchKind, SketchSpec};
pub use solver::{solve, solve_observed, Problem, SolveStatus, SolveTrace, StopRule, TracePoint};
