use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure of an iterative linear solve; carries the best iterate seen.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolveFailure {
    pub iterations: usize,
    pub relative_residual: f64,
    pub best: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    GridTooSmall { axis: usize, nodes: usize },
    BadSpacing { axis: usize, spacing: f64 },
    FieldLength { expected: usize, found: usize },
    NotPositiveDefinite { node: [usize; 3] },
    SingularOperator,
    InvalidSolverConfig(&'static str),
    LinearSolve(LinearSolveFailure),
    PicardStalled { delta: f64, iterations: usize, updates: Vec<f64> },
    LevelOutOfRange { level: f64, min: f64, max: f64 },
    MissingSurface { level: f64 },
    Precondition { check: String, measured: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridTooSmall { axis, nodes } => {
                write!(f, "axis {axis} has {nodes} nodes, at least 5 are required")
            }
            Error::BadSpacing { axis, spacing } => {
                write!(f, "axis {axis} has non-positive spacing {spacing}")
            }
            Error::FieldLength { expected, found } => {
                write!(f, "field has {found} values, grid needs {expected}")
            }
            Error::NotPositiveDefinite { node } => write!(
                f,
                "metric is not positive definite at node ({}, {}, {})",
                node[0], node[1], node[2]
            ),
            Error::SingularOperator => {
                f.write_str("no Dirichlet face and no pinned node: the operator is singular")
            }
            Error::InvalidSolverConfig(msg) => write!(f, "invalid solver config: {msg}"),
            Error::LinearSolve(fail) => write!(
                f,
                "linear solve stopped after {} iterations at relative residual {:e}",
                fail.iterations, fail.relative_residual
            ),
            Error::PicardStalled { delta, iterations, updates } => write!(
                f,
                "Picard iteration did not converge at delta = {delta:e} after {iterations} iterations (last update {:e})",
                updates.last().copied().unwrap_or(f64::NAN)
            ),
            Error::LevelOutOfRange { level, min, max } => {
                write!(f, "level {level} is outside the open range ({min}, {max})")
            }
            Error::MissingSurface { level } => write!(f, "no surface supplied for level {level}"),
            Error::Precondition { check, measured } => {
                write!(f, "precondition of {check} violated (measured {measured:e})")
            }
        }
    }
}
