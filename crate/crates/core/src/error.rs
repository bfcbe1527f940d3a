use std::path::PathBuf;

use thiserror::Error;

use crate::domain::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A ledger that breaks the EV parking contract (idle time, prefix or cap rule).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("model build error: {0}")]
    Build(String),

    #[error("scenario is invalid ({} violation(s)): {}", .0.len(), summarize_violations(.0))]
    Validation(Vec<Violation>),

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical breakdown in simplex: {message} (last pivots: {history})")]
    Numerical { message: String, history: String },

    #[error("search limit reached without a feasible incumbent after {nodes} node(s)")]
    Limit { nodes: usize },

    #[error("LP relaxation is {0}")]
    NotOptimal(&'static str),

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("reported cost {reported} disagrees with solver objective {solver}")]
    CostMismatch { reported: f64, solver: f64 },
}

fn summarize_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.key())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
