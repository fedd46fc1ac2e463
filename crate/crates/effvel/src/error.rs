//! Run failures and their exit codes.

use effvel_core::{AbortKind, Error};
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver aborted: {0}")]
    Solver(Error),
    #[error("oracle failed: {0}")]
    Oracle(Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverAbort { .. } | Error::SingularSystem | Error::NonFinite { .. } => RunError::Solver(e),
            Error::PicardNonConvergence { .. } => RunError::Oracle(e),
            other => RunError::Config(other.to_string()),
        }
    }
}

impl RunError {
    /// 2 configuration, 3 solver abort, 4 oracle non-convergence, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Oracle(_) => 4,
            RunError::Io(_) => 1,
        }
    }

    /// Machine-readable report written as `error.json`.
    pub fn report(&self) -> Value {
        let message = self.to_string();
        match self {
            RunError::Config(_) => json!({ "error": "config", "message": message }),
            RunError::Io(_) => json!({ "error": "io", "message": message }),
            RunError::Solver(Error::SolverAbort { t, node, kind }) => json!({
                "error": "solver_abort",
                "t": t,
                "node": node,
                "reason": kind,
                "message": message,
            }),
            RunError::Solver(e) => json!({
                "error": "solver_abort",
                "reason": AbortKind::NotFinite,
                "detail": e.to_string(),
                "message": message,
            }),
            RunError::Oracle(Error::PicardNonConvergence { iterations, change }) => json!({
                "error": "picard_non_convergence",
                "iterations": iterations,
                "change": if change.is_finite() { json!(change) } else { json!(null) },
                "message": message,
            }),
            RunError::Oracle(e) => json!({ "error": "oracle", "message": e.to_string() }),
        }
    }
}
