use alloc::string::String;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// What stopped a time integration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortKind {
    DensityFloor { value: f64, floor: f64 },
    NotFinite,
    StepLimit { steps: usize },
}

impl core::fmt::Display for AbortKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AbortKind::DensityFloor { value, floor } => {
                write!(f, "density {value:e} fell below the floor {floor:e}")
            }
            AbortKind::NotFinite => f.write_str("non-finite value"),
            AbortKind::StepLimit { steps } => write!(f, "step limit of {steps} reached"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("operator requires a {expected} grid")]
    GridMismatch { expected: &'static str },
    #[error("field has {got} values but the grid has {expected} nodes")]
    FieldLength { expected: usize, got: usize },
    #[error("non-finite field value at node {node}")]
    NonFinite { node: usize },
    #[error("radial vector component does not vanish on the axis (value {value:e})")]
    AxisValue { value: f64 },
    #[error("density {value:e} at node {node} is below the floor {floor:e}")]
    DensityFloor { node: usize, value: f64, floor: f64 },
    #[error("invalid pressure law: {0}")]
    InvalidLaw(&'static str),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("singular linear system")]
    SingularSystem,
    #[error("empty time ladder")]
    EmptyLadder,
    #[error("trajectory is empty or its sample times are not increasing")]
    BadTrajectory,
    #[error("unsupported caloric proxy order {0}")]
    UnsupportedOrder(i32),
    #[error("solver aborted at t = {t} (node {node}): {kind}")]
    SolverAbort { t: f64, node: usize, kind: AbortKind },
    #[error("Picard iteration did not converge after {iterations} iterations (last change {change:e})")]
    PicardNonConvergence { iterations: usize, change: f64 },
}
