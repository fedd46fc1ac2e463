//! Config-driven experiment runner: builds initial data, runs the solvers
//! and oracles, evaluates norms and diagnostics, and writes CSV/JSON.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{Diagnostic, ExperimentConfig};
pub use error::RunError;
pub use output::RunManifest;
