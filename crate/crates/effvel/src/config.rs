//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use effvel_core::caloric::{CaloricConfig, PicardConfig};
use effvel_core::{Grid, InitialDataSpec, PressureLaw, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

/// Post-processing passes a run can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Energy,
    BdEntropy,
    Lipschitz,
    SupNorms,
    KochTataru,
    BmoInv,
    Growth,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 7] = [
        Diagnostic::Energy,
        Diagnostic::BdEntropy,
        Diagnostic::Lipschitz,
        Diagnostic::SupNorms,
        Diagnostic::KochTataru,
        Diagnostic::BmoInv,
        Diagnostic::Growth,
    ];
}

fn all_diagnostics() -> Vec<Diagnostic> {
    Diagnostic::ALL.to_vec()
}

fn default_growth_constant() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub grid: Grid,
    pub initial: InitialDataSpec,
    pub law: PressureLaw,
    pub mu: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "all_diagnostics")]
    pub diagnostics: Vec<Diagnostic>,
    /// Output directory; falls back to `$EFFVEL_OUT/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub caloric: CaloricConfig,
    /// Calibration constant of the growth-bound checks.
    #[serde(default = "default_growth_constant")]
    pub growth_constant: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked without running the solver.
    pub fn validate(&self) -> Result<(), RunError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(RunError::Config("name must be a non-empty file name".into()));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(RunError::Config(format!("mu must be positive, got {}", self.mu)));
        }
        if self.growth_constant.is_nan() || self.growth_constant <= 0.0 {
            return Err(RunError::Config("growth_constant must be positive".into()));
        }
        self.solver.validate()?;
        self.caloric.validate()?;
        if self.solver.scheme == effvel_core::Scheme::Classical1d && self.grid.is_radial() {
            return Err(RunError::Config("the classical scheme runs on line grids only".into()));
        }
        self.initial.build(self.grid, self.mu)?;
        Ok(())
    }

    pub fn wants(&self, d: Diagnostic) -> bool {
        self.diagnostics.contains(&d)
    }

    /// The same experiment on a grid refined `factor` times.
    pub fn refined(&self, factor: usize) -> Result<Self, RunError> {
        Ok(ExperimentConfig {
            grid: self.grid.refined(factor)?,
            ..self.clone()
        })
    }

    /// `--out`, then the config's own directory, then `<root>/<name>`.
    pub fn output_dir(&self, cli: Option<&Path>, root: Option<&Path>) -> PathBuf {
        if let Some(dir) = cli {
            return dir.to_path_buf();
        }
        if let Some(dir) = &self.output {
            return dir.clone();
        }
        root.unwrap_or_else(|| Path::new("out")).join(&self.name)
    }
}
