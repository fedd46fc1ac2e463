//! Sampled solution histories.

use alloc::vec::Vec;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::AugmentedState;

/// Scalars recorded after every time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    /// Time reached by the step.
    pub t: f64,
    pub dt: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    /// `||v||_inf` after the step.
    pub v_sup: f64,
    /// `||u||_inf` of the velocity that drove the step.
    pub u_sup: f64,
}

/// Ordered samples of the state plus per-step records.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<AugmentedState>,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn new(samples: Vec<AugmentedState>) -> Self {
        Trajectory {
            samples,
            steps: Vec::new(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> Option<&AugmentedState> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&AugmentedState> {
        self.samples.last()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.samples.first().map(|s| s.grid())
    }

    /// Non-empty, strictly increasing in time, one grid throughout.
    pub fn validate(&self) -> Result<()> {
        let first = self.samples.first().ok_or(Error::BadTrajectory)?;
        for w in self.samples.windows(2) {
            if !(w[1].t > w[0].t) || w[1].grid() != first.grid() {
                return Err(Error::BadTrajectory);
            }
        }
        Ok(())
    }

    /// Samples with `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> Trajectory {
        Trajectory {
            samples: self.samples.iter().filter(|s| s.t <= t_max).cloned().collect(),
            steps: self.steps.iter().filter(|s| s.t <= t_max).copied().collect(),
        }
    }
}
