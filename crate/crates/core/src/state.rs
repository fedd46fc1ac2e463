//! The augmented unknowns `(rho, m, v)` and the identities tying them to `u`.
//!
//! `v = u + 2 mu grad ln rho` and `m = rho v - 2 mu grad rho = rho u`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Grid, Parity, ScalarField};
use crate::ops::gradient;

/// Default lower bound on the density below which `u = m / rho` is refused.
pub const DENSITY_FLOOR: f64 = 1e-8;

/// Time-stamped augmented state. `u` is always derived, never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub t: f64,
    pub rho: ScalarField,
    pub m: ScalarField,
    pub v: ScalarField,
    pub mu: f64,
}

impl AugmentedState {
    /// Builds the state from `(rho, v)`, deriving `m`.
    pub fn from_density_velocity(t: f64, rho: ScalarField, v: ScalarField, mu: f64) -> Result<Self> {
        let m = momentum_from(&rho, &v, mu)?;
        Ok(AugmentedState { t, rho, m, v, mu })
    }

    /// Builds the state from the physical velocity `u`.
    pub fn from_density_physical(t: f64, rho: ScalarField, u: &ScalarField, mu: f64) -> Result<Self> {
        let v = effective_velocity(&rho, u, mu)?;
        Self::from_density_velocity(t, rho, v, mu)
    }

    /// Uniform far state `(rho, v) = (1, 0)`.
    pub fn rest(grid: Grid, mu: f64) -> Self {
        let rho = ScalarField::constant(grid, crate::grid::FAR_DENSITY);
        let zero = odd_zero(grid);
        AugmentedState {
            t: 0.0,
            rho,
            m: zero.clone(),
            v: zero,
            mu,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// `u = m / rho`.
    pub fn u(&self) -> Result<ScalarField> {
        velocity_from(&self.rho, &self.m)
    }

    /// `grad rho` recovered from the stored triple as `(rho v - m) / (2 mu)`.
    pub fn density_gradient(&self) -> ScalarField {
        let vals = self
            .rho
            .values()
            .iter()
            .zip(self.v.values())
            .zip(self.m.values())
            .map(|((r, v), m)| (r * v - m) / (2.0 * self.mu))
            .collect();
        ScalarField::from_raw(*self.grid(), vals, Parity::Odd)
    }

    /// `|| m - (rho v - 2 mu grad rho) ||_inf`.
    pub fn compatibility_residual(&self) -> f64 {
        let g = gradient(&self.rho);
        self.rho
            .values()
            .iter()
            .zip(self.v.values())
            .zip(self.m.values())
            .zip(g.values())
            .fold(0.0, |acc: f64, (((r, v), m), d)| {
                acc.max((m - (r * v - 2.0 * self.mu * d)).abs())
            })
    }
}

pub(crate) fn odd_zero(grid: Grid) -> ScalarField {
    ScalarField::from_raw(grid, alloc::vec![0.0; grid.node_count()], Parity::Odd)
}

pub(crate) fn same_grid(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch { expected: "matching" });
    }
    Ok(())
}

pub(crate) fn check_floor(rho: &[f64], floor: f64) -> Result<()> {
    match rho.iter().position(|&r| !(r >= floor)) {
        Some(node) => Err(Error::DensityFloor {
            node,
            value: rho[node],
            floor,
        }),
        None => Ok(()),
    }
}

/// `v = u + 2 mu grad(rho) / rho`.
pub fn effective_velocity(rho: &ScalarField, u: &ScalarField, mu: f64) -> Result<ScalarField> {
    same_grid(rho, u)?;
    check_floor(rho.values(), f64::MIN_POSITIVE)?;
    let g = gradient(rho);
    let vals: Vec<f64> = rho
        .values()
        .iter()
        .zip(u.values())
        .zip(g.values())
        .map(|((r, u), d)| u + 2.0 * mu * d / r)
        .collect();
    Ok(ScalarField::from_raw(*rho.grid(), vals, Parity::Odd))
}

/// `m = rho v - 2 mu grad rho`.
pub fn momentum_from(rho: &ScalarField, v: &ScalarField, mu: f64) -> Result<ScalarField> {
    same_grid(rho, v)?;
    check_floor(rho.values(), DENSITY_FLOOR)?;
    let g = gradient(rho);
    let vals: Vec<f64> = rho
        .values()
        .iter()
        .zip(v.values())
        .zip(g.values())
        .map(|((r, v), d)| r * v - 2.0 * mu * d)
        .collect();
    Ok(ScalarField::from_raw(*rho.grid(), vals, Parity::Odd))
}

/// `u = m / rho`, refusing densities below [`DENSITY_FLOOR`].
pub fn velocity_from(rho: &ScalarField, m: &ScalarField) -> Result<ScalarField> {
    velocity_from_with_floor(rho, m, DENSITY_FLOOR)
}

pub fn velocity_from_with_floor(rho: &ScalarField, m: &ScalarField, floor: f64) -> Result<ScalarField> {
    same_grid(rho, m)?;
    check_floor(rho.values(), floor)?;
    let vals = rho.values().iter().zip(m.values()).map(|(r, m)| m / r).collect();
    Ok(ScalarField::from_raw(*rho.grid(), vals, Parity::Odd))
}
