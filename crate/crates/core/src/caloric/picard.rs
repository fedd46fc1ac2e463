//! Mild solutions by Picard iteration on the Duhamel formulation, and the
//! bilinear Duhamel term `B(m, v)`.
//!
//! Density: `rho(t) = e^{2 mu t Laplacian} rho0 - int_0^t e^{2 mu (t-s) Laplacian} div(rho v)(s) ds`.
//! Effective velocity: semi-Lagrangian integration of the (damped) transport
//! equation along the characteristics of the previous iterate's `u`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::heat::HeatOperator;
use crate::error::{Error, Result};
use crate::grid::{interpolate, sup_distance, Grid, GridKind, Parity, ScalarField, FAR_DENSITY};
use crate::law::PressureLaw;
use crate::ops::{div_radial_raw, grad_raw};
use crate::state::{check_floor, AugmentedState, DENSITY_FLOOR};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    /// Uniform time steps on `[0, T]`; `0` picks one step per half cell width.
    pub steps: usize,
    pub max_iterations: usize,
    /// Sup-norm change between iterates below which the iteration stops.
    pub tolerance: f64,
    pub density_floor: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            steps: 0,
            max_iterations: 20,
            tolerance: 1e-10,
            density_floor: DENSITY_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// Sup-norm change of the last iteration.
    pub change: f64,
}

struct Iterate {
    rho: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    m: Vec<Vec<f64>>,
}

fn gradient_values(grid: &Grid, parity: Parity, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    grad_raw(grid, parity, f, &mut out);
    out
}

fn momentum_values(grid: &Grid, rho: &[f64], v: &[f64], mu: f64) -> Vec<f64> {
    let g = gradient_values(grid, Parity::Even, rho);
    rho.iter()
        .zip(v)
        .zip(&g)
        .map(|((r, v), d)| r * v - 2.0 * mu * d)
        .collect()
}

/// `div(f e_r)` (radial) or `d_x f` (line) of a flux vanishing outside the grid.
fn flux_divergence(grid: &Grid, f: &[f64]) -> Vec<f64> {
    match grid.kind() {
        GridKind::Line => gradient_values(grid, Parity::Odd, f),
        GridKind::Radial => {
            let mut out = vec![0.0; f.len()];
            div_radial_raw(grid, f, Some(0.0), &mut out);
            out
        }
    }
}

/// Solves on `[0, horizon]` by Picard iteration starting from the constant-in-time iterate.
pub fn picard_mild_solve(
    init: &AugmentedState,
    law: &PressureLaw,
    horizon: f64,
    cfg: &PicardConfig,
) -> Result<PicardSolution> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let grid = *init.grid();
    let mu = init.mu;
    let steps = if cfg.steps > 0 {
        cfg.steps
    } else {
        (libm::ceil(2.0 * horizon / grid.h()) as usize).max(8)
    };
    let dt = horizon / steps as f64;
    let kappa = 2.0 * mu;
    let full = HeatOperator::new(&grid, dt, kappa, Parity::Even);
    let half = HeatOperator::new(&grid, 0.5 * dt, kappa, Parity::Even);
    let radial = grid.is_radial();
    let coords = grid.coords();

    let mut cur = Iterate {
        rho: vec![init.rho.values().to_vec(); steps + 1],
        v: vec![init.v.values().to_vec(); steps + 1],
        m: vec![init.m.values().to_vec(); steps + 1],
    };
    check_floor(init.rho.values(), cfg.density_floor)?;
    let mut change = f64::INFINITY;
    for iteration in 1..=cfg.max_iterations {
        let mut u = Vec::with_capacity(steps + 1);
        let mut source = Vec::with_capacity(steps + 1);
        for j in 0..=steps {
            u.push(
                cur.m[j]
                    .iter()
                    .zip(&cur.rho[j])
                    .map(|(m, r)| m / r)
                    .collect::<Vec<f64>>(),
            );
            let flux: Vec<f64> = cur.rho[j].iter().zip(&cur.v[j]).map(|(r, v)| r * v).collect();
            source.push(flux_divergence(&grid, &flux));
        }

        let mut rho = Vec::with_capacity(steps + 1);
        rho.push(init.rho.values().to_vec());
        for j in 0..steps {
            let mid: Vec<f64> = source[j]
                .iter()
                .zip(&source[j + 1])
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let decayed = full.apply(&rho[j], FAR_DENSITY);
            let forced = half.apply(&mid, 0.0);
            rho.push(decayed.iter().zip(&forced).map(|(a, b)| a - dt * b).collect());
        }
        // an iterate leaving the admissible set means the map is not contracting
        if rho.iter().any(|r| check_floor(r, cfg.density_floor).is_err()) {
            let change = rho
                .iter()
                .zip(&cur.rho)
                .map(|(a, b)| sup_distance(a, b))
                .fold(0.0, f64::max);
            return Err(Error::PicardNonConvergence {
                iterations: iteration,
                change,
            });
        }

        let mut v = Vec::with_capacity(steps + 1);
        v.push(init.v.values().to_vec());
        let drive: Vec<Vec<f64>> = if radial {
            Vec::new()
        } else {
            rho.iter()
                .map(|r| {
                    let f: Vec<f64> = r.iter().map(|&x| law.enthalpy(x)).collect();
                    gradient_values(&grid, Parity::Even, &f)
                })
                .collect()
        };
        for j in 0..steps {
            let ubar: Vec<f64> = u[j].iter().zip(&u[j + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
            let prev = &v[j];
            let next: Vec<f64> = (0..coords.len())
                .map(|i| {
                    if radial && i == 0 {
                        return 0.0;
                    }
                    let x = coords[i];
                    let half_foot = x - 0.5 * dt * ubar[i];
                    let foot = x - dt * interpolate(&grid, &ubar, Parity::Odd, half_foot, 0.0);
                    let carried = interpolate(&grid, prev, Parity::Odd, foot, 0.0);
                    if radial {
                        let rate = 0.5 * (law.relaxation_rate(rho[j][i], mu) + law.relaxation_rate(rho[j + 1][i], mu));
                        ubar[i] + (carried - ubar[i]) * libm::exp(-dt * rate)
                    } else {
                        let g0 = interpolate(&grid, &drive[j], Parity::Odd, foot, 0.0);
                        carried - 0.5 * dt * (g0 + drive[j + 1][i])
                    }
                })
                .collect();
            v.push(next);
        }
        let m: Vec<Vec<f64>> = rho
            .iter()
            .zip(&v)
            .map(|(r, v)| momentum_values(&grid, r, v, mu))
            .collect();

        change = 0.0;
        for j in 0..=steps {
            change = change
                .max(sup_distance(&rho[j], &cur.rho[j]))
                .max(sup_distance(&v[j], &cur.v[j]))
                .max(sup_distance(&m[j], &cur.m[j]));
        }
        cur = Iterate { rho, v, m };
        if !change.is_finite() {
            return Err(Error::PicardNonConvergence {
                iterations: iteration,
                change,
            });
        }
        if change < cfg.tolerance {
            let samples = (0..=steps)
                .map(|j| AugmentedState {
                    t: j as f64 * dt,
                    rho: ScalarField::from_raw(grid, cur.rho[j].clone(), Parity::Even),
                    m: ScalarField::from_raw(grid, cur.m[j].clone(), Parity::Odd),
                    v: ScalarField::from_raw(grid, cur.v[j].clone(), Parity::Odd),
                    mu,
                })
                .collect();
            return Ok(PicardSolution {
                trajectory: Trajectory::new(samples),
                iterations: iteration,
                change,
            });
        }
    }
    Err(Error::PicardNonConvergence {
        iterations: cfg.max_iterations,
        change,
    })
}

/// `div(v (x) m)` for collinear fields: `d_x(v m)` on lines,
/// `d_r(v m) + (N-1) v m / r` radially (zero on the axis).
fn tensor_divergence(grid: &Grid, v: &[f64], m: &[f64]) -> Vec<f64> {
    let p: Vec<f64> = v.iter().zip(m).map(|(a, b)| a * b).collect();
    let mut d = gradient_values(grid, Parity::Even, &p);
    if grid.is_radial() {
        let k = f64::from(grid.dim()) - 1.0;
        d[0] = 0.0;
        for (i, di) in d.iter_mut().enumerate().skip(1) {
            *di += k * p[i] / grid.coord(i);
        }
    }
    d
}

/// `B(m, v)(t_k) = int_0^{t_k} e^{kappa (t_k - s) Laplacian} div(v (x) m)(s) ds` at every
/// sample of the trajectory, by the midpoint rule on each sample interval.
pub fn bilinear_duhamel(traj: &Trajectory, kappa: f64) -> Result<Vec<ScalarField>> {
    traj.validate()?;
    let grid = *traj.samples[0].grid();
    let forcing: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .map(|s| tensor_divergence(&grid, s.v.values(), s.m.values()))
        .collect();
    let mut out = vec![ScalarField::from_raw(grid, vec![0.0; grid.node_count()], Parity::Odd)];
    let mut b = vec![0.0; grid.node_count()];
    for k in 1..traj.samples.len() {
        let dt = traj.samples[k].t - traj.samples[k - 1].t;
        let mid: Vec<f64> = forcing[k - 1]
            .iter()
            .zip(&forcing[k])
            .map(|(a, c)| 0.5 * (a + c))
            .collect();
        let decayed = HeatOperator::new(&grid, dt, kappa, Parity::Odd).apply(&b, 0.0);
        let forced = HeatOperator::new(&grid, 0.5 * dt, kappa, Parity::Odd).apply(&mid, 0.0);
        b = decayed.iter().zip(&forced).map(|(a, f)| a + dt * f).collect();
        if grid.is_radial() {
            b[0] = 0.0;
        }
        out.push(ScalarField::from_raw(grid, b.clone(), Parity::Odd));
    }
    Ok(out)
}
