//! Functionals and inequality checks evaluated on trajectories.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Serialize;

use crate::caloric::koch_tataru_profile;
use crate::error::{Error, Result};
use crate::grid::{max_abs, Grid, Parity};
use crate::law::PressureLaw;
use crate::ops::grad_raw;
use crate::state::{check_floor, AugmentedState};
use crate::trajectory::Trajectory;

/// Lower end of the time window of every `sqrt(t)`-weighted diagnostic.
pub const T_MIN: f64 = 0.01;

/// A named scalar time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalSeries {
    pub name: String,
    pub units: String,
    pub points: Vec<(f64, f64)>,
}

impl FunctionalSeries {
    pub fn new(name: &str, units: &str, points: Vec<(f64, f64)>) -> Self {
        FunctionalSeries {
            name: name.to_string(),
            units: units.to_string(),
            points,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Strictly increasing times and finite values.
    pub fn validate(&self) -> Result<()> {
        let increasing = self.points.windows(2).all(|w| w[1].0 > w[0].0);
        if !increasing || self.points.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::BadTrajectory);
        }
        Ok(())
    }

    /// Largest value over samples with `t_min <= t`.
    pub fn sup_from(&self, t_min: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.0 >= t_min)
            .map(|p| p.1)
            .reduce(f64::max)
    }
}

/// A functional together with its instantaneous dissipation rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functional {
    pub value: f64,
    pub dissipation: f64,
}

fn derivative(grid: &Grid, parity: Parity, f: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; f.len()];
    grad_raw(grid, parity, f, &mut out);
    out
}

fn potential_sum(state: &AugmentedState, law: &PressureLaw, weights: &[f64]) -> f64 {
    state
        .rho
        .values()
        .iter()
        .zip(weights)
        .map(|(r, w)| law.potential(*r) * w)
        .sum()
}

/// `E = sum [rho u^2 / 2 + Pi(rho) - Pi(1)] w` and the rate `sum 2 mu rho |Du|^2 w`.
///
/// Radially `|Du|^2 = (d_r u)^2 + (N-1) (u/r)^2`, which is `N (d_r u)^2` on the axis.
pub fn energy(state: &AugmentedState, law: &PressureLaw) -> Result<Functional> {
    let grid = *state.grid();
    let rho = state.rho.values();
    check_floor(rho, f64::MIN_POSITIVE)?;
    let u: Vec<f64> = state.m.values().iter().zip(rho).map(|(m, r)| m / r).collect();
    let w = grid.weights();
    let du = derivative(&grid, Parity::Odd, &u);
    let kinetic: f64 = rho.iter().zip(&u).zip(&w).map(|((r, u), w)| 0.5 * r * u * u * w).sum();
    let k = f64::from(grid.dim()) - 1.0;
    let dissipation = (0..u.len())
        .map(|i| {
            let mut strain = du[i] * du[i];
            if grid.is_radial() {
                let hoop = if i == 0 { du[0] } else { u[i] / grid.coord(i) };
                strain += k * hoop * hoop;
            }
            2.0 * state.mu * rho[i] * strain * w[i]
        })
        .sum();
    Ok(Functional {
        value: kinetic + potential_sum(state, law, &w),
        dissipation,
    })
}

/// `E_1 = sum [rho v^2 / 2 + Pi(rho) - Pi(1)] w` and the rate `(8 mu / gamma) sum |grad rho^(gamma/2)|^2 w`.
pub fn bd_entropy(state: &AugmentedState, law: &PressureLaw) -> Result<Functional> {
    let grid = *state.grid();
    let rho = state.rho.values();
    check_floor(rho, f64::MIN_POSITIVE)?;
    let w = grid.weights();
    let kinetic: f64 = rho
        .iter()
        .zip(state.v.values())
        .zip(&w)
        .map(|((r, v), w)| 0.5 * r * v * v * w)
        .sum();
    let half = 0.5 * law.gamma();
    let root: Vec<f64> = rho.iter().map(|r| libm::pow(*r, half)).collect();
    let g = derivative(&grid, Parity::Even, &root);
    let dissipation = 8.0 * state.mu / law.gamma() * g.iter().zip(&w).map(|(g, w)| g * g * w).sum::<f64>();
    Ok(Functional {
        value: kinetic + potential_sum(state, law, &w),
        dissipation,
    })
}

fn series_of(traj: &Trajectory, name: &str, f: impl Fn(&AugmentedState) -> Result<f64>) -> Result<FunctionalSeries> {
    traj.validate()?;
    let points = traj
        .samples
        .iter()
        .map(|s| Ok((s.t, f(s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FunctionalSeries::new(name, "", points))
}

pub fn energy_series(traj: &Trajectory, law: &PressureLaw) -> Result<FunctionalSeries> {
    series_of(traj, "energy", |s| Ok(energy(s, law)?.value))
}

pub fn bd_entropy_series(traj: &Trajectory, law: &PressureLaw) -> Result<FunctionalSeries> {
    series_of(traj, "bd_entropy", |s| Ok(bd_entropy(s, law)?.value))
}

/// `sqrt(t) (||rho||_inf + ||grad rho||_inf)` with `grad rho = (rho v - m) / (2 mu)`.
///
/// The sup over `[T_MIN, T]` is `series.sup_from(T_MIN)`.
pub fn lipschitz_diagnostic(traj: &Trajectory) -> Result<FunctionalSeries> {
    series_of(traj, "lipschitz", |s| {
        Ok(libm::sqrt(s.t) * (s.rho.max_abs() + s.density_gradient().max_abs()))
    })
}

/// `||rho||_inf`, `||1/rho||_inf`, `||v||_inf`, `sqrt(t) ||m||_inf`, `sqrt(t) ||u||_inf` per sample.
pub fn sup_norm_series(traj: &Trajectory) -> Result<Vec<FunctionalSeries>> {
    traj.validate()?;
    let mut out: Vec<FunctionalSeries> = ["rho_sup", "inv_rho_sup", "v_sup", "sqrt_t_m_sup", "sqrt_t_u_sup"]
        .iter()
        .map(|n| FunctionalSeries::new(n, "", Vec::new()))
        .collect();
    for s in &traj.samples {
        let rho = s.rho.values();
        check_floor(rho, f64::MIN_POSITIVE)?;
        let inv = rho.iter().fold(0.0f64, |a, r| a.max(1.0 / r));
        let u =
            s.m.values()
                .iter()
                .zip(rho)
                .fold(0.0f64, |a, (m, r)| a.max((m / r).abs()));
        let st = libm::sqrt(s.t);
        let row = [max_abs(rho), inv, s.v.max_abs(), st * s.m.max_abs(), st * u];
        for (series, value) in out.iter_mut().zip(row) {
            series.points.push((s.t, value));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub series: String,
    /// Largest `(f_{k+1} - f_k) / (1 + |f_k|)`, floored at zero.
    pub max_increase: f64,
    /// Sum of the positive increments.
    pub total_increase: f64,
    pub tolerance: f64,
    /// Time at the end of the worst step, when there was an increase.
    pub worst_time: Option<f64>,
    pub pass: bool,
}

/// Checks that every increment of `series` is at most `tol (1 + |value|)`.
pub fn monotonicity_check(series: &FunctionalSeries, tol: f64) -> MonotonicityReport {
    let mut max_increase = 0.0f64;
    let mut total = 0.0;
    let mut worst = None;
    for w in series.points.windows(2) {
        let d = w[1].1 - w[0].1;
        if d > 0.0 {
            total += d;
            let rel = d / (1.0 + w[0].1.abs());
            if rel > max_increase {
                max_increase = rel;
                worst = Some(w[1].0);
            }
        }
    }
    MonotonicityReport {
        series: series.name.clone(),
        max_increase,
        total_increase: total,
        tolerance: tol,
        worst_time: worst,
        pass: max_increase <= tol,
    }
}

/// Which growth inequality to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthKind {
    /// `||rho(t)|| <= K ||rho_0|| exp(K sqrt(t) sup_{s<=t} ||v(s)||)`.
    Density,
    /// `||v(t)|| <= ||v_0|| + K sqrt(t) sup_{s<=t} ||rho(s)||^(gamma-2) ||m||_{E_t}`.
    Velocity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub kind: GrowthKind,
    pub constant: f64,
    /// `min_t (right - left)`.
    pub margin: f64,
    pub worst_time: f64,
    pub pass: bool,
}

/// Evaluates both sides of a growth bound at every sample with calibration constant `k`.
pub fn growth_bound_check(traj: &Trajectory, law: &PressureLaw, kind: GrowthKind, k: f64) -> Result<GrowthReport> {
    traj.validate()?;
    let first = &traj.samples[0];
    let mut margin = f64::INFINITY;
    let mut worst_time = first.t;
    let mut record = |t: f64, left: f64, right: f64| {
        if right - left < margin {
            margin = right - left;
            worst_time = t;
        }
    };
    match kind {
        GrowthKind::Density => {
            let rho0 = first.rho.max_abs();
            let mut v_sup = 0.0f64;
            let mut step = 0;
            for s in &traj.samples {
                v_sup = v_sup.max(s.v.max_abs());
                while step < traj.steps.len() && traj.steps[step].t <= s.t {
                    v_sup = v_sup.max(traj.steps[step].v_sup);
                    step += 1;
                }
                let right = k * rho0 * libm::exp(k * libm::sqrt(s.t) * v_sup);
                record(s.t, s.rho.max_abs(), right);
            }
        }
        GrowthKind::Velocity => {
            let v0 = first.v.max_abs();
            let profile = koch_tataru_profile(traj)?;
            let mut rho_sup = 0.0f64;
            for (s, (_, sup, carl)) in traj.samples.iter().zip(profile) {
                rho_sup = rho_sup.max(s.rho.max_abs());
                let right = v0 + k * libm::sqrt(s.t) * libm::pow(rho_sup, law.gamma() - 2.0) * (sup + carl);
                record(s.t, s.v.max_abs(), right);
            }
        }
    }
    Ok(GrowthReport {
        kind,
        constant: k,
        margin,
        worst_time,
        pass: margin >= 0.0,
    })
}
