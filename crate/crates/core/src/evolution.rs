//! Time integration of the augmented system `(rho, v)` on line and radial
//! grids, and of the classical `(rho, u)` system on lines.
//!
//! Augmented step: `rho` by theta-implicit diffusion plus explicit upwind
//! flux, then `v` by upwind transport along `u` with either the pressure
//! force (lines) or exact exponential relaxation toward `u` (radial).
//! `m` and `u` are always re-derived from the new `(rho, v)`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{AbortKind, Error, Result};
use crate::grid::{max_abs, Boundary, Grid, GridKind, Parity, ScalarField, FAR_DENSITY};
use crate::law::PressureLaw;
use crate::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal};
use crate::ops::full_cell;
use crate::state::{check_floor, effective_velocity, momentum_from, same_grid, AugmentedState, DENSITY_FLOOR};
use crate::trajectory::{StepRecord, Trajectory};

/// Speeds below this count as zero when sizing a step.
const SPEED_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Augmented,
    Classical1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Implicitness of the diffusion step, in `[1/2, 1]`.
    pub theta: f64,
    pub cfl: f64,
    pub density_floor: f64,
    /// Store every `stride`-th step (the final time is always stored).
    pub stride: usize,
    pub t_final: f64,
    pub dt_max: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scheme: Scheme::Augmented,
            theta: 0.5,
            cfl: 0.4,
            density_floor: DENSITY_FLOOR,
            stride: 10,
            t_final: 1.0,
            dt_max: 1e-2,
            max_steps: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.theta >= 0.5 && self.theta <= 1.0) {
            return bad("theta must lie in [1/2, 1]");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("t_final must be positive");
        }
        if !(self.dt_max > 0.0) {
            return bad("dt_max must be positive");
        }
        if !(self.density_floor > 0.0 && self.density_floor.is_finite()) {
            return bad("density_floor must be positive");
        }
        if self.stride == 0 || self.max_steps == 0 {
            return bad("stride and max_steps must be at least 1");
        }
        Ok(())
    }
}

/// Largest admissible step for `state`.
///
/// Transport: `cfl h / max(|u|, |v|)`. The augmented scheme is further capped
/// by `cfl h / c` (explicit pressure coupling, `c^2 = P'(rho)`) and by
/// `dt max(P'(rho) / 2 mu) <= 1`; the classical scheme uses `cfl h / max(|u| + c)`.
pub fn cfl_dt(state: &AugmentedState, law: &PressureLaw, cfg: &SolverConfig) -> f64 {
    let h = state.grid().h();
    let rho = state.rho.values();
    let mut transport = 0.0f64;
    let mut sound = 0.0f64;
    let mut acoustic = 0.0f64;
    for ((r, m), v) in rho.iter().zip(state.m.values()).zip(state.v.values()) {
        let u = (m / r).abs();
        let c = libm::sqrt(law.dp(*r));
        transport = transport.max(u).max(v.abs());
        sound = sound.max(c);
        acoustic = acoustic.max(u + c);
    }
    let mut dt = cfg.dt_max;
    match cfg.scheme {
        Scheme::Augmented => {
            dt = dt.min(cfg.cfl * h / transport.max(SPEED_EPS));
            if sound > 0.0 {
                dt = dt.min(cfg.cfl * h / sound);
                let rate = rho
                    .iter()
                    .fold(0.0f64, |acc, r| acc.max(law.relaxation_rate(*r, state.mu)));
                dt = dt.min(1.0 / rate);
            }
        }
        Scheme::Classical1d => dt = dt.min(cfg.cfl * h / acoustic.max(SPEED_EPS)),
    }
    dt
}

/// Three-point operator `(L f)_i = a_i f_{i-1} + b_i f_i + c_i f_{i+1} + g_i far`.
/// On periodic grids `a_0` and `c_{n-1}` wrap around.
struct Stencil {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    g: Vec<f64>,
    cyclic: bool,
}

impl Stencil {
    /// `div(k grad f)` with conductance `k(i)` on the face between nodes
    /// `i` and `i + 1` (`i = -1` is the left far-field face).
    fn diffusion(grid: &Grid, k: impl Fn(isize) -> f64) -> Self {
        let n = grid.node_count();
        let h = grid.h();
        let (mut a, mut b, mut c, mut g) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut cyclic = false;
        match grid.kind() {
            GridKind::Line => {
                let inv = 1.0 / (h * h);
                for i in 0..n {
                    a[i] = k(i as isize - 1) * inv;
                    c[i] = k(i as isize) * inv;
                    b[i] = -(a[i] + c[i]);
                }
                match grid.boundary() {
                    Boundary::Periodic => cyclic = true,
                    Boundary::Farfield => {
                        g[0] = a[0];
                        a[0] = 0.0;
                        g[n - 1] = c[n - 1];
                        c[n - 1] = 0.0;
                    }
                }
            }
            GridKind::Radial => {
                for i in 0..n {
                    let vol = full_cell(grid, i) * h;
                    if i > 0 {
                        a[i] = grid.metric(grid.face_radius(i - 1)) * k(i as isize - 1) / vol;
                    }
                    c[i] = grid.metric(grid.face_radius(i)) * k(i as isize) / vol;
                    b[i] = -(a[i] + c[i]);
                }
                g[n - 1] = c[n - 1];
                c[n - 1] = 0.0;
            }
        }
        Stencil { a, b, c, g, cyclic }
    }

    fn apply(&self, f: &[f64], far: f64) -> Vec<f64> {
        let n = f.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 {
                    f[i - 1]
                } else if self.cyclic {
                    f[n - 1]
                } else {
                    0.0
                };
                let r = if i + 1 < n {
                    f[i + 1]
                } else if self.cyclic {
                    f[0]
                } else {
                    0.0
                };
                self.a[i] * l + self.b[i] * f[i] + self.c[i] * r + self.g[i] * far
            })
            .collect()
    }

    /// Solves `(diag - s L) x = rhs` for a field whose far value is `far`.
    fn solve_shifted(&self, diag: &[f64], s: f64, mut rhs: Vec<f64>, far: f64) -> Result<Vec<f64>> {
        let a: Vec<f64> = self.a.iter().map(|x| -s * x).collect();
        let c: Vec<f64> = self.c.iter().map(|x| -s * x).collect();
        let b: Vec<f64> = self.b.iter().zip(diag).map(|(x, d)| d - s * x).collect();
        for (r, g) in rhs.iter_mut().zip(&self.g) {
            *r += s * g * far;
        }
        if self.cyclic {
            solve_cyclic_tridiagonal(&a, &b, &c, &mut rhs)?;
        } else {
            solve_tridiagonal(&a, &b, &c, &mut rhs)?;
        }
        Ok(rhs)
    }
}

/// Conservative upwind `div(q w)`, the donor cell picked by the sign of the
/// face average of `w`. Outside the grid `q = q_far` and `w = 0`.
fn upwind_divergence(grid: &Grid, q: &[f64], w: &[f64], q_far: f64) -> Vec<f64> {
    let n = q.len();
    let h = grid.h();
    let face = |ql: f64, qr: f64, wl: f64, wr: f64| {
        let wf = 0.5 * (wl + wr);
        wf * if wf >= 0.0 { ql } else { qr }
    };
    let right_flux = |i: usize| -> f64 {
        if i + 1 < n {
            face(q[i], q[i + 1], w[i], w[i + 1])
        } else if grid.is_periodic() {
            face(q[i], q[0], w[i], w[0])
        } else {
            face(q[i], q_far, w[i], 0.0)
        }
    };
    match grid.kind() {
        GridKind::Line => {
            let left = if grid.is_periodic() {
                right_flux(n - 1)
            } else {
                face(q_far, q[0], 0.0, w[0])
            };
            let mut flux_in = left;
            (0..n)
                .map(|i| {
                    let out = right_flux(i);
                    let d = (out - flux_in) / h;
                    flux_in = out;
                    d
                })
                .collect()
        }
        GridKind::Radial => {
            let mut flux_in = 0.0;
            (0..n)
                .map(|i| {
                    let out = grid.metric(grid.face_radius(i)) * right_flux(i);
                    let d = (out - flux_in) / full_cell(grid, i);
                    flux_in = out;
                    d
                })
                .collect()
        }
    }
}

fn check_pair(rho: &ScalarField, other: &ScalarField, dt: f64) -> Result<()> {
    same_grid(rho, other)?;
    if !(dt >= 0.0) {
        return Err(Error::NegativeTime(dt));
    }
    Ok(())
}

/// One density step: `(I - 2 mu theta dt L) rho' = (I + 2 mu (1 - theta) dt L) rho - dt div_up(rho v)`.
pub fn step_density(rho: &ScalarField, v: &ScalarField, dt: f64, mu: f64, theta: f64) -> Result<ScalarField> {
    check_pair(rho, v, dt)?;
    let grid = rho.grid();
    let lap = Stencil::diffusion(grid, |_| 1.0);
    let d = 2.0 * mu;
    let r = rho.values();
    // work with the deviation from the far state so that rest stays exact
    let dev: Vec<f64> = r.iter().map(|x| x - FAR_DENSITY).collect();
    let explicit = lap.apply(&dev, 0.0);
    let div = upwind_divergence(grid, r, v.values(), FAR_DENSITY);
    let rhs: Vec<f64> = (0..r.len())
        .map(|i| dev[i] + (1.0 - theta) * dt * d * explicit[i] - dt * div[i])
        .collect();
    let ones = vec![1.0; r.len()];
    let out = lap.solve_shifted(&ones, theta * dt * d, rhs, 0.0)?;
    Ok(ScalarField::from_raw(
        *grid,
        out.iter().map(|x| x + FAR_DENSITY).collect(),
        Parity::Even,
    ))
}

/// Upwind neighbour of node `i` for transport with speed `u` (`far` outside the grid).
#[inline]
fn upwind_neighbour(grid: &Grid, f: &[f64], i: usize, u: f64, far: f64) -> f64 {
    let n = f.len();
    if u >= 0.0 {
        if i > 0 {
            f[i - 1]
        } else if grid.is_periodic() {
            f[n - 1]
        } else {
            far
        }
    } else if i + 1 < n {
        f[i + 1]
    } else if grid.is_periodic() {
        f[0]
    } else {
        far
    }
}

/// `v' = v - dt (u D_up v + d_x F(rho))` on a line, with `F` the enthalpy.
pub fn step_effective_velocity_1d(
    v: &ScalarField,
    u: &ScalarField,
    rho: &ScalarField,
    dt: f64,
    law: &PressureLaw,
) -> Result<ScalarField> {
    check_pair(rho, v, dt)?;
    same_grid(rho, u)?;
    let grid = rho.grid();
    grid.require_line()?;
    check_floor(rho.values(), f64::MIN_POSITIVE)?;
    let f: Vec<f64> = rho.values().iter().map(|r| law.enthalpy(*r)).collect();
    let f_far = law.enthalpy(FAR_DENSITY);
    let (vv, uu) = (v.values(), u.values());
    let n = vv.len();
    let h = grid.h();
    let out = (0..n)
        .map(|i| {
            let courant = dt * uu[i].abs() / h;
            let up = upwind_neighbour(grid, vv, i, uu[i], 0.0);
            let right = upwind_neighbour(grid, &f, i, -1.0, f_far);
            let left = upwind_neighbour(grid, &f, i, 1.0, f_far);
            vv[i] - courant * (vv[i] - up) - dt * (right - left) / (2.0 * h)
        })
        .collect();
    Ok(ScalarField::from_raw(*grid, out, Parity::Odd))
}

#[inline]
fn clamp_between(x: f64, a: f64, b: f64) -> f64 {
    x.clamp(a.min(b), a.max(b))
}

/// Radial `v' = u + (v_adv - u) exp(-dt P'(rho) / 2 mu)` with `v_adv` the upwind
/// transport of `v` along the frozen `u`.
///
/// Whenever `dt |u| <= h` both stages are convex combinations and are
/// evaluated as such, so `|v'| <= max(|v|, |u|)` holds in floating point.
pub fn step_effective_velocity_radial(
    v: &ScalarField,
    u: &ScalarField,
    rho: &ScalarField,
    dt: f64,
    law: &PressureLaw,
    mu: f64,
) -> Result<ScalarField> {
    check_pair(rho, v, dt)?;
    same_grid(rho, u)?;
    let grid = rho.grid();
    grid.require_radial()?;
    check_floor(rho.values(), f64::MIN_POSITIVE)?;
    let (vv, uu, rr) = (v.values(), u.values(), rho.values());
    let h = grid.h();
    let mut out = vec![0.0; vv.len()];
    for i in 1..vv.len() {
        let courant = dt * uu[i].abs() / h;
        let up = upwind_neighbour(grid, vv, i, uu[i], 0.0);
        let mut adv = vv[i] + courant * (up - vv[i]);
        if courant <= 1.0 {
            adv = clamp_between(adv, vv[i], up);
        }
        let decay = libm::exp(-dt * law.relaxation_rate(rr[i], mu));
        out[i] = clamp_between(uu[i] + (adv - uu[i]) * decay, adv, uu[i]);
    }
    Ok(ScalarField::from_raw(*grid, out, Parity::Odd))
}

fn abort(t: f64, node: usize, kind: AbortKind) -> Error {
    Error::SolverAbort { t, node, kind }
}

fn check_density(rho: &[f64], floor: f64, t: f64) -> Result<()> {
    if let Some(node) = rho.iter().position(|r| !r.is_finite()) {
        return Err(abort(t, node, AbortKind::NotFinite));
    }
    check_floor(rho, floor).map_err(|e| match e {
        Error::DensityFloor { node, value, floor } => abort(t, node, AbortKind::DensityFloor { value, floor }),
        other => other,
    })
}

fn check_finite(f: &[f64], t: f64) -> Result<()> {
    match f.iter().position(|x| !x.is_finite()) {
        Some(node) => Err(abort(t, node, AbortKind::NotFinite)),
        None => Ok(()),
    }
}

fn ratio(m: &[f64], rho: &[f64]) -> Vec<f64> {
    m.iter().zip(rho).map(|(m, r)| m / r).collect()
}

/// Step-size bookkeeping shared by both solvers: samples every `stride`
/// steps, whenever the time doubles since the last sample, and at `t_final`.
struct Clock {
    t: f64,
    steps: usize,
    last_sample: f64,
}

impl Clock {
    /// Clips `dt` so the step lands on the next forced sample time.
    fn next(&self, dt: f64, t_final: f64) -> (f64, f64) {
        let mut stop = t_final;
        if self.last_sample > 0.0 {
            stop = stop.min(2.0 * self.last_sample);
        }
        if self.t + dt >= stop * (1.0 - 1e-12) {
            (stop - self.t, stop)
        } else {
            (dt, self.t + dt)
        }
    }

    fn sample_due(&self, t_final: f64, stride: usize) -> bool {
        self.steps % stride == 0 || self.t >= t_final || self.last_sample == 0.0 || self.t >= 2.0 * self.last_sample
    }
}

fn record(t: f64, dt: f64, rho: &[f64], v: &[f64], u_sup: f64) -> StepRecord {
    StepRecord {
        t,
        dt,
        min_rho: rho.iter().copied().fold(f64::INFINITY, f64::min),
        max_rho: rho.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        v_sup: max_abs(v),
        u_sup,
    }
}

fn check_start(init_t: f64, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if init_t != 0.0 {
        return Err(Error::InvalidConfig("initial state must be at t = 0".into()));
    }
    Ok(())
}

/// Integrates the augmented system from `init` to `cfg.t_final`.
pub fn solve_augmented(init: &AugmentedState, law: &PressureLaw, cfg: &SolverConfig) -> Result<Trajectory> {
    check_start(init.t, cfg)?;
    let cfg = SolverConfig {
        scheme: Scheme::Augmented,
        ..*cfg
    };
    let grid = *init.grid();
    let mu = init.mu;
    check_density(init.rho.values(), cfg.density_floor, 0.0)?;
    let mut state = init.clone();
    let mut u = ScalarField::from_raw(grid, ratio(state.m.values(), state.rho.values()), Parity::Odd);
    let mut traj = Trajectory::new(vec![state.clone()]);
    let mut clock = Clock {
        t: 0.0,
        steps: 0,
        last_sample: 0.0,
    };
    while clock.t < cfg.t_final {
        if clock.steps == cfg.max_steps {
            return Err(abort(clock.t, 0, AbortKind::StepLimit { steps: cfg.max_steps }));
        }
        let (dt, t_new) = clock.next(cfl_dt(&state, law, &cfg), cfg.t_final);
        let rho = step_density(&state.rho, &state.v, dt, mu, cfg.theta)?;
        check_density(rho.values(), cfg.density_floor, t_new)?;
        let v = if grid.is_radial() {
            step_effective_velocity_radial(&state.v, &u, &rho, dt, law, mu)?
        } else {
            step_effective_velocity_1d(&state.v, &u, &rho, dt, law)?
        };
        check_finite(v.values(), t_new)?;
        let m = momentum_from(&rho, &v, mu)?;
        traj.steps
            .push(record(t_new, dt, rho.values(), v.values(), u.max_abs()));
        u = ScalarField::from_raw(grid, ratio(m.values(), rho.values()), Parity::Odd);
        state = AugmentedState {
            t: t_new,
            rho,
            m,
            v,
            mu,
        };
        clock.t = t_new;
        clock.steps += 1;
        if clock.sample_due(cfg.t_final, cfg.stride) {
            clock.last_sample = t_new;
            traj.samples.push(state.clone());
        }
    }
    Ok(traj)
}

/// Integrates `d_t rho + d_x(rho u) = 0`,
/// `d_t(rho u) + d_x(rho u^2) - 2 mu d_x(rho d_x u) + d_x P = 0` on a line.
///
/// The viscous term is theta-implicit with `rho` frozen at the old level in
/// the face coefficients. Samples carry `v` derived from `(rho, u)`.
pub fn solve_classical_1d(
    rho0: &ScalarField,
    u0: &ScalarField,
    law: &PressureLaw,
    mu: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    check_start(0.0, cfg)?;
    let cfg = SolverConfig {
        scheme: Scheme::Classical1d,
        ..*cfg
    };
    same_grid(rho0, u0)?;
    let grid = *rho0.grid();
    grid.require_line()?;
    check_density(rho0.values(), cfg.density_floor, 0.0)?;
    let n = grid.node_count();
    let h = grid.h();
    let p_far = law.p(FAR_DENSITY);
    let mut rho = rho0.values().to_vec();
    let mut u = u0.values().to_vec();
    let mut state = AugmentedState::from_density_physical(0.0, rho0.clone(), u0, mu)?;
    let mut traj = Trajectory::new(vec![state.clone()]);
    let mut clock = Clock {
        t: 0.0,
        steps: 0,
        last_sample: 0.0,
    };
    while clock.t < cfg.t_final {
        if clock.steps == cfg.max_steps {
            return Err(abort(clock.t, 0, AbortKind::StepLimit { steps: cfg.max_steps }));
        }
        let (dt, t_new) = clock.next(cfl_dt(&state, law, &cfg), cfg.t_final);

        let div_mass = upwind_divergence(&grid, &rho, &u, FAR_DENSITY);
        let rho_new: Vec<f64> = rho.iter().zip(&div_mass).map(|(r, d)| r - dt * d).collect();
        check_density(&rho_new, cfg.density_floor, t_new)?;

        let q: Vec<f64> = rho.iter().zip(&u).map(|(r, u)| r * u).collect();
        let div_mom = upwind_divergence(&grid, &q, &u, 0.0);
        let p: Vec<f64> = rho_new.iter().map(|r| law.p(*r)).collect();
        let visc = Stencil::diffusion(&grid, |i| {
            let at = |k: isize| -> f64 {
                if k < 0 || k as usize >= n {
                    if grid.is_periodic() {
                        rho[k.rem_euclid(n as isize) as usize]
                    } else {
                        FAR_DENSITY
                    }
                } else {
                    rho[k as usize]
                }
            };
            0.5 * (at(i) + at(i + 1))
        });
        let explicit = visc.apply(&u, 0.0);
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let right = upwind_neighbour(&grid, &p, i, -1.0, p_far);
                let left = upwind_neighbour(&grid, &p, i, 1.0, p_far);
                q[i] - dt * div_mom[i] - dt * (right - left) / (2.0 * h)
                    + (1.0 - cfg.theta) * dt * 2.0 * mu * explicit[i]
            })
            .collect();
        let u_new = visc.solve_shifted(&rho_new, cfg.theta * dt * 2.0 * mu, rhs, 0.0)?;
        check_finite(&u_new, t_new)?;

        let u_sup = max_abs(&u);
        rho = rho_new;
        u = u_new;
        let rho_field = ScalarField::from_raw(grid, rho.clone(), Parity::Even);
        let u_field = ScalarField::from_raw(grid, u.clone(), Parity::Odd);
        let v = effective_velocity(&rho_field, &u_field, mu)?;
        traj.steps.push(record(t_new, dt, &rho, v.values(), u_sup));
        let m = momentum_from(&rho_field, &v, mu)?;
        state = AugmentedState {
            t: t_new,
            rho: rho_field,
            m,
            v,
            mu,
        };
        clock.t = t_new;
        clock.steps += 1;
        if clock.sample_due(cfg.t_final, cfg.stride) {
            clock.last_sample = t_new;
            traj.samples.push(state.clone());
        }
    }
    Ok(traj)
}
