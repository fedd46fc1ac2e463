//! Heat-extension norms: `bmo^{-1}`, the Koch-Tataru solution norm and two
//! caloric Besov-type proxies.
//!
//! All sups are taken over grid nodes and a geometric time ladder, so every
//! reported value is a lower bound for the continuous quantity.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::heat::{default_far, HeatOperator};
use crate::error::{Error, Result};
use crate::grid::{interpolate, Boundary, Grid, GridKind, Parity, ScalarField};
use crate::trajectory::Trajectory;

/// Time ladder `t_j = horizon * ratio^j`, `j = 0..=rungs`, and quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaloricConfig {
    pub horizon: f64,
    pub ratio: f64,
    pub rungs: usize,
    /// Extra rungs below the ladder used only for the `s` integral near zero.
    pub sub_rungs: usize,
    /// Simpson panels per octave of the `s` integral.
    pub panels: usize,
}

impl Default for CaloricConfig {
    fn default() -> Self {
        CaloricConfig {
            horizon: 1.0,
            ratio: 0.5,
            rungs: 20,
            sub_rungs: 8,
            panels: 2,
        }
    }
}

impl CaloricConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rungs == 0 {
            return Err(Error::EmptyLadder);
        }
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return bad("ladder ratio must lie in (0, 1)");
        }
        if self.rungs < 8 {
            return bad("ladder needs at least 8 rungs");
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("ladder horizon must be positive");
        }
        if self.panels == 0 {
            return bad("at least one quadrature panel per octave is needed");
        }
        Ok(())
    }

    pub fn ladder(&self) -> Vec<f64> {
        self.times(self.rungs)
    }

    fn times(&self, last: usize) -> Vec<f64> {
        (0..=last)
            .map(|j| self.horizon * libm::pow(self.ratio, j as f64))
            .collect()
    }
}

/// A computed functional with its parts and the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub name: String,
    pub value: f64,
    pub components: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<CaloricConfig>,
}

impl NormReport {
    fn new(name: &str, value: f64) -> Self {
        NormReport {
            name: name.to_string(),
            value,
            components: BTreeMap::new(),
            config: None,
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.components.insert(key.to_string(), value);
        self
    }

    pub fn component(&self, key: &str) -> Option<f64> {
        self.components.get(key).copied()
    }
}

/// `int_{B(x_i, radius)} a(|y|) dy` (radial) or `int_{x_i - radius}^{x_i + radius} a`
/// (line) for every node `x_i`, with `a` piecewise linear between nodes and
/// equal to `ext` outside a non-periodic domain.
pub(crate) fn ball_integrals(grid: &Grid, a: &[f64], ext: f64, radius: f64) -> Vec<f64> {
    match grid.kind() {
        GridKind::Line => {
            let prefix = LinePrefix::new(grid, a, ext);
            let reach = radius / grid.h();
            (0..a.len())
                .map(|i| prefix.at(i as f64 + reach) - prefix.at(i as f64 - reach))
                .collect()
        }
        GridKind::Radial => (0..a.len())
            .map(|i| radial_ball(grid, a, ext, grid.coord(i), radius))
            .collect(),
    }
}

struct LinePrefix<'a> {
    a: &'a [f64],
    cum: Vec<f64>,
    h: f64,
    ext: f64,
    periodic: bool,
}

impl<'a> LinePrefix<'a> {
    fn new(grid: &Grid, a: &'a [f64], ext: f64) -> Self {
        let periodic = grid.boundary() == Boundary::Periodic;
        let n = a.len();
        let h = grid.h();
        let segments = if periodic { n } else { n - 1 };
        let mut cum = vec![0.0; segments + 1];
        for k in 0..segments {
            cum[k + 1] = cum[k] + 0.5 * h * (a[k] + a[(k + 1) % n]);
        }
        LinePrefix {
            a,
            cum,
            h,
            ext,
            periodic,
        }
    }

    /// Integral from node 0 to fractional node index `s`.
    fn at(&self, s: f64) -> f64 {
        let n = self.a.len();
        let segments = self.cum.len() - 1;
        let (s, offset) = if self.periodic {
            let wraps = libm::floor(s / n as f64);
            (s - wraps * n as f64, wraps * self.cum[segments])
        } else if s < 0.0 {
            return s * self.h * self.ext;
        } else if s >= segments as f64 {
            return self.cum[segments] + (s - segments as f64) * self.h * self.ext;
        } else {
            (s, 0.0)
        };
        let k = (libm::floor(s) as usize).min(segments - 1);
        let theta = s - k as f64;
        let lo = self.a[k];
        let hi = self.a[(k + 1) % n];
        offset + self.cum[k] + self.h * (lo * theta + 0.5 * (hi - lo) * theta * theta)
    }
}

/// Measure of the sphere of radius `s` inside the ball `B(x, radius)`, `|x| = r`.
fn cap(dim: u8, r: f64, s: f64, radius: f64) -> f64 {
    let full = if dim == 2 { 2.0 * PI * s } else { 4.0 * PI * s * s };
    if r == 0.0 || s == 0.0 {
        return if s.max(r) <= radius { full } else { 0.0 };
    }
    let c = ((s * s + r * r - radius * radius) / (2.0 * r * s)).clamp(-1.0, 1.0);
    if dim == 2 {
        2.0 * s * libm::acos(c)
    } else {
        2.0 * PI * s * s * (1.0 - c)
    }
}

fn radial_ball(grid: &Grid, a: &[f64], ext: f64, r: f64, radius: f64) -> f64 {
    let h = grid.h();
    let dim = grid.dim();
    let f = |s: f64| interpolate(grid, a, Parity::Even, s, ext) * cap(dim, r, s, radius);
    let panels = |lo: f64, hi: f64| 2 * (libm::ceil(2.0 * (hi - lo) / h) as usize).max(2);
    let simpson = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let m = panels(lo, hi);
        let d = (hi - lo) / m as f64;
        let mut acc = f(lo) + f(hi);
        for k in 1..m {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(lo + k as f64 * d);
        }
        acc * d / 3.0
    };
    // partial caps vanish like a square root at both ends; s = mid - half cos(phi)
    let clustered = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let m = panels(lo, hi);
        let d = PI / m as f64;
        let mut acc = 0.0;
        for k in 1..m {
            let phi = k as f64 * d;
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(mid - half * libm::cos(phi)) * half * libm::sin(phi);
        }
        acc * d / 3.0
    };
    if radius > r {
        simpson(0.0, radius - r) + clustered(radius - r, radius + r)
    } else {
        clustered(r - radius, r + radius)
    }
}

fn dim_of(grid: &Grid) -> f64 {
    match grid.kind() {
        GridKind::Line => 1.0,
        GridKind::Radial => f64::from(grid.dim()),
    }
}

/// `sup_{x, t} ( t^{-N/2} int_0^t int_{B(x, sqrt t)} |e^{s Laplacian} m0(y)|^2 dy ds )^{1/2}`.
pub fn bmo_inv_norm(m0: &ScalarField, cfg: &CaloricConfig) -> Result<NormReport> {
    cfg.validate()?;
    if cfg.horizon > 1.0 {
        return Err(Error::InvalidConfig("bmo^-1 horizon must not exceed 1".to_string()));
    }
    let grid = *m0.grid();
    let parity = m0.parity();
    let far = default_far(m0);
    let u0 = m0.values();
    let last = cfg.rungs + cfg.sub_rungs;
    let times = cfg.times(last);
    let squared = |s: f64| -> Vec<f64> {
        HeatOperator::new(&grid, s, 1.0, parity)
            .apply(u0, far)
            .iter()
            .map(|v| v * v)
            .collect()
    };

    // cumulative s-integrals A_j(y) = int_0^{t_j} |e^{s Laplacian} m0(y)|^2 ds
    let mut upper = squared(times[last]);
    let mut acc: Vec<f64> = u0
        .iter()
        .zip(&upper)
        .map(|(u, q)| 0.5 * times[last] * (u * u + q))
        .collect();
    let mut cumulative = vec![Vec::new(); cfg.rungs + 1];
    if last == cfg.rungs {
        cumulative[last] = acc.clone();
    }
    for j in (0..last).rev() {
        let (lo, hi) = (times[j + 1], times[j]);
        let sub = 2 * cfg.panels;
        let d = (hi - lo) / sub as f64;
        let mut simpson: Vec<f64> = upper.clone();
        for k in 1..=sub {
            let q = squared(lo + k as f64 * d);
            let w = if k == sub {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            for (s, v) in simpson.iter_mut().zip(&q) {
                *s += w * v;
            }
            if k == sub {
                upper = q;
            }
        }
        for (a, s) in acc.iter_mut().zip(&simpson) {
            *a += s * d / 3.0;
        }
        if j <= cfg.rungs {
            cumulative[j] = acc.clone();
        }
    }

    let n_dim = dim_of(&grid);
    let mut best = (0.0, 0.0, grid.coord(0));
    for (j, a) in cumulative.iter().enumerate() {
        let t = times[j];
        let balls = ball_integrals(&grid, a, far * far * t, libm::sqrt(t));
        let scale = libm::pow(t, -0.5 * n_dim);
        for (i, b) in balls.iter().enumerate() {
            let v = scale * b;
            if v > best.0 {
                best = (v, t, grid.coord(i));
            }
        }
    }
    let mut report = NormReport::new("bmo_inv", libm::sqrt(best.0))
        .with("sup_time", best.1)
        .with("anchor", best.2);
    report.config = Some(*cfg);
    Ok(report)
}

/// Per-sample values entering the Koch-Tataru norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KtPoint {
    pub t: f64,
    /// `sqrt(t) ||m(t)||_inf`.
    pub sup_part: f64,
    /// `sup_x t^{-N/2} int_0^t int_{B(x, sqrt t)} |m|^2`, not yet square-rooted.
    pub carleson_sq: f64,
}

/// Koch-Tataru scan of an arbitrary time series of fields on one grid.
pub fn koch_tataru_points(times: &[f64], fields: &[&ScalarField]) -> Result<Vec<KtPoint>> {
    if times.is_empty() || times.len() != fields.len() {
        return Err(Error::BadTrajectory);
    }
    let grid = *fields[0].grid();
    for (w, f) in times.windows(2).zip(&fields[1..]) {
        if !(w[1] > w[0]) || *f.grid() != grid {
            return Err(Error::BadTrajectory);
        }
    }
    let n_dim = dim_of(&grid);
    let sq = |f: &ScalarField| -> Vec<f64> { f.values().iter().map(|v| v * v).collect() };
    let mut prev_sq = sq(fields[0]);
    let mut integral: Vec<f64> = prev_sq.iter().map(|q| times[0] * q).collect();
    let mut out = Vec::with_capacity(times.len());
    for (k, (&t, f)) in times.iter().zip(fields).enumerate() {
        if k > 0 {
            let cur = sq(f);
            let dt = t - times[k - 1];
            for ((s, a), b) in integral.iter_mut().zip(&prev_sq).zip(&cur) {
                *s += 0.5 * dt * (a + b);
            }
            prev_sq = cur;
        }
        if t <= 0.0 {
            continue;
        }
        let balls = ball_integrals(&grid, &integral, 0.0, libm::sqrt(t));
        let best = balls.iter().fold(0.0f64, |m, b| m.max(*b));
        out.push(KtPoint {
            t,
            sup_part: libm::sqrt(t) * f.max_abs(),
            carleson_sq: libm::pow(t, -0.5 * n_dim) * best,
        });
    }
    Ok(out)
}

/// Sup over sample times `t <= horizon` of a Koch-Tataru scan.
pub fn koch_tataru_from_points(points: &[KtPoint], horizon: f64) -> NormReport {
    let tol = horizon * (1.0 + 1e-12);
    let (sup, carl) = points
        .iter()
        .filter(|p| p.t <= tol)
        .fold((0.0f64, 0.0f64), |(s, c), p| (s.max(p.sup_part), c.max(p.carleson_sq)));
    let carl = libm::sqrt(carl);
    NormReport::new("koch_tataru", sup + carl)
        .with("sup_part", sup)
        .with("carleson_part", carl)
        .with("horizon", horizon)
}

/// `||m||_{E_T}` of the trajectory's momentum: sup part plus Carleson part.
pub fn koch_tataru_norm(traj: &Trajectory, horizon: f64) -> Result<NormReport> {
    traj.validate()?;
    let times = traj.times();
    let fields: Vec<&ScalarField> = traj.samples.iter().map(|s| &s.m).collect();
    let points = koch_tataru_points(&times, &fields)?;
    Ok(koch_tataru_from_points(&points, horizon))
}

/// Running `(t, sup part, Carleson part)` of `||m||_{E_t}` at every sample.
pub fn koch_tataru_profile(traj: &Trajectory) -> Result<Vec<(f64, f64, f64)>> {
    traj.validate()?;
    let times = traj.times();
    let fields: Vec<&ScalarField> = traj.samples.iter().map(|s| &s.m).collect();
    let points = koch_tataru_points(&times, &fields)?;
    let mut running = (0.0f64, 0.0f64);
    Ok(points
        .iter()
        .map(|p| {
            running = (running.0.max(p.sup_part), running.1.max(p.carleson_sq));
            (p.t, running.0, libm::sqrt(running.1))
        })
        .collect())
}

/// Heat-extension proxies for negative and positive regularity.
///
/// `order = -1`: `sup_t sqrt(t) ||e^{t Laplacian} f||_inf`.
/// `order = +1`: `sup_t t^{-1/2} ||(e^{t Laplacian} - 1) f||_inf`.
/// Neither is asserted to equal a Besov norm.
pub fn caloric_besov_proxy(f: &ScalarField, order: i32, cfg: &CaloricConfig) -> Result<NormReport> {
    if order != -1 && order != 1 {
        return Err(Error::UnsupportedOrder(order));
    }
    cfg.validate()?;
    let far = default_far(f);
    let mut best = (0.0f64, 0.0);
    for t in cfg.ladder() {
        let e = HeatOperator::new(f.grid(), t, 1.0, f.parity()).apply(f.values(), far);
        let v = if order == -1 {
            libm::sqrt(t) * crate::grid::max_abs(&e)
        } else {
            crate::grid::sup_distance(&e, f.values()) / libm::sqrt(t)
        };
        if v > best.0 {
            best = (v, t);
        }
    }
    let name = if order == -1 {
        "caloric_besov_minus1"
    } else {
        "caloric_besov_plus1"
    };
    let mut report = NormReport::new(name, best.0).with("sup_time", best.1);
    report.config = Some(*cfg);
    Ok(report)
}
