//! Initial-data profiles and their mollified regularisations.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, GridKind, Parity, ScalarField};
use crate::ops::check_axis;
use crate::state::{check_floor, AugmentedState};

/// One constant piece `[from, to)` of a piecewise-constant profile; `None` is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    pub value: f64,
}

/// A profile in `x` (line) or `r` (radial).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// Piecewise constant; nodes sitting exactly on a jump take the mean of both sides.
    Shocks {
        pieces: Vec<Piece>,
    },
    /// `offset + amplitude sin(wavenumber x + phase)`.
    Sine {
        offset: f64,
        amplitude: f64,
        wavenumber: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `offset + amplitude exp(-(x - center)^2 / width^2)`.
    Gaussian {
        offset: f64,
        amplitude: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// `amplitude x exp(-x^2 / width^2)`, odd through the origin.
    Ramp {
        amplitude: f64,
        width: f64,
    },
    Sampled {
        values: Vec<f64>,
    },
}

impl Profile {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Shocks { pieces } => piecewise(pieces, x),
            Profile::Sine {
                offset,
                amplitude,
                wavenumber,
                phase,
            } => offset + amplitude * libm::sin(wavenumber * x + phase),
            Profile::Gaussian {
                offset,
                amplitude,
                center,
                width,
            } => {
                let z = (x - center) / width;
                offset + amplitude * libm::exp(-z * z)
            }
            Profile::Ramp { amplitude, width } => {
                let z = x / width;
                amplitude * x * libm::exp(-z * z)
            }
            Profile::Sampled { .. } => unreachable!("sampled profiles have no pointwise form"),
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        match self {
            Profile::Shocks { pieces } => check_cover(pieces, grid),
            Profile::Sampled { values } => grid.check_len(values.len()),
            Profile::Gaussian { width, .. } | Profile::Ramp { width, .. } if !(*width > 0.0) => {
                Err(Error::InvalidConfig("profile width must be positive".to_string()))
            }
            _ => Ok(()),
        }
    }

    /// Nodal samples with the given parity.
    pub fn sample(&self, grid: Grid, parity: Parity) -> Result<ScalarField> {
        self.validate(&grid)?;
        let values = match self {
            Profile::Sampled { values } => values.clone(),
            _ => grid.coords().iter().map(|&x| self.eval(x)).collect(),
        };
        let f = ScalarField::with_parity(grid, values, parity)?;
        if grid.is_radial() && parity == Parity::Odd {
            check_axis(f.values())?;
        }
        Ok(f)
    }
}

fn piecewise(pieces: &[Piece], x: f64) -> f64 {
    let lo = |p: &Piece| p.from.unwrap_or(f64::NEG_INFINITY);
    let hi = |p: &Piece| p.to.unwrap_or(f64::INFINITY);
    for (k, p) in pieces.iter().enumerate() {
        if x == lo(p) && k > 0 {
            return 0.5 * (pieces[k - 1].value + p.value);
        }
        if lo(p) <= x && x < hi(p) {
            return p.value;
        }
    }
    // only reachable at the closed end of a bounded last piece
    pieces.last().map_or(0.0, |p| p.value)
}

fn check_cover(pieces: &[Piece], grid: &Grid) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
    if pieces.is_empty() {
        return bad("shock profile has no pieces");
    }
    let (lo, hi) = (grid.lower(), grid.upper());
    let first = pieces[0].from.unwrap_or(f64::NEG_INFINITY);
    let last = pieces[pieces.len() - 1].to.unwrap_or(f64::INFINITY);
    if first > lo || last < hi {
        return bad("shock pieces do not cover the grid");
    }
    for w in pieces.windows(2) {
        match (w[0].to, w[1].from) {
            (Some(a), Some(b)) if a == b => {}
            _ => return bad("shock pieces must be contiguous and non-overlapping"),
        }
    }
    for p in pieces {
        if let (Some(a), Some(b)) = (p.from, p.to) {
            if !(a < b) {
                return bad("shock piece with empty interval");
            }
        }
        if !p.value.is_finite() {
            return bad("shock piece value must be finite");
        }
    }
    Ok(())
}

/// Which regularisation of rough data to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifyVariant {
    /// `rho^n = phi_n j_n * rho + 1/n`, `m1^n = phi_n j_n * (rho v)`, `v^n = m1^n / rho^n`.
    Lifted,
    /// `rho^n` as in `Lifted`, `v^n = phi_n j_n * v`.
    Velocity,
    /// `rho^n = phi_n j_n * (rho - 1) + 1`, `m1^n` and `v^n` as in `Lifted`.
    FarState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollification {
    pub level: u32,
    pub variant: MollifyVariant,
}

/// Initial density and effective velocity, optionally mollified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub density: Profile,
    pub velocity: Profile,
    #[serde(default)]
    pub mollification: Option<Mollification>,
}

impl InitialDataSpec {
    /// Samples (and mollifies, if configured) the data into a state at `t = 0`.
    pub fn build(&self, grid: Grid, mu: f64) -> Result<AugmentedState> {
        match self.mollification {
            Some(Mollification { level, variant }) => mollify_initial_data(self, grid, mu, level, variant),
            None => {
                let rho = self.density.sample(grid, Parity::Even)?;
                check_floor(rho.values(), f64::MIN_POSITIVE)?;
                let v = self.velocity.sample(grid, Parity::Odd)?;
                AugmentedState::from_density_velocity(0.0, rho, v, mu)
            }
        }
    }
}

/// Builds the regularised state at `t = 0` at level `n`.
pub fn mollify_initial_data(
    data: &InitialDataSpec,
    grid: Grid,
    mu: f64,
    n: u32,
    variant: MollifyVariant,
) -> Result<AugmentedState> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "mollification level must be at least 1".to_string(),
        ));
    }
    let level = f64::from(n);
    let rho0 = data.density.sample(grid, Parity::Even)?;
    check_floor(rho0.values(), f64::MIN_POSITIVE)?;
    let v0 = data.velocity.sample(grid, Parity::Odd)?;
    let mollifier = Mollifier::new(&grid, level);
    let phi: Vec<f64> = grid.coords().iter().map(|&x| cutoff(libm::fabs(x) / level)).collect();
    let smooth = |f: &[f64], parity: Parity| -> Vec<f64> {
        mollifier
            .apply(f, parity)
            .iter()
            .zip(&phi)
            .map(|(c, p)| p * c)
            .collect()
    };

    let rho_vals: Vec<f64> = match variant {
        MollifyVariant::Lifted | MollifyVariant::Velocity => smooth(rho0.values(), Parity::Even)
            .iter()
            .map(|r| r + 1.0 / level)
            .collect(),
        MollifyVariant::FarState => {
            let shifted: Vec<f64> = rho0.values().iter().map(|r| r - 1.0).collect();
            smooth(&shifted, Parity::Even).iter().map(|r| r + 1.0).collect()
        }
    };
    let rho = ScalarField::new(grid, rho_vals)?;
    let mut v_vals: Vec<f64> = match variant {
        MollifyVariant::Velocity => smooth(v0.values(), Parity::Odd),
        _ => {
            let flux: Vec<f64> = rho0.values().iter().zip(v0.values()).map(|(r, v)| r * v).collect();
            smooth(&flux, Parity::Odd)
                .iter()
                .zip(rho.values())
                .map(|(m1, r)| m1 / r)
                .collect()
        }
    };
    if grid.is_radial() {
        v_vals[0] = 0.0;
    }
    let v = ScalarField::odd(grid, v_vals)?;
    AugmentedState::from_density_velocity(0.0, rho, v, mu)
}

/// `exp(-1 / t)` for `t > 0`, zero otherwise.
fn psi(t: f64) -> f64 {
    if t > 0.0 {
        libm::exp(-1.0 / t)
    } else {
        0.0
    }
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, inf)`.
pub(crate) fn cutoff(s: f64) -> f64 {
    let a = psi(2.0 - s);
    let b = psi(s - 1.0);
    a / (a + b)
}

/// Unnormalised standard bump `exp(-1 / (1 - x^2))` on `|x| < 1`.
pub(crate) fn bump(x: f64) -> f64 {
    let q = 1.0 - x * x;
    if q > 0.0 {
        libm::exp(-1.0 / q)
    } else {
        0.0
    }
}

/// Discrete convolution with `j_n`, renormalised so constants (and, for odd
/// radial fields, the identity field `r`) are reproduced exactly.
struct Mollifier {
    grid: Grid,
    /// Per node: `(first neighbour offset, weights)`.
    rows: Vec<(isize, Vec<f64>)>,
    odd_rows: Vec<(isize, Vec<f64>)>,
}

const ANGULAR_PANELS: usize = 64;

impl Mollifier {
    fn new(grid: &Grid, level: f64) -> Self {
        let radius = 1.0 / level;
        let h = grid.h();
        let reach = libm::ceil(radius / h) as isize;
        let count = grid.node_count();
        let mut rows = Vec::with_capacity(count);
        let mut odd_rows = Vec::new();
        match grid.kind() {
            GridKind::Line => {
                let w: Vec<f64> = (-reach..=reach).map(|k| bump(k as f64 * h / radius)).collect();
                let w = normalise(w);
                rows = vec![(-reach, w); count];
            }
            GridKind::Radial => {
                for i in 0..count {
                    let r = grid.coord(i);
                    let lo = (i as isize - reach).max(0);
                    let hi = i as isize + reach;
                    let mut even = Vec::new();
                    let mut odd = Vec::new();
                    let mut first_moment = 0.0;
                    for k in lo..=hi {
                        let s = k as f64 * h;
                        let (a_even, a_odd) = shell(grid.dim(), r, s, radius);
                        let metric = grid.metric(s);
                        even.push(metric * a_even);
                        odd.push(metric * a_odd);
                        first_moment += metric * a_odd * s;
                    }
                    rows.push((lo - i as isize, normalise(even)));
                    let scale = if i == 0 || first_moment == 0.0 {
                        0.0
                    } else {
                        r / first_moment
                    };
                    odd_rows.push((lo - i as isize, odd.iter().map(|w| w * scale).collect()));
                }
            }
        }
        Mollifier {
            grid: *grid,
            rows,
            odd_rows,
        }
    }

    fn apply(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        let n = f.len() as isize;
        let rows = if self.grid.is_radial() && parity == Parity::Odd {
            &self.odd_rows
        } else {
            &self.rows
        };
        let periodic = self.grid.boundary() == Boundary::Periodic && !self.grid.is_radial();
        let fetch = |j: isize| -> f64 {
            if periodic {
                f[j.rem_euclid(n) as usize]
            } else if j < 0 {
                f[0]
            } else if j >= n {
                f[(n - 1) as usize]
            } else {
                f[j as usize]
            }
        };
        rows.iter()
            .enumerate()
            .map(|(i, (off, w))| {
                let start = i as isize + off;
                w.iter().enumerate().map(|(k, wk)| wk * fetch(start + k as isize)).sum()
            })
            .collect()
    }
}

fn normalise(w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Angular integrals of `j(|r e - s w| / eps)` over the unit sphere, plain and
/// weighted by `cos(theta)`.
fn shell(dim: u8, r: f64, s: f64, eps: f64) -> (f64, f64) {
    let area = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
    if r == 0.0 || s == 0.0 {
        return (area * bump(r.max(s) / eps), 0.0);
    }
    let c = ((r * r + s * s - eps * eps) / (2.0 * r * s)).clamp(-1.0, 1.0);
    let theta_max = libm::acos(c);
    if theta_max == 0.0 {
        return (0.0, 0.0);
    }
    let dtheta = theta_max / ANGULAR_PANELS as f64;
    let mut even = 0.0;
    let mut odd = 0.0;
    for k in 0..=ANGULAR_PANELS {
        let th = k as f64 * dtheta;
        let w = if k == 0 || k == ANGULAR_PANELS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let ct = libm::cos(th);
        let d2 = (r * r + s * s - 2.0 * r * s * ct).max(0.0);
        let jac = if dim == 2 { 2.0 } else { 2.0 * PI * libm::sin(th) };
        let val = w * jac * bump(libm::sqrt(d2) / eps);
        even += val;
        odd += val * ct;
    }
    (even * dtheta / 3.0, odd * dtheta / 3.0)
}
