//! Discrete differential operators on line and radial grids.
//!
//! All stencils are second order. At far-field edges the pure operators use
//! one-sided closures (first derivatives) or cubic ghost extrapolation
//! (second derivatives) so that they do not depend on which far state a
//! field has; the solvers assemble their own boundary rows with the far
//! state instead.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{max_abs, Boundary, Grid, GridKind, Parity, ScalarField};

/// Relative size below which a radial vector component counts as vanishing on the axis.
pub const AXIS_TOLERANCE: f64 = 1e-8;

/// Central-difference derivative of a line field.
pub fn gradient_1d(f: &ScalarField) -> Result<ScalarField> {
    f.grid().require_line()?;
    Ok(gradient(f))
}

/// Radial derivative `d_r f` of a field on a radial grid (parity flips).
pub fn gradient_radial(f: &ScalarField) -> Result<ScalarField> {
    f.grid().require_radial()?;
    Ok(gradient(f))
}

/// `d_x f` or `d_r f`, whichever the grid calls for.
pub fn gradient(f: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; f.len()];
    grad_raw(f.grid(), f.parity(), f.values(), &mut out);
    ScalarField::from_raw(*f.grid(), out, f.parity().flip())
}

pub(crate) fn grad_raw(grid: &Grid, parity: Parity, f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let h = grid.h();
    let inv2h = 0.5 / h;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) * inv2h;
    }
    match (grid.kind(), grid.boundary()) {
        (GridKind::Line, Boundary::Periodic) => {
            out[0] = (f[1] - f[n - 1]) * inv2h;
            out[n - 1] = (f[0] - f[n - 2]) * inv2h;
        }
        (GridKind::Line, Boundary::Farfield) => {
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
            out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
        }
        (GridKind::Radial, _) => {
            out[0] = match parity {
                Parity::Even => 0.0,
                // f(-h) = -f(h)
                Parity::Odd => f[1] / h,
            };
            out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
        }
    }
}

/// Cubic extrapolation of the ghost value one node past the end `f[n-1]`.
#[inline]
fn outer_ghost(f: &[f64]) -> f64 {
    let n = f.len();
    4.0 * f[n - 1] - 6.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]
}

#[inline]
fn inner_ghost(f: &[f64]) -> f64 {
    4.0 * f[0] - 6.0 * f[1] + 4.0 * f[2] - f[3]
}

pub(crate) fn check_axis(f: &[f64]) -> Result<()> {
    let scale = max_abs(f);
    if f[0].abs() > AXIS_TOLERANCE * scale {
        return Err(Error::AxisValue { value: f[0] });
    }
    Ok(())
}

/// `(r_{i+1/2}^N - r_{i-1/2}^N) / N` for a full cell around node `i`.
#[inline]
pub(crate) fn full_cell(grid: &Grid, i: usize) -> f64 {
    let pow = |r: f64| if grid.dim() == 2 { r * r } else { r * r * r };
    let inner = if i == 0 { 0.0 } else { grid.face_radius(i - 1) };
    (pow(grid.face_radius(i)) - pow(inner)) / f64::from(grid.dim())
}

/// Divergence of the radial vector field `f(r) e_r`: `r^{1-N} d_r (r^{N-1} f)`.
///
/// Finite-volume form with arithmetic face averages; the axis value is the
/// symmetric limit `N d_r f(0)`.
pub fn divergence_radial(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    grid.require_radial()?;
    check_axis(f.values())?;
    let mut out = vec![0.0; f.len()];
    div_radial_raw(grid, f.values(), None, &mut out);
    Ok(ScalarField::from_raw(*grid, out, Parity::Even))
}

/// Shared kernel. `far` = `Some(value)` closes the outer face with a far
/// ghost, `None` extrapolates linearly.
pub(crate) fn div_radial_raw(grid: &Grid, f: &[f64], far: Option<f64>, out: &mut [f64]) {
    let n = f.len();
    let mut flux_in = 0.0;
    for i in 0..n {
        let right = if i + 1 < n {
            0.5 * (f[i] + f[i + 1])
        } else {
            match far {
                Some(g) => 0.5 * (f[i] + g),
                None => 0.5 * (3.0 * f[i] - f[i - 1]),
            }
        };
        let flux_out = grid.metric(grid.face_radius(i)) * right;
        out[i] = (flux_out - flux_in) / full_cell(grid, i);
        flux_in = flux_out;
    }
}

/// Scalar Laplacian `d_rr f + (N-1)/r d_r f` of an even radial field.
///
/// Conservative form; at the axis it reduces to `N d_rr f(0)`.
pub fn laplacian_radial_scalar(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    grid.require_radial()?;
    let mut out = vec![0.0; f.len()];
    let ghost = outer_ghost(f.values());
    lap_radial_raw(grid, f.values(), ghost, &mut out);
    Ok(ScalarField::from_raw(*grid, out, Parity::Even))
}

pub(crate) fn lap_radial_raw(grid: &Grid, f: &[f64], ghost: f64, out: &mut [f64]) {
    let n = f.len();
    let h = grid.h();
    let mut flux_in = 0.0;
    for i in 0..n {
        let next = if i + 1 < n { f[i + 1] } else { ghost };
        let flux_out = grid.metric(grid.face_radius(i)) * (next - f[i]) / h;
        out[i] = (flux_out - flux_in) / full_cell(grid, i);
        flux_in = flux_out;
    }
}

/// Laplacian of a line field (periodic wrap or cubic ghosts).
pub fn laplacian_1d(f: &ScalarField) -> Result<ScalarField> {
    let grid = f.grid();
    grid.require_line()?;
    let v = f.values();
    let n = v.len();
    let (left, right) = match grid.boundary() {
        Boundary::Periodic => (v[n - 1], v[0]),
        Boundary::Farfield => (inner_ghost(v), outer_ghost(v)),
    };
    let inv = 1.0 / (grid.h() * grid.h());
    let out = (0..n)
        .map(|i| {
            let l = if i == 0 { left } else { v[i - 1] };
            let r = if i + 1 == n { right } else { v[i + 1] };
            (l - 2.0 * v[i] + r) * inv
        })
        .collect();
    Ok(ScalarField::from_raw(*grid, out, Parity::Even))
}

/// Radial component of the vector Laplacian of `u1(r) e_r`:
/// `d_rr u1 + (N-1)/r d_r u1 - (N-1)/r^2 u1`. Zero on the axis.
pub fn laplacian_radial_vector(u1: &ScalarField) -> Result<ScalarField> {
    let grid = u1.grid();
    grid.require_radial()?;
    let u = u1.values();
    check_axis(u)?;
    let n = u.len();
    let h = grid.h();
    let k = f64::from(grid.dim()) - 1.0;
    let ghost = outer_ghost(u);
    let mut out = vec![0.0; n];
    for i in 1..n {
        let r = grid.coord(i);
        let next = if i + 1 < n { u[i + 1] } else { ghost };
        let d2 = (next - 2.0 * u[i] + u[i - 1]) / (h * h);
        let d1 = (next - u[i - 1]) / (2.0 * h);
        out[i] = d2 + k * d1 / r - k * u[i] / (r * r);
    }
    Ok(ScalarField::from_raw(*grid, out, Parity::Odd))
}

/// Viscous term `2 div(mu rho D(u))` for `mu(rho) = mu rho`, returned as its
/// `x` (line) or `e_r` (radial) component.
///
/// Line: `2 mu d_x(rho d_x u)`. Radial, for `u = u1 e_r` irrotational:
/// `2 mu [r^{1-N} d_r(r^{N-1} rho d_r u1) - (N-1) rho u1 / r^2]`.
pub fn weighted_div_grad(rho: &ScalarField, u1: &ScalarField, mu: f64) -> Result<ScalarField> {
    let grid = rho.grid();
    if grid != u1.grid() {
        return Err(Error::GridMismatch { expected: "matching" });
    }
    let r = rho.values();
    let u = u1.values();
    let n = u.len();
    let h = grid.h();
    let mut out = vec![0.0; n];
    match grid.kind() {
        GridKind::Line => {
            let (rl, rr, ul, ur) = match grid.boundary() {
                Boundary::Periodic => (r[n - 1], r[0], u[n - 1], u[0]),
                Boundary::Farfield => (
                    2.0 * r[0] - r[1],
                    2.0 * r[n - 1] - r[n - 2],
                    inner_ghost(u),
                    outer_ghost(u),
                ),
            };
            let face_flux = |i: isize| -> f64 {
                // flux through face i + 1/2, i in -1..n
                let (ra, rb, ua, ub) = if i < 0 {
                    (rl, r[0], ul, u[0])
                } else if i as usize + 1 == n {
                    (r[n - 1], rr, u[n - 1], ur)
                } else {
                    let i = i as usize;
                    (r[i], r[i + 1], u[i], u[i + 1])
                };
                0.5 * (ra + rb) * (ub - ua) / h
            };
            for (i, o) in out.iter_mut().enumerate() {
                let i = i as isize;
                *o = 2.0 * mu * (face_flux(i) - face_flux(i - 1)) / h;
            }
        }
        GridKind::Radial => {
            check_axis(u)?;
            let k = f64::from(grid.dim()) - 1.0;
            let rg = 2.0 * r[n - 1] - r[n - 2];
            let ug = outer_ghost(u);
            let flux = |i: usize| -> f64 {
                let (ra, rb, ua, ub) = if i + 1 < n {
                    (r[i], r[i + 1], u[i], u[i + 1])
                } else {
                    (r[i], rg, u[i], ug)
                };
                grid.metric(grid.face_radius(i)) * 0.5 * (ra + rb) * (ub - ua) / h
            };
            for i in 1..n {
                let ri = grid.coord(i);
                let conservative = (flux(i) - flux(i - 1)) / (grid.metric(ri) * h);
                out[i] = 2.0 * mu * (conservative - k * r[i] * u[i] / (ri * ri));
            }
        }
    }
    Ok(ScalarField::from_raw(*grid, out, Parity::Odd))
}

/// `max_i |a_i - b_i|` over two value slices, used by refinement studies.
pub fn sup_error(computed: &[f64], exact: &[f64]) -> f64 {
    crate::grid::sup_distance(computed, exact)
}

/// Observed orders `log2(e_k / e_{k+1})` of a halving sequence of errors.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| libm::log2(w[0] / w[1])).collect()
}
