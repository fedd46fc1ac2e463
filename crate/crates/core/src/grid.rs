//! Uniform node-centred grids and the scalar fields that live on them.
//!
//! Three layouts are supported:
//!
//! * periodic line: `n` nodes `x_i = x_min + i h`, the node at `x_max` is identified with `x_min`;
//! * far-field line: `n + 1` nodes including both ends, ghosts beyond the ends carry the far state;
//! * radial: `n + 1` nodes `r_i = i h` on `[0, R]` in dimension 2 or 3, symmetric at `r = 0`
//!   and clamped to the far state beyond `R`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Far state the fluid relaxes to at infinity: `(rho, u, v) = (1, 0, 0)`.
pub const FAR_DENSITY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Farfield,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Line,
    Radial,
}

/// Behaviour of a radial field under `x -> -x`.
///
/// Densities and other scalars are even; the radial components of vector
/// fields (`u`, `v`, `m`) are odd and vanish on the axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Serialized form of a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Line {
        n_cells: usize,
        x_min: f64,
        x_max: f64,
        boundary: Boundary,
    },
    Radial {
        n_cells: usize,
        r_max: f64,
        dim: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    kind: GridKind,
    n_cells: usize,
    lo: f64,
    hi: f64,
    dim: u8,
    boundary: Boundary,
    h: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        match s {
            GridSpec::Line {
                n_cells,
                x_min,
                x_max,
                boundary,
            } => Grid::line(n_cells, x_min, x_max, boundary),
            GridSpec::Radial { n_cells, r_max, dim } => Grid::radial(n_cells, r_max, dim),
        }
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        match g.kind {
            GridKind::Line => GridSpec::Line {
                n_cells: g.n_cells,
                x_min: g.lo,
                x_max: g.hi,
                boundary: g.boundary,
            },
            GridKind::Radial => GridSpec::Radial {
                n_cells: g.n_cells,
                r_max: g.hi,
                dim: g.dim,
            },
        }
    }
}

/// Smallest number of cells any stencil in the crate can work with.
const MIN_CELLS: usize = 4;

impl Grid {
    pub fn line(n_cells: usize, x_min: f64, x_max: f64, boundary: Boundary) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidGrid("at least 4 cells are required"));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid("line grid needs finite x_min < x_max"));
        }
        Ok(Grid {
            kind: GridKind::Line,
            n_cells,
            lo: x_min,
            hi: x_max,
            dim: 1,
            boundary,
            h: (x_max - x_min) / n_cells as f64,
        })
    }

    pub fn periodic(n_cells: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::line(n_cells, x_min, x_max, Boundary::Periodic)
    }

    pub fn radial(n_cells: usize, r_max: f64, dim: u8) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidGrid("at least 4 cells are required"));
        }
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid("radial grids need dimension 2 or 3"));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid("radial grid needs a finite r_max > 0"));
        }
        Ok(Grid {
            kind: GridKind::Radial,
            n_cells,
            lo: 0.0,
            hi: r_max,
            dim,
            boundary: Boundary::Farfield,
            h: r_max / n_cells as f64,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_radial(&self) -> bool {
        self.kind == GridKind::Radial
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Spatial dimension `N`.
    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Lower end of the domain (`0` for radial grids).
    pub fn lower(&self) -> f64 {
        self.lo
    }

    /// Upper end of the domain (`R` for radial grids).
    pub fn upper(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn node_count(&self) -> usize {
        if self.is_periodic() {
            self.n_cells
        } else {
            self.n_cells + 1
        }
    }

    /// Coordinate of node `i` (`x_i` or `r_i`).
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.coord(i)).collect()
    }

    /// Same geometry with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let n = self.n_cells * factor;
        match self.kind {
            GridKind::Line => Grid::line(n, self.lo, self.hi, self.boundary),
            GridKind::Radial => Grid::radial(n, self.hi, self.dim),
        }
    }

    /// Area of the unit sphere in `R^N` (`2` for `N = 1`: the two end points).
    pub fn sphere_area(&self) -> f64 {
        match self.dim {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        }
    }

    /// Radius of face `i + 1/2` on a radial grid.
    #[inline]
    pub(crate) fn face_radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    /// `r^(N-1)`.
    #[inline]
    pub(crate) fn metric(&self, r: f64) -> f64 {
        if self.dim == 2 {
            r
        } else {
            r * r
        }
    }

    /// Reduced control volume `(r_{i+1/2}^N - r_{i-1/2}^N) / N`, with `r_{-1/2} = 0`.
    ///
    /// The outer node owns a half cell.
    pub(crate) fn reduced_volume(&self, i: usize) -> f64 {
        let n = f64::from(self.dim);
        let pow = |r: f64| if self.dim == 2 { r * r } else { r * r * r };
        let outer = if i == self.n_cells {
            self.hi
        } else {
            self.face_radius(i)
        };
        let inner = if i == 0 { 0.0 } else { self.face_radius(i - 1) };
        (pow(outer) - pow(inner)) / n
    }

    /// Quadrature weights for `integral f dx` over the domain.
    ///
    /// Periodic lines use the rectangle rule, far-field lines the trapezoid
    /// rule, and radial grids `omega_N` times the reduced control volumes.
    pub fn weights(&self) -> Vec<f64> {
        let count = self.node_count();
        match (self.kind, self.boundary) {
            (GridKind::Line, Boundary::Periodic) => alloc::vec![self.h; count],
            (GridKind::Line, Boundary::Farfield) => {
                let mut w = alloc::vec![self.h; count];
                w[0] *= 0.5;
                w[count - 1] *= 0.5;
                w
            }
            (GridKind::Radial, _) => {
                let omega = self.sphere_area();
                (0..count).map(|i| omega * self.reduced_volume(i)).collect()
            }
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.node_count() {
            return Err(Error::FieldLength {
                expected: self.node_count(),
                got: len,
            });
        }
        Ok(())
    }

    pub(crate) fn require_line(&self) -> Result<()> {
        if self.kind != GridKind::Line {
            return Err(Error::GridMismatch { expected: "line" });
        }
        Ok(())
    }

    pub(crate) fn require_radial(&self) -> Result<()> {
        if self.kind != GridKind::Radial {
            return Err(Error::GridMismatch { expected: "radial" });
        }
        Ok(())
    }
}

/// Nodal samples of one quantity on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    parity: Parity,
}

impl ScalarField {
    /// An even (scalar) field. Fails on a length mismatch or non-finite values.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::with_parity(grid, values, Parity::Even)
    }

    /// The radial component of a radially symmetric vector field.
    pub fn odd(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::with_parity(grid, values, Parity::Odd)
    }

    pub fn with_parity(grid: Grid, values: Vec<f64>, parity: Parity) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(ScalarField { grid, values, parity })
    }

    /// Internal constructor for values produced by the crate's own kernels.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>, parity: Parity) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        ScalarField { grid, values, parity }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|i| f(grid.coord(i))).collect();
        Self::from_raw(grid, values, Parity::Even)
    }

    pub fn odd_from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|i| f(grid.coord(i))).collect();
        Self::from_raw(grid, values, Parity::Odd)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_raw(grid, alloc::vec![c; grid.node_count()], Parity::Even)
    }

    pub fn zeros_like(&self) -> Self {
        Self::from_raw(self.grid, alloc::vec![0.0; self.values.len()], self.parity)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `integral f dx` with the grid's quadrature weights.
    pub fn integral(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, f)| w * f).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&x| f(x)).collect(), self.parity)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.map(|x| lambda * x)
    }

    /// `max_i |self_i - other_i|`.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        sup_distance(&self.values, &other.values)
    }

    /// Value at an arbitrary coordinate by linear interpolation between nodes.
    ///
    /// Periodic grids wrap; radial odd fields reflect through the axis; points
    /// outside a far-field domain take `far`.
    pub fn interpolate(&self, x: f64, far: f64) -> f64 {
        interpolate(&self.grid, &self.values, self.parity, x, far)
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn interpolate(grid: &Grid, values: &[f64], parity: Parity, x: f64, far: f64) -> f64 {
    let h = grid.h();
    match (grid.kind(), grid.boundary()) {
        (GridKind::Line, Boundary::Periodic) => {
            let n = values.len();
            let s = (x - grid.lower()) / h;
            let base = libm::floor(s);
            let frac = s - base;
            let i = (base as i64).rem_euclid(n as i64) as usize;
            let j = (i + 1) % n;
            values[i] * (1.0 - frac) + values[j] * frac
        }
        (GridKind::Line, Boundary::Farfield) => {
            let s = (x - grid.lower()) / h;
            node_lerp(values, s, far)
        }
        (GridKind::Radial, _) => {
            let (r, sign) = if x < 0.0 {
                match parity {
                    Parity::Even => (-x, 1.0),
                    Parity::Odd => (-x, -1.0),
                }
            } else {
                (x, 1.0)
            };
            sign * node_lerp(values, r / h, far)
        }
    }
}

/// Linear interpolation at fractional node index `s`, with `far` outside `[0, n-1]`.
fn node_lerp(values: &[f64], s: f64, far: f64) -> f64 {
    let last = values.len() - 1;
    if s < 0.0 {
        // one ghost cell of linear blending, then the far value
        return if s > -1.0 { values[0] * (1.0 + s) - far * s } else { far };
    }
    let base = libm::floor(s);
    let i = base as usize;
    if i >= last {
        let frac = s - last as f64;
        return if frac < 1.0 {
            values[last] * (1.0 - frac) + far * frac
        } else {
            far
        };
    }
    let frac = s - base;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}
