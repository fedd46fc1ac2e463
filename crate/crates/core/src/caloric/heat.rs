//! The heat semigroup `e^{kappa t Laplacian}` on every grid layout.
//!
//! Periodic lines use the exact Fourier multiplier. Far-field lines and
//! radial grids convolve `f - far` with the (radial) Gaussian kernel,
//! truncated at eight standard deviations and renormalised on the sampled
//! nodes so that constants (and the odd field `r`) are reproduced exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Boundary, Grid, GridKind, Parity, ScalarField};
use crate::special::{ie0, ie1};

/// Kernel cut-off in standard deviations; the neglected tail is below `e^{-32}`.
const TRUNCATION: f64 = 8.0;

/// Precomputed `e^{kappa t Laplacian}` for one grid, time and parity.
#[derive(Debug, Clone)]
pub(crate) enum HeatOperator {
    Identity,
    Spectral { kappa_t: f64, length: f64 },
    Line { weights: Vec<f64> },
    Radial { rows: Vec<(usize, Vec<f64>)> },
}

impl HeatOperator {
    pub(crate) fn new(grid: &Grid, t: f64, kappa: f64, parity: Parity) -> Self {
        let kt = kappa * t;
        if kt == 0.0 {
            return HeatOperator::Identity;
        }
        if grid.kind() == GridKind::Line && grid.boundary() == Boundary::Periodic {
            return HeatOperator::Spectral {
                kappa_t: kt,
                length: grid.length(),
            };
        }
        let h = grid.h();
        let sigma = libm::sqrt(2.0 * kt);
        if TRUNCATION * sigma < h {
            return HeatOperator::Identity;
        }
        let reach = libm::ceil(TRUNCATION * sigma / h) as usize;
        let tau = 4.0 * kt;
        match grid.kind() {
            GridKind::Line => {
                let raw: Vec<f64> = (0..=2 * reach)
                    .map(|k| {
                        let d = (k as f64 - reach as f64) * h;
                        libm::exp(-d * d / tau)
                    })
                    .collect();
                let total: f64 = raw.iter().sum();
                HeatOperator::Line {
                    weights: raw.iter().map(|w| w / total).collect(),
                }
            }
            GridKind::Radial => {
                let last = grid.node_count() - 1;
                let rows = (0..=last)
                    .map(|i| radial_row(grid, i, reach, tau, parity, last))
                    .collect();
                HeatOperator::Radial { rows }
            }
        }
    }

    /// Applies the operator to nodal values whose far-field limit is `far`.
    pub(crate) fn apply(&self, f: &[f64], far: f64) -> Vec<f64> {
        match self {
            HeatOperator::Identity => f.to_vec(),
            HeatOperator::Spectral { kappa_t, length } => {
                fft::apply_multiplier(f, *length, |k| libm::exp(-kappa_t * k * k))
            }
            HeatOperator::Line { weights } => {
                let n = f.len() as isize;
                let reach = (weights.len() / 2) as isize;
                (0..n)
                    .map(|i| {
                        let lo = (i - reach).max(0);
                        let hi = (i + reach).min(n - 1);
                        let mut acc = 0.0;
                        for j in lo..=hi {
                            acc += weights[(j - i + reach) as usize] * (f[j as usize] - far);
                        }
                        far + acc
                    })
                    .collect()
            }
            HeatOperator::Radial { rows } => rows
                .iter()
                .map(|(start, w)| {
                    let acc: f64 = w.iter().zip(&f[*start..]).map(|(wk, fk)| wk * (fk - far)).sum();
                    far + acc
                })
                .collect(),
        }
    }
}

/// Quadrature weights of row `i` over nodes `start..=min(i + reach, last)`.
///
/// Normalisation runs over the virtual continuation of the grid past `R`.
fn radial_row(grid: &Grid, i: usize, reach: usize, tau: f64, parity: Parity, last: usize) -> (usize, Vec<f64>) {
    let h = grid.h();
    let r = grid.coord(i);
    let start = i.saturating_sub(reach);
    let end = i + reach;
    let dim = grid.dim();
    let mut weights = Vec::with_capacity(end.min(last) + 1 - start);
    let mut total = 0.0;
    for k in start..=end {
        let s = k as f64 * h;
        let mut w = shell_kernel(dim, parity, r, s, tau) * h;
        if k == 0 && dim == 2 && parity == Parity::Even {
            // endpoint correction: the planar shell density is ~ s near the axis
            w = h * h / 12.0 * 2.0 * libm::exp(-r * r / tau) / tau;
        }
        total += match parity {
            Parity::Even => w,
            Parity::Odd => w * s,
        };
        if k <= last {
            weights.push(w);
        }
    }
    let scale = match parity {
        Parity::Even => 1.0 / total,
        Parity::Odd if i == 0 || total == 0.0 => 0.0,
        Parity::Odd => r / total,
    };
    for w in &mut weights {
        *w *= scale;
    }
    (start, weights)
}

/// Heat kernel integrated over the sphere of radius `s`, for a field at radius `r`;
/// `tau = 4 kappa t`. Odd parity projects onto `e_r`.
fn shell_kernel(dim: u8, parity: Parity, r: f64, s: f64, tau: f64) -> f64 {
    let gauss = libm::exp(-(r - s) * (r - s) / tau);
    let z = 2.0 * r * s / tau;
    if dim == 2 {
        let angular = match parity {
            Parity::Even => ie0(z),
            Parity::Odd => ie1(z),
        };
        gauss * 2.0 * PI * s * angular / (PI * tau)
    } else {
        let angular = match parity {
            Parity::Even => {
                if z == 0.0 {
                    2.0
                } else {
                    -libm::expm1(-2.0 * z) / z
                }
            }
            Parity::Odd => {
                if z < 0.1 {
                    let z2 = z * z;
                    2.0 * libm::exp(-z) * z * (1.0 / 3.0 + z2 * (1.0 / 30.0 + z2 * (1.0 / 840.0 + z2 / 45360.0)))
                } else {
                    let e = libm::exp(-2.0 * z);
                    (1.0 + e) / z - (1.0 - e) / (z * z)
                }
            }
        };
        let pref = 1.0 / (PI * tau * libm::sqrt(PI * tau));
        gauss * 2.0 * PI * s * s * angular * pref
    }
}

/// Far-field limit a field is assumed to approach outside the grid.
pub(crate) fn default_far(f: &ScalarField) -> f64 {
    let v = f.values();
    match (f.grid().kind(), f.grid().boundary(), f.parity()) {
        (GridKind::Line, Boundary::Periodic, _) => 0.0,
        (GridKind::Line, Boundary::Farfield, _) => 0.5 * (v[0] + v[v.len() - 1]),
        (GridKind::Radial, _, Parity::Even) => v[v.len() - 1],
        (GridKind::Radial, _, Parity::Odd) => 0.0,
    }
}

fn check_args(t: f64, kappa: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "diffusivity must be positive, got {kappa}"
        )));
    }
    Ok(())
}

/// `e^{kappa t Laplacian} f`, taking the far-field value from the edges of `f`
/// (the edge mean on far-field lines, the outer value for even radial fields,
/// zero for odd radial fields).
pub fn heat_semigroup(f: &ScalarField, t: f64, kappa: f64) -> Result<ScalarField> {
    heat_semigroup_with_far(f, t, kappa, default_far(f))
}

/// `e^{kappa t Laplacian} f` for a field equal to `far` outside the grid.
pub fn heat_semigroup_with_far(f: &ScalarField, t: f64, kappa: f64, far: f64) -> Result<ScalarField> {
    check_args(t, kappa)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let op = HeatOperator::new(f.grid(), t, kappa, f.parity());
    let mut out = op.apply(f.values(), far);
    if f.grid().is_radial() && f.parity() == Parity::Odd {
        out[0] = 0.0;
    }
    Ok(ScalarField::from_raw(*f.grid(), out, f.parity()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::sup_error;
    use proptest::prelude::*;

    fn periodic(n: usize) -> Grid {
        Grid::periodic(n, 0.0, 2.0 * PI).unwrap()
    }

    #[test]
    fn constants_are_invariant() {
        for g in [
            periodic(64),
            Grid::line(64, -3.0, 3.0, Boundary::Farfield).unwrap(),
            Grid::radial(64, 6.0, 2).unwrap(),
            Grid::radial(64, 6.0, 3).unwrap(),
        ] {
            let f = ScalarField::constant(g, 2.5);
            for t in [0.0, 1e-4, 0.1, 3.0] {
                let out = heat_semigroup(&f, t, 0.7).unwrap();
                assert!(out.values().iter().all(|v| (v - 2.5).abs() < 1e-13), "{g:?} t {t}");
            }
        }
    }

    #[test]
    fn negative_time_is_rejected() {
        let f = ScalarField::constant(periodic(16), 1.0);
        assert_eq!(heat_semigroup(&f, -1.0, 1.0), Err(Error::NegativeTime(-1.0)));
    }

    #[test]
    fn fourier_modes_decay_exactly() {
        for n in [256usize, 1024, 96] {
            let g = periodic(n);
            for k in [1.0, 3.0, 7.0] {
                let f = ScalarField::from_fn(g, |x| libm::sin(k * x));
                let t = 0.37;
                let out = heat_semigroup(&f, t, 1.0).unwrap();
                let exact: Vec<f64> = g
                    .coords()
                    .iter()
                    .map(|&x| libm::exp(-k * k * t) * libm::sin(k * x))
                    .collect();
                assert!(sup_error(out.values(), &exact) < 1e-12, "n {n} k {k}");
            }
        }
    }

    fn moments(g: &Grid, v: &[f64]) -> (f64, f64) {
        let xs = g.coords();
        let mass: f64 = v.iter().map(|f| f * g.h()).sum();
        let var: f64 = v.iter().zip(&xs).map(|(f, x)| f * x * x * g.h()).sum::<f64>() / mass;
        (mass, var)
    }

    #[test]
    fn gaussians_spread_with_the_right_variance() {
        let sigma2: f64 = 0.05;
        let kappa = 0.8;
        let t = 0.2;
        for g in [
            Grid::periodic(1024, -8.0, 8.0).unwrap(),
            Grid::line(1024, -8.0, 8.0, Boundary::Farfield).unwrap(),
        ] {
            let f = ScalarField::from_fn(g, |x| libm::exp(-x * x / (2.0 * sigma2)));
            let out = heat_semigroup_with_far(&f, t, kappa, 0.0).unwrap();
            let (m0, _) = moments(&g, f.values());
            let (m1, var) = moments(&g, out.values());
            assert!((m1 - m0).abs() < 1e-10 * m0);
            assert!((var - (sigma2 + 2.0 * kappa * t)).abs() < 1e-6, "{var}");
        }
    }

    #[test]
    fn semigroup_law_on_periodic_grids() {
        let g = periodic(128);
        let f = ScalarField::from_fn(g, |x| libm::exp(libm::cos(x)) + 0.3 * libm::sin(5.0 * x));
        let a = heat_semigroup(&heat_semigroup(&f, 0.1, 1.0).unwrap(), 0.25, 1.0).unwrap();
        let b = heat_semigroup(&f, 0.35, 1.0).unwrap();
        assert!(a.sup_distance(&b) < 1e-10);
    }

    fn radial_gaussian(dim: u8, r: f64, var: f64) -> f64 {
        libm::pow(2.0 * PI * var, -f64::from(dim) / 2.0) * libm::exp(-r * r / (2.0 * var))
    }

    #[test]
    fn radial_gaussians_spread_exactly() {
        for dim in [2u8, 3] {
            let g = Grid::radial(400, 10.0, dim).unwrap();
            let var0 = 0.3;
            let (kappa, t) = (1.0, 0.4);
            let f = ScalarField::from_fn(g, |r| radial_gaussian(dim, r, var0));
            let out = heat_semigroup_with_far(&f, t, kappa, 0.0).unwrap();
            let exact: Vec<f64> = g
                .coords()
                .iter()
                .map(|&r| radial_gaussian(dim, r, var0 + 2.0 * kappa * t))
                .collect();
            let scale = exact[0];
            let err = sup_error(out.values(), &exact);
            assert!(
                err < 1e-6 * scale,
                "dim {dim}: {err} {:?} {:?}",
                &out.values()[..3],
                &exact[..3]
            );
        }
    }

    #[test]
    fn radial_odd_fields_follow_the_vector_heat_flow() {
        // grad of a Gaussian stays the grad of the spread Gaussian
        for dim in [2u8, 3] {
            let g = Grid::radial(400, 10.0, dim).unwrap();
            let var0 = 0.3;
            let (kappa, t) = (0.5, 0.3);
            let grad = |r: f64, var: f64| -r / var * radial_gaussian(dim, r, var);
            let f = ScalarField::odd_from_fn(g, |r| grad(r, var0));
            let out = heat_semigroup(&f, t, kappa).unwrap();
            let exact: Vec<f64> = g.coords().iter().map(|&r| grad(r, var0 + 2.0 * kappa * t)).collect();
            let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(sup_error(out.values(), &exact) < 1e-6 * scale, "dim {dim}");
            assert_eq!(out.values()[0], 0.0);
        }
    }

    #[test]
    fn radial_identity_field_is_preserved() {
        let g = Grid::radial(128, 8.0, 3).unwrap();
        let f = ScalarField::odd_from_fn(g, |r| r);
        let op = HeatOperator::new(&g, 0.02, 1.0, Parity::Odd);
        let out = op.apply(f.values(), 0.0);
        // rows that do not reach past R see the full linear field
        for (i, o) in out.iter().take(60).enumerate() {
            assert!((o - g.coord(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_times_are_the_identity_on_kernel_grids() {
        let g = Grid::radial(32, 4.0, 2).unwrap();
        let f = ScalarField::from_fn(g, libm::cos);
        assert_eq!(heat_semigroup(&f, 1e-9, 1.0).unwrap(), f);
    }

    #[test]
    fn shell_kernel_branches_are_continuous() {
        let tau = 1.0;
        let s = 1.0;
        let r = 0.1 * tau / (2.0 * s);
        let below = shell_kernel(3, Parity::Odd, r * (1.0 - 1e-9), s, tau);
        let above = shell_kernel(3, Parity::Odd, r * (1.0 + 1e-9), s, tau);
        assert!((below - above).abs() < 1e-8 * above.abs());
    }

    proptest! {
        #[test]
        fn periodic_heat_is_max_principled_and_mass_preserving(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 6), t in 0.0f64..2.0,
        ) {
            let g = periodic(64);
            let f = ScalarField::from_fn(g, |x| {
                coeffs.iter().enumerate().map(|(k, c)| c * libm::cos(k as f64 * x + c)).sum()
            });
            let out = heat_semigroup(&f, t, 1.0).unwrap();
            let (lo, hi) = (f.min(), f.max());
            for v in out.values() {
                prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
            }
            prop_assert!((out.integral() - f.integral()).abs() < 1e-10);
        }
    }
}
