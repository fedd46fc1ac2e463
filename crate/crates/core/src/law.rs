//! The gamma-law pressure `P(rho) = a rho^gamma` and the quantities derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LawSpec", into = "LawSpec")]
pub struct PressureLaw {
    a: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
struct LawSpec {
    a: f64,
    gamma: f64,
}

impl TryFrom<LawSpec> for PressureLaw {
    type Error = Error;
    fn try_from(s: LawSpec) -> Result<Self> {
        if s.a == 0.0 {
            PressureLaw::pressureless(s.gamma)
        } else {
            PressureLaw::new(s.a, s.gamma)
        }
    }
}

impl From<PressureLaw> for LawSpec {
    fn from(l: PressureLaw) -> Self {
        LawSpec { a: l.a, gamma: l.gamma }
    }
}

impl PressureLaw {
    /// Requires `a > 0` and `gamma >= 1`.
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidLaw("a must be positive"));
        }
        Self::with_coefficient(a, gamma)
    }

    /// Pressureless fluid (`a = 0`), used to isolate the parabolic part of the dynamics.
    pub fn pressureless(gamma: f64) -> Result<Self> {
        Self::with_coefficient(0.0, gamma)
    }

    fn with_coefficient(a: f64, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidLaw("gamma must be at least 1"));
        }
        Ok(PressureLaw { a, gamma })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    #[inline]
    fn pow(&self, rho: f64, e: f64) -> f64 {
        if e == 0.0 {
            1.0
        } else if e == 1.0 {
            rho
        } else {
            libm::pow(rho, e)
        }
    }

    #[inline]
    pub fn p(&self, rho: f64) -> f64 {
        self.a * self.pow(rho, self.gamma)
    }

    #[inline]
    pub fn dp(&self, rho: f64) -> f64 {
        self.a * self.gamma * self.pow(rho, self.gamma - 1.0)
    }

    /// Enthalpy `F` with `F'(rho) = P'(rho) / rho`.
    #[inline]
    pub fn enthalpy(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            self.a * libm::log(rho)
        } else {
            self.a * self.gamma / (self.gamma - 1.0) * self.pow(rho, self.gamma - 1.0)
        }
    }

    /// Potential energy density `Pi(rho) - Pi(1)` relative to the far state.
    #[inline]
    pub fn potential(&self, rho: f64) -> f64 {
        if self.is_isothermal() {
            self.a * (rho * libm::log(rho) + 1.0 - rho)
        } else if self.gamma == 2.0 {
            self.a * (rho - 1.0) * (rho - 1.0)
        } else {
            let g = self.gamma;
            self.a / (g - 1.0) * (self.pow(rho, g) - 1.0 - g * (rho - 1.0))
        }
    }

    /// Relaxation rate `a gamma rho^(gamma-1) / (2 mu)` of the damped transport of `v`.
    #[inline]
    pub fn relaxation_rate(&self, rho: f64, mu: f64) -> f64 {
        self.dp(rho) / (2.0 * mu)
    }
}

fn check_positive(rho: &ScalarField) -> Result<()> {
    if let Some((node, &value)) = rho.values().iter().enumerate().find(|(_, &r)| r <= 0.0) {
        return Err(Error::DensityFloor {
            node,
            value,
            floor: 0.0,
        });
    }
    Ok(())
}

fn nodewise(rho: &ScalarField, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
    check_positive(rho)?;
    Ok(rho.map(f))
}

pub fn pressure(rho: &ScalarField, law: &PressureLaw) -> Result<ScalarField> {
    nodewise(rho, |r| law.p(r))
}

pub fn pressure_derivative(rho: &ScalarField, law: &PressureLaw) -> Result<ScalarField> {
    nodewise(rho, |r| law.dp(r))
}

pub fn enthalpy(rho: &ScalarField, law: &PressureLaw) -> Result<ScalarField> {
    nodewise(rho, |r| law.enthalpy(r))
}

/// `Pi(rho) - Pi(1)` nodewise.
pub fn pressure_potential(rho: &ScalarField, law: &PressureLaw) -> Result<ScalarField> {
    nodewise(rho, |r| law.potential(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::ops::{gradient_1d, sup_error};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn field(c: f64) -> ScalarField {
        ScalarField::constant(Grid::periodic(8, 0.0, 1.0).unwrap(), c)
    }

    /// `s (int_1^s P(z)/z^2 dz - P(1))` by composite Simpson, minus its value at 1.
    fn potential_by_quadrature(law: &PressureLaw, s: f64) -> f64 {
        let m = 20_000;
        let h = (s - 1.0) / m as f64;
        let f = |z: f64| law.p(z) / (z * z);
        let mut acc = f(1.0) + f(s);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(1.0 + k as f64 * h);
        }
        let integral = acc * h / 3.0;
        let pi = |x: f64, int: f64| x * (int - law.p(1.0));
        pi(s, integral) - pi(1.0, 0.0)
    }

    #[test]
    fn pressure_examples() {
        let l = PressureLaw::new(1.0, 2.0).unwrap();
        assert_eq!(pressure(&field(1.0), &l).unwrap().values()[0], 1.0);
        assert_eq!(pressure_derivative(&field(1.0), &l).unwrap().values()[0], 2.0);
        let l = PressureLaw::new(1.0, 1.0).unwrap();
        assert_eq!(pressure(&field(2.0), &l).unwrap().values()[0], 2.0);
        assert_eq!(pressure_derivative(&field(2.0), &l).unwrap().values()[0], 1.0);
        let l = PressureLaw::new(0.5, 2.0).unwrap();
        assert!((pressure(&field(3.0), &l).unwrap().values()[0] - 4.5).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_density_is_rejected() {
        let l = PressureLaw::new(1.0, 2.0).unwrap();
        assert!(matches!(
            pressure(&field(0.0), &l),
            Err(Error::DensityFloor { node: 0, .. })
        ));
        assert!(enthalpy(&field(-1.0), &l).is_err());
    }

    #[test]
    fn invalid_laws_are_rejected() {
        assert!(PressureLaw::new(0.0, 2.0).is_err());
        assert!(PressureLaw::new(1.0, 0.5).is_err());
        assert!(PressureLaw::pressureless(1.0).is_ok());
    }

    #[test]
    fn enthalpy_examples() {
        let iso = PressureLaw::new(1.0, 1.0).unwrap();
        assert_eq!(enthalpy(&field(1.0), &iso).unwrap().values()[0], 0.0);
        let l = PressureLaw::new(1.0, 2.0).unwrap();
        assert!((enthalpy(&field(2.0), &l).unwrap().values()[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn enthalpy_gradient_matches_pressure_gradient_over_density() {
        for gamma in [1.0, 1.4, 2.0, 3.0] {
            let law = PressureLaw::new(0.7, gamma).unwrap();
            let errs: alloc::vec::Vec<f64> = [128, 256, 512]
                .iter()
                .map(|&n| {
                    let g = Grid::periodic(n, 0.0, 2.0 * PI).unwrap();
                    let rho = ScalarField::from_fn(g, |x| 1.5 + 0.5 * libm::sin(x));
                    let df = gradient_1d(&enthalpy(&rho, &law).unwrap()).unwrap();
                    let drho = gradient_1d(&rho).unwrap();
                    let rhs: alloc::vec::Vec<f64> = rho
                        .values()
                        .iter()
                        .zip(drho.values())
                        .map(|(&r, &d)| law.dp(r) / r * d)
                        .collect();
                    sup_error(df.values(), &rhs)
                })
                .collect();
            assert!(errs[2] < 1e-4, "gamma {gamma}: {errs:?}");
            // F is linear in rho for gamma = 2, so the identity is exact there
            assert!(errs[2] < 1e-12 || errs[1] / errs[2] > 3.5, "gamma {gamma}: {errs:?}");
        }
    }

    #[test]
    fn potential_examples() {
        for gamma in [1.0, 1.5, 2.0, 3.0] {
            let l = PressureLaw::new(1.3, gamma).unwrap();
            assert_eq!(pressure_potential(&field(1.0), &l).unwrap().values()[0], 0.0);
        }
        let l = PressureLaw::new(1.0, 2.0).unwrap();
        assert!((l.potential(3.0) - 4.0).abs() < 1e-14);
        assert!((potential_by_quadrature(&l, 3.0) - 4.0).abs() < 1e-9);
        let iso = PressureLaw::new(1.0, 1.0).unwrap();
        let expected = 2.0 * core::f64::consts::LN_2 - 1.0;
        assert!((iso.potential(2.0) - expected).abs() < 1e-15);
        assert!((iso.potential(2.0) - 0.386_294).abs() < 1e-6);
    }

    #[test]
    fn closed_form_potential_matches_definition() {
        for gamma in [1.0, 1.4, 2.0, 2.5] {
            let l = PressureLaw::new(0.8, gamma).unwrap();
            for s in [0.5, 2.0, 5.0] {
                let q = potential_by_quadrature(&l, s);
                assert!(
                    (l.potential(s) - q).abs() < 1e-9 * (1.0 + q.abs()),
                    "gamma {gamma} s {s}"
                );
            }
        }
    }

    #[test]
    fn potential_vanishes_only_at_far_state_on_samples() {
        for gamma in [1.0, 1.4, 2.0, 3.0] {
            let l = PressureLaw::new(1.0, gamma).unwrap();
            for s in [0.5, 1.0, 2.0, 5.0] {
                let p = l.potential(s);
                if s == 1.0 {
                    assert_eq!(p, 0.0);
                } else {
                    assert!(p > 0.0);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn potential_is_nonnegative(rho in 1e-3f64..50.0, gamma in 1.0f64..4.0, a in 0.01f64..10.0) {
            let l = PressureLaw::new(a, gamma).unwrap();
            prop_assert!(l.potential(rho) >= -1e-12 * a * (1.0 + rho.powf(gamma)));
        }
    }
}
