//! Banded solves used by the implicit diffusion steps.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
///
/// `a[0]` and `c[n-1]` are ignored. The solution overwrites `d`.
pub(crate) fn solve_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) -> Result<()> {
    let n = d.len();
    debug_assert!(a.len() == n && b.len() == n && c.len() == n);
    let mut cp = vec![0.0; n];
    let mut denom = b[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularSystem);
    }
    cp[0] = c[0] / denom;
    d[0] /= denom;
    for i in 1..n {
        denom = b[i] - a[i] * cp[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularSystem);
        }
        cp[i] = c[i] / denom;
        d[i] = (d[i] - a[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
    Ok(())
}

/// Periodic tridiagonal system: `a[0]` couples row 0 to `x_{n-1}` and
/// `c[n-1]` couples row `n-1` to `x_0`. Sherman-Morrison on top of Thomas.
pub(crate) fn solve_cyclic_tridiagonal(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64]) -> Result<()> {
    let n = d.len();
    let alpha = c[n - 1];
    let beta = a[0];
    if alpha == 0.0 && beta == 0.0 {
        return solve_tridiagonal(a, b, c, d);
    }
    let gamma = -b[0];
    let mut bb: Vec<f64> = b.to_vec();
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;
    solve_tridiagonal(a, &bb, c, d)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    solve_tridiagonal(a, &bb, c, &mut u)?;
    let fact = (d[0] + beta * d[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
    if !fact.is_finite() {
        return Err(Error::SingularSystem);
    }
    for (x, z) in d.iter_mut().zip(&u) {
        *x -= fact * z;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(a: &[f64], b: &[f64], c: &[f64], x: &[f64], cyclic: bool) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    x[i - 1]
                } else if cyclic {
                    x[n - 1]
                } else {
                    0.0
                };
                let right = if i + 1 < n {
                    x[i + 1]
                } else if cyclic {
                    x[0]
                } else {
                    0.0
                };
                a[i] * left + b[i] * x[i] + c[i] * right
            })
            .collect()
    }

    #[test]
    fn thomas_recovers_known_solution() {
        let n = 12;
        let a: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let b = vec![4.0; n];
        let c: Vec<f64> = (0..n).map(|i| -0.5 + 0.01 * i as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut d = apply(&a, &b, &c, &x, false);
        solve_tridiagonal(&a, &b, &c, &mut d).unwrap();
        for (u, v) in d.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn cyclic_recovers_known_solution() {
        let n = 9;
        let a = vec![-1.0; n];
        let b = vec![3.0; n];
        let c = vec![-1.2; n];
        let x: Vec<f64> = (0..n).map(|i| 1.0 + (0.7 * i as f64).cos()).collect();
        let mut d = apply(&a, &b, &c, &x, true);
        solve_cyclic_tridiagonal(&a, &b, &c, &mut d).unwrap();
        for (u, v) in d.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot_is_an_error() {
        let mut d = vec![1.0, 1.0];
        assert_eq!(
            solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &mut d),
            Err(Error::SingularSystem)
        );
    }
}
