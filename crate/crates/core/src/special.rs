//! Exponentially scaled modified Bessel functions `e^{-z} I_0(z)` and `e^{-z} I_1(z)`, `z >= 0`.

const SERIES_LIMIT: f64 = 20.0;

pub(crate) fn ie0(z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        series(z, 0) * libm::exp(-z)
    } else {
        asymptotic(z, 0.0)
    }
}

pub(crate) fn ie1(z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        series(z, 1) * libm::exp(-z)
    } else {
        asymptotic(z, 1.0)
    }
}

fn series(z: f64, order: u32) -> f64 {
    let q = 0.25 * z * z;
    let mut term = if order == 0 { 1.0 } else { 0.5 * z };
    let mut sum = term;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * (k + order as f64));
        sum += term;
        k += 1.0;
    }
    sum
}

fn asymptotic(z: f64, nu: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / libm::sqrt(2.0 * core::f64::consts::PI * z)
}
