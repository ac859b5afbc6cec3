//! Bessel functions of the first kind (orders 0 and 1) and the kernels built
//! on them.
//!
//! Both functions use the ascending power series for `|z| <= 12` and the
//! Hankel asymptotic expansion, truncated at its smallest term, beyond.
//! Absolute accuracy is better than 1e-10 on `|z| <= 100`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scene::{DirectionSet, Point2};

const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(z: f64) -> f64 {
    let a = z.abs();
    if a <= SERIES_LIMIT {
        series(a, 0)
    } else {
        hankel_asymptotic(a, 0)
    }
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(z: f64) -> f64 {
    let a = z.abs();
    let v = if a <= SERIES_LIMIT {
        series(a, 1)
    } else {
        hankel_asymptotic(a, 1)
    };
    if z < 0.0 {
        -v
    } else {
        v
    }
}

/// `J_order(z)` for `z >= 0` from `(z/2)^n Σ (-z²/4)^k / (k! (k+n)!)`.
fn series(z: f64, order: u32) -> f64 {
    let q = -0.25 * z * z;
    let mut term = if order == 0 { 1.0 } else { 0.5 * z };
    let mut sum = term;
    let n = order as f64;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + n));
        sum += term;
        if kf > 0.5 * z && term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Hankel expansion `sqrt(2/(πz)) (P cos χ − Q sin χ)`, `χ = z − (n/2 + 1/4)π`.
fn hankel_asymptotic(z: f64, order: u32) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    // a_k = Π_{j=1..k} (mu − (2j−1)²) / (k! (8z)^k), alternating into P (even k) and Q (odd k).
    let mut term = 1.0_f64;
    let mut prev = f64::INFINITY;
    for k in 1..100 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * (mu - odd * odd) / (kf * 8.0 * z);
        if next.abs() >= prev.abs() || next == 0.0 {
            break;
        }
        // Signs: P = a0 − a2 + a4 − …, Q = a1 − a3 + …
        match k % 4 {
            0 => p += next,
            1 => q += next,
            2 => p -= next,
            _ => q -= next,
        }
        prev = next;
        term = next;
        if next.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - (order as f64 * 0.5 * PI + FRAC_PI_4);
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Average of the plane-wave phases `exp(iω θ·y)` over the direction set.
///
/// As `N` grows this tends to `J0(ω|y|)`.
pub fn circle_sum(y: Point2, omega: f64, dirs: &DirectionSet) -> Complex64 {
    let n = dirs.len() as f64;
    let total: Complex64 = dirs
        .as_slice()
        .iter()
        .map(|d| Complex64::from_polar(1.0, omega * d.dot(y)))
        .sum();
    total / n
}

/// Composite Simpson evaluation of `∫_{ω1}^{ωK} ω J0(ω r)² dω`.
///
/// Serves as an independent check on the closed-form point spread function.
pub fn quadrature_oracle_psf(r: f64, omega1: f64, omega_k: f64, panels: usize) -> Result<f64> {
    if panels < 2 || !panels.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Simpson rule needs an even panel count >= 2 (got {panels})"
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::invalid("radius must be >= 0"));
    }
    if !(omega1 > 0.0 && omega1 <= omega_k) {
        return Err(Error::invalid(
            "frequency band requires 0 < omega1 <= omegaK",
        ));
    }
    if omega1 == omega_k {
        return Ok(0.0);
    }
    let h = (omega_k - omega1) / panels as f64;
    let f = |w: f64| {
        let j = bessel_j0(w * r);
        w * j * j
    };
    let mut acc = f(omega1) + f(omega_k);
    for i in 1..panels {
        let w = omega1 + h * i as f64;
        acc += if i % 2 == 1 { 4.0 * f(w) } else { 2.0 * f(w) };
    }
    Ok(acc * h / 3.0)
}
