//! Complex log-gamma via upward recursion and the Stirling series.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real part threshold above which the asymptotic series is used directly.
const SHIFT_TO: f64 = 15.0;

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

fn stirling(z: Complex64) -> Complex64 {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + half_ln_2pi + series
}

/// Principal branch of ln Γ(z): analytic off the non-positive real axis and
/// real on the positive real axis.
///
/// For Re z below the Stirling threshold the recursion
/// ln Γ(z) = ln Γ(z + n) − Σ ln(z + k) is used with principal logarithms,
/// which keeps the result continuous across the imaginary axis.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::PoleAtNonPositiveInteger(z.re));
    }
    if z.re >= SHIFT_TO {
        return Ok(stirling(z));
    }
    let n = (SHIFT_TO - z.re).ceil() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        acc += (z + k as f64).ln();
    }
    Ok(stirling(z + n as f64) - acc)
}

/// arg Γ(ix) wrapped to (−π, π]. Undefined at x = 0.
pub fn arg_gamma_imag(x: f64) -> Result<f64> {
    let lg = log_gamma_complex(Complex64::new(0.0, x))?;
    Ok(wrap_pi(lg.im))
}

/// Wraps an angle to (−π, π].
pub fn wrap_pi(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}
