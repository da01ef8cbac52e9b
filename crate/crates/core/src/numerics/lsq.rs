//! Small dense least squares and angle bookkeeping.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Solves the N×N system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let scale = a.iter().flat_map(|r| r.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut s = b[row];
        for k in row + 1..N {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Accumulates normal equations for y ≈ Σ c_i f_i.
#[derive(Clone, Debug)]
pub struct LinearFit<const N: usize> {
    ata: [[f64; N]; N],
    atb: [f64; N],
    btb: f64,
    count: usize,
}

impl<const N: usize> Default for LinearFit<N> {
    fn default() -> Self {
        Self {
            ata: [[0.0; N]; N],
            atb: [0.0; N],
            btb: 0.0,
            count: 0,
        }
    }
}

impl<const N: usize> LinearFit<N> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, basis: [f64; N], y: f64) {
        for i in 0..N {
            for j in 0..N {
                self.ata[i][j] += basis[i] * basis[j];
            }
            self.atb[i] += basis[i] * y;
        }
        self.btb += y * y;
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn solve(&self) -> Result<[f64; N]> {
        if self.count < N {
            return Err(Error::WindowTooShort(format!(
                "{} samples for {} unknowns",
                self.count, N
            )));
        }
        solve(self.ata, self.atb).ok_or_else(|| Error::FitDiverged("singular normal equations".into()))
    }

    /// Root-mean-square residual of coefficients `c`.
    pub fn rms_residual(&self, c: &[f64; N]) -> f64 {
        // |y - A c|^2 = y.y - 2 c.A^T y + c.A^T A c
        let mut r = self.btb;
        for i in 0..N {
            r -= 2.0 * c[i] * self.atb[i];
            for j in 0..N {
                r += c[i] * self.ata[i][j] * c[j];
            }
        }
        (r.max(0.0) / self.count.max(1) as f64).sqrt()
    }
}

/// Normalizes an angle to [0, 2π).
pub fn wrap_2pi(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Shortest angular distance, in [0, π].
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Circular mean of a set of angles, in [0, 2π). Also returns the mean
/// resultant length, which is 1 for perfectly concentrated data.
pub fn circular_mean<I: IntoIterator<Item = f64>>(angles: I) -> (f64, f64) {
    let (mut c, mut s, mut n) = (0.0, 0.0, 0usize);
    for a in angles {
        c += a.cos();
        s += a.sin();
        n += 1;
    }
    if n == 0 {
        return (0.0, 0.0);
    }
    let n = n as f64;
    (wrap_2pi(s.atan2(c)), (c * c + s * s).sqrt() / n)
}

/// Unwraps a sequence of angles in place so consecutive differences lie in
/// (−π, π].
pub fn unwrap(angles: &mut [f64]) {
    for i in 1..angles.len() {
        let d = angles[i] - angles[i - 1];
        let k = ((d + PI) / (2.0 * PI)).floor();
        angles[i] -= k * 2.0 * PI;
    }
}
