//! The slowly detuned parametric oscillator
//!
//! ```text
//! iε φ' + (−θ + |φ|²) φ − φ* = 0
//! ```
//!
//! its frozen-coefficient counterpart, the frozen Hamiltonian and the
//! equilibrium census, plus the scaled variables used near θ = −1.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitude φ = re + i·im.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Phi {
    pub re: f64,
    pub im: f64,
}

impl Phi {
    pub const ZERO: Phi = Phi { re: 0.0, im: 0.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for Phi {
    fn from(c: Complex64) -> Self {
        Phi::new(c.re, c.im)
    }
}

impl From<Phi> for Complex64 {
    fn from(p: Phi) -> Self {
        p.to_complex()
    }
}

/// dφ/dθ for the detuning σ(θ) = −θ.
pub fn primary_rhs(theta: f64, phi: Phi, eps: f64) -> Phi {
    frozen_rhs(theta, phi, eps)
}

/// dφ/dt with θ frozen at `t_const`.
pub fn frozen_rhs(t_const: f64, phi: Phi, eps: f64) -> Phi {
    let (a, b) = (phi.re, phi.im);
    let m = a * a + b * b;
    // (−i/ε)[φ* − (−T + m)φ], split into real and imaginary parts
    Phi::new(-b * (1.0 - t_const + m) / eps, a * (m - 1.0 - t_const) / eps)
}

/// Real two-component vector field (Re φ, Im φ) of the detuned equation,
/// in the form the integrator wants.
pub fn primary_field(eps: f64) -> impl Fn(f64, &[f64], &mut [f64]) + Copy {
    move |theta, y, dy| {
        let d = primary_rhs(theta, Phi::new(y[0], y[1]), eps);
        dy[0] = d.re;
        dy[1] = d.im;
    }
}

/// Same as [`primary_field`] with the coefficient frozen at `t_const`.
pub fn frozen_field(t_const: f64, eps: f64) -> impl Fn(f64, &[f64], &mut [f64]) + Copy {
    move |_t, y, dy| {
        let d = frozen_rhs(t_const, Phi::new(y[0], y[1]), eps);
        dy[0] = d.re;
        dy[1] = d.im;
    }
}

/// H = −½|φ|⁴ + T|φ|² + ½(φ*² + φ²).
pub fn hamiltonian(t_const: f64, phi: Phi) -> f64 {
    let m = phi.abs2();
    -0.5 * m * m + t_const * m + (phi.re * phi.re - phi.im * phi.im)
}

/// Second derivatives (H_aa, H_ab, H_bb) with φ = a + ib.
pub fn hamiltonian_hessian(t_const: f64, phi: Phi) -> [f64; 3] {
    let (a, b) = (phi.re, phi.im);
    [
        -6.0 * a * a - 2.0 * b * b + 2.0 * t_const + 2.0,
        -4.0 * a * b,
        -2.0 * a * a - 6.0 * b * b + 2.0 * t_const - 2.0,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Center,
    Saddle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub location: Phi,
    pub kind: EquilibriumKind,
    /// 1: origin; 2, 3: ±√(1+T); 4, 5: ±i√(T−1).
    pub family: u8,
}

/// Width of the refusal band around the bifurcation values T = ±1.
pub const BIFURCATION_GUARD: f64 = 1e-8;

/// Centers have a definite Hessian, saddles an indefinite one.
pub fn classify(t_const: f64, phi: Phi) -> EquilibriumKind {
    let [haa, hab, hbb] = hamiltonian_hessian(t_const, phi);
    if haa * hbb - hab * hab > 0.0 {
        EquilibriumKind::Center
    } else {
        EquilibriumKind::Saddle
    }
}

/// All critical points of the frozen Hamiltonian, ordered by family.
pub fn equilibria(t_const: f64) -> Result<Vec<Equilibrium>> {
    if !t_const.is_finite() {
        return Err(Error::InvalidInput(format!("T = {t_const}")));
    }
    if (t_const - 1.0).abs() < BIFURCATION_GUARD || (t_const + 1.0).abs() < BIFURCATION_GUARD {
        return Err(Error::AtBifurcation(t_const));
    }
    let mut locs = vec![(1u8, Phi::ZERO)];
    if t_const > -1.0 {
        let r = (1.0 + t_const).sqrt();
        locs.push((2, Phi::new(r, 0.0)));
        locs.push((3, Phi::new(-r, 0.0)));
    }
    if t_const > 1.0 {
        let r = (t_const - 1.0).sqrt();
        locs.push((4, Phi::new(0.0, r)));
        locs.push((5, Phi::new(0.0, -r)));
    }
    Ok(locs
        .into_iter()
        .map(|(family, location)| Equilibrium {
            location,
            kind: classify(t_const, location),
            family,
        })
        .collect())
}

/// Near-pitchfork variables: θ + 1 = ε^{2/3}η, φ = ε^{1/3}x + iε^{2/3}y.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaledState {
    pub eta: f64,
    pub x: f64,
    pub y: f64,
}

pub fn scale_transform(theta: f64, phi: Phi, eps: f64) -> ScaledState {
    let e13 = eps.cbrt();
    let e23 = e13 * e13;
    ScaledState {
        eta: (theta + 1.0) / e23,
        x: phi.re / e13,
        y: phi.im / e23,
    }
}

/// Inverse of [`scale_transform`]: returns (θ, φ).
pub fn unscale_transform(s: ScaledState, eps: f64) -> (f64, Phi) {
    let e13 = eps.cbrt();
    let e23 = e13 * e13;
    (s.eta * e23 - 1.0, Phi::new(s.x * e13, s.y * e23))
}

/// (dx/dη, dy/dη) of the exact rescaled system. At ε = 0 this is
/// x' = −2y, y' = −(η − x²)x.
pub fn perturbed_painleve_rhs(s: ScaledState, eps: f64) -> (f64, f64) {
    let e23 = eps.cbrt().powi(2);
    let e43 = e23 * e23;
    let q = s.eta - s.x * s.x;
    (
        -2.0 * s.y + e23 * q * s.y - e43 * s.y.powi(3),
        -q * s.x + e23 * s.y * s.y * s.x,
    )
}

pub fn perturbed_painleve_field(eps: f64) -> impl Fn(f64, &[f64], &mut [f64]) + Copy {
    move |eta, y, dy| {
        let (dx, dyy) = perturbed_painleve_rhs(ScaledState { eta, x: y[0], y: y[1] }, eps);
        dy[0] = dx;
        dy[1] = dyy;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_adaptive, Tolerances};
    use proptest::prelude::*;

    #[test]
    fn rhs_examples() {
        assert_eq!(primary_rhs(0.7, Phi::ZERO, 0.3), Phi::ZERO);
        assert_eq!(primary_rhs(0.0, Phi::new(1.0, 0.0), 0.05), Phi::ZERO);
        let d = primary_rhs(0.0, Phi::new(0.0, 1.0), 0.1);
        assert!((d.re + 20.0).abs() < 1e-12 && d.im.abs() < 1e-12);
        assert_eq!(frozen_rhs(3.0, Phi::new(2.0, 0.0), 0.1), Phi::ZERO);
    }

    #[test]
    fn rhs_matches_complex_rearrangement() {
        let (theta, eps) = (-0.4, 0.07);
        let phi = Complex64::new(0.3, -1.1);
        let want = Complex64::new(0.0, -1.0 / eps) * (phi.conj() - (-theta + phi.norm_sqr()) * phi);
        let got = primary_rhs(theta, phi.into(), eps);
        assert!((got.to_complex() - want).norm() < 1e-12);
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(0.4, Phi::ZERO), 0.0);
        assert!((hamiltonian(0.0, Phi::new(1.0, 0.0)) - 0.5).abs() < 1e-15);
        assert!((hamiltonian(0.0, Phi::new(0.0, 1.0)) + 1.5).abs() < 1e-15);
    }

    fn census(t: f64) -> (usize, usize) {
        let eq = equilibria(t).unwrap();
        let c = eq.iter().filter(|e| e.kind == EquilibriumKind::Center).count();
        (c, eq.len() - c)
    }

    #[test]
    fn census_by_regime() {
        assert_eq!(census(-2.0), (1, 0));
        assert_eq!(census(0.0), (2, 1));
        assert_eq!(census(2.0), (3, 2));
        let e = equilibria(2.0).unwrap();
        assert!(e.iter().any(|q| q.family == 4 && (q.location.im - 1.0).abs() < 1e-15));
        assert!(e
            .iter()
            .any(|q| q.family == 2 && (q.location.re - 3f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn bifurcation_values_refused() {
        for t in [1.0, -1.0, 1.0 + 5e-9, -1.0 - 5e-9] {
            assert!(matches!(equilibria(t), Err(Error::AtBifurcation(_))));
        }
        assert!(equilibria(1.0 + 2e-8).is_ok());
    }

    #[test]
    fn scale_examples() {
        assert_eq!(scale_transform(-1.0, Phi::new(0.2, 0.1), 0.3).eta, 0.0);
        let s = scale_transform(0.5, Phi::new(0.2, -0.1), 1.0);
        assert_eq!((s.eta, s.x, s.y), (1.5, 0.2, -0.1));
        let s = scale_transform(-1.0 + 1e-2, Phi::ZERO, 1e-3);
        assert!((s.eta - 1.0).abs() < 1e-13);
    }

    #[test]
    fn perturbed_examples() {
        let z = ScaledState {
            eta: 0.3,
            x: 0.0,
            y: 0.0,
        };
        assert_eq!(perturbed_painleve_rhs(z, 0.1), (0.0, 0.0));
        assert_eq!(
            perturbed_painleve_rhs(
                ScaledState {
                    eta: 1.0,
                    x: 1.0,
                    y: 0.0
                },
                0.0
            ),
            (0.0, 0.0)
        );
        assert_eq!(
            perturbed_painleve_rhs(
                ScaledState {
                    eta: 0.0,
                    x: 1.0,
                    y: 1.0
                },
                0.0
            ),
            (-2.0, 1.0)
        );
    }

    #[test]
    fn scaled_system_is_the_detuned_equation() {
        // chain rule: d/dη = ε^{2/3} d/dθ, with the component scalings
        let eps = 0.013;
        let (theta, phi) = (-0.93, Phi::new(0.11, -0.04));
        let s = scale_transform(theta, phi, eps);
        let (dx, dy) = perturbed_painleve_rhs(s, eps);
        let d = primary_rhs(theta, phi, eps);
        let e13 = eps.cbrt();
        let e23 = e13 * e13;
        assert!((dx - d.re * e23 / e13).abs() < 1e-10 * dx.abs().max(1.0));
        assert!((dy - d.im * e23 / e23).abs() < 1e-10 * dy.abs().max(1.0));
    }

    #[test]
    fn frozen_flow_conserves_hamiltonian() {
        // drift of an explicit 5(4) pair grows linearly in time and in tol;
        // 1e-12 keeps it under 1e-8 over t in [0, 50]
        let tol = Tolerances::new(1e-12, 1e-12, 0.05, 1e-14).unwrap();
        for t in [-2.0, 0.0, 2.0] {
            let h0 = hamiltonian(t, Phi::new(0.3, 0.0));
            let traj = integrate_adaptive(frozen_field(t, 0.1), &[0.3, 0.0], (0.0, 50.0), &tol).unwrap();
            for (_, y) in traj.iter() {
                let h = hamiltonian(t, Phi::new(y[0], y[1]));
                assert!(((h - h0) / h0).abs() <= 1e-8, "T={t}: drift {}", (h - h0) / h0);
            }
        }
    }

    /// Independent search: scan a grid for sign changes of ∇H, polish with
    /// Newton, deduplicate.
    fn brute_force_critical_points(t: f64) -> Vec<Phi> {
        let grad = |a: f64, b: f64| {
            let m = a * a + b * b;
            (
                -2.0 * m * a + 2.0 * t * a + 2.0 * a,
                -2.0 * m * b + 2.0 * t * b - 2.0 * b,
            )
        };
        let mut found: Vec<Phi> = Vec::new();
        let n = 60;
        for i in 0..=n {
            for k in 0..=n {
                let (mut a, mut b) = (-2.5 + 5.0 * i as f64 / n as f64, -2.5 + 5.0 * k as f64 / n as f64);
                for _ in 0..60 {
                    let (ga, gb) = grad(a, b);
                    let [haa, hab, hbb] = hamiltonian_hessian(t, Phi::new(a, b));
                    let det = haa * hbb - hab * hab;
                    if det.abs() < 1e-14 {
                        break;
                    }
                    a -= (hbb * ga - hab * gb) / det;
                    b -= (haa * gb - hab * ga) / det;
                }
                let (ga, gb) = grad(a, b);
                if ga.hypot(gb) < 1e-13
                    && a.abs() < 3.0
                    && b.abs() < 3.0
                    && !found.iter().any(|p| (p.re - a).hypot(p.im - b) < 1e-6)
                {
                    found.push(Phi::new(a, b));
                }
            }
        }
        found
    }

    #[test]
    fn positions_match_brute_force_oracle() {
        for t in [-2.0, 0.0, 2.0, 0.5, 3.7] {
            let oracle = brute_force_critical_points(t);
            let eq = equilibria(t).unwrap();
            assert_eq!(oracle.len(), eq.len(), "T={t}");
            for e in &eq {
                let d = oracle
                    .iter()
                    .map(|p| (p.re - e.location.re).hypot(p.im - e.location.im))
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 1e-10, "T={t}, family {}", e.family);
                let r = primary_rhs(t, e.location, 1.0);
                assert!(r.re.abs() < 1e-12 && r.im.abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn census_counts_hold(t in -5.0f64..5.0) {
            prop_assume!((t.abs() - 1.0).abs() > 1e-6);
            let want = if t < -1.0 { (1, 0) } else if t < 1.0 { (2, 1) } else { (3, 2) };
            prop_assert_eq!(census(t), want);
        }

        #[test]
        fn scale_round_trip(theta in -3.0f64..3.0, re in -2.0f64..2.0, im in -2.0f64..2.0, le in -8.0f64..0.0) {
            let eps = 10f64.powf(le);
            let phi = Phi::new(re, im);
            let (t2, p2) = unscale_transform(scale_transform(theta, phi, eps), eps);
            prop_assert!((t2 - theta).abs() <= 1e-14 * theta.abs().max(1.0));
            prop_assert!((p2.re - re).abs() <= 1e-14 * re.abs().max(1e-300));
            prop_assert!((p2.im - im).abs() <= 1e-14 * im.abs().max(1e-300));
        }

        #[test]
        fn zero_eps_is_leading_system(eta in -5.0f64..5.0, x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let (dx, dy) = perturbed_painleve_rhs(ScaledState { eta, x, y }, 0.0);
            prop_assert_eq!(dx, -2.0 * y);
            prop_assert_eq!(dy, -(eta - x * x) * x);
        }
    }
}
