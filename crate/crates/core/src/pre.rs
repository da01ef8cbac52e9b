//! Small-amplitude WKB solution before the pitchfork (θ < −1).

use serde::{Deserialize, Serialize};

use crate::conventions::PhaseVariantPre;
use crate::error::{Error, Result};
use crate::model::Phi;
use crate::numerics::lsq::wrap_2pi;

/// Amplitude and phase (α₁₀, φ₁₀) of the pre-capture solution.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreCaptureParams {
    pub alpha10: f64,
    pub phi10: f64,
}

impl PreCaptureParams {
    /// Validates α ≥ 0 and normalizes the phase to [0, 2π).
    pub fn new(alpha10: f64, phi10: f64) -> Result<Self> {
        if !(alpha10.is_finite() && alpha10 >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha10 = {alpha10} must be finite and >= 0"
            )));
        }
        if !phi10.is_finite() {
            return Err(Error::InvalidInput(format!("phi10 = {phi10}")));
        }
        Ok(Self {
            alpha10,
            phi10: wrap_2pi(phi10),
        })
    }
}

/// Inside-validity threshold for [`validity_pre`].
pub const VALIDITY_MARGIN: f64 = 10.0;

fn check_domain(theta: f64) -> Result<()> {
    if theta < -1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what: "theta",
            detail: format!("{theta} (pre-capture forms need theta < -1)"),
        })
    }
}

/// (ω, ω′) with ω = ½θ√(θ²−1) − ½ln|θ + √(θ²−1)|.
///
/// ω′ = √(θ²−1) is positive, so ω runs from negative values up to 0 at the
/// turning point.
pub fn omega_pre(theta: f64) -> Result<(f64, f64)> {
    check_domain(theta)?;
    let sq = ((theta - 1.0) * (theta + 1.0)).sqrt();
    // θ + √(θ²−1) = −1/(|θ| + √(θ²−1)) avoids cancellation for large |θ|
    let ln_abs = -(theta.abs() + sq).ln();
    Ok((0.5 * theta * sq - 0.5 * ln_abs, sq))
}

/// ln((θ−1)/(θ+1)); the ratio is positive for θ < −1.
fn log_ratio(theta: f64) -> f64 {
    ((theta - 1.0) / (theta + 1.0)).ln()
}

/// Slow phase correction added to ω/ε + φ₁₀.
pub fn phase_correction(theta: f64, alpha10: f64, variant: PhaseVariantPre) -> Result<f64> {
    check_domain(theta)?;
    let l = log_ratio(theta);
    let a2 = alpha10 * alpha10;
    Ok(match variant {
        PhaseVariantPre::Doubled => a2 * (2.0 * theta + 2.0 * l),
        PhaseVariantPre::Negated => -a2 * (theta + l),
        PhaseVariantPre::Averaged => a2 * (theta + 0.75 * l),
    })
}

/// d/dθ of [`phase_correction`].
fn phase_correction_rate(theta: f64, alpha10: f64, variant: PhaseVariantPre) -> f64 {
    let dl = 2.0 / ((theta - 1.0) * (theta + 1.0));
    let a2 = alpha10 * alpha10;
    match variant {
        PhaseVariantPre::Doubled => a2 * (2.0 + 2.0 * dl),
        PhaseVariantPre::Negated => -a2 * (1.0 + dl),
        PhaseVariantPre::Averaged => a2 * (1.0 + 0.75 * dl),
    }
}

/// Fast phase s(θ).
pub fn phase_pre(theta: f64, eps: f64, p: PreCaptureParams, variant: PhaseVariantPre) -> Result<f64> {
    check_eps(eps)?;
    let (w, _) = omega_pre(theta)?;
    Ok(w / eps + p.phi10 + phase_correction(theta, p.alpha10, variant)?)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("eps = {eps} must be positive")))
    }
}

/// Leading WKB term at a given fast phase:
/// √ε·α·(r^{1/4} sin s ± i r^{−1/4} cos s) with the sign from the variant's
/// polarization.
pub fn wkb_pre_at_phase(theta: f64, eps: f64, alpha10: f64, s: f64, variant: PhaseVariantPre) -> Result<Phi> {
    check_domain(theta)?;
    check_eps(eps)?;
    let q = ((theta - 1.0) / (theta + 1.0)).powf(0.25);
    let amp = eps.sqrt() * alpha10;
    Ok(Phi::new(amp * q * s.sin(), variant.polarization() * amp / q * s.cos()))
}

pub fn wkb_pre_eval(theta: f64, eps: f64, p: PreCaptureParams, variant: PhaseVariantPre) -> Result<Phi> {
    let s = phase_pre(theta, eps, p, variant)?;
    wkb_pre_at_phase(theta, eps, p.alpha10, s, variant)
}

/// θ-derivative of [`wkb_pre_eval`], exact for the leading term.
pub fn wkb_pre_derivative(theta: f64, eps: f64, p: PreCaptureParams, variant: PhaseVariantPre) -> Result<Phi> {
    let s = phase_pre(theta, eps, p, variant)?;
    let (_, wp) = omega_pre(theta)?;
    let ds = wp / eps + phase_correction_rate(theta, p.alpha10, variant);
    let q = ((theta - 1.0) / (theta + 1.0)).powf(0.25);
    // d ln q / dθ = ½ / (θ² − 1)
    let dlq = 0.5 / ((theta - 1.0) * (theta + 1.0));
    let amp = eps.sqrt() * p.alpha10;
    let pol = variant.polarization();
    Ok(Phi::new(
        amp * q * (dlq * s.sin() + ds * s.cos()),
        pol * amp / q * (-dlq * s.cos() - ds * s.sin()),
    ))
}

/// Recovers (α₁₀, φ₁₀) from a state assumed to lie on the leading WKB term.
pub fn invert_wkb_pre(theta: f64, eps: f64, phi: Phi, variant: PhaseVariantPre) -> Result<PreCaptureParams> {
    check_domain(theta)?;
    check_eps(eps)?;
    let q = ((theta - 1.0) / (theta + 1.0)).powf(0.25);
    let se = eps.sqrt();
    let x = phi.re / (se * q);
    let y = variant.polarization() * phi.im * q / se;
    let alpha = x.hypot(y);
    let s = x.atan2(y);
    let (w, _) = omega_pre(theta)?;
    let phase = s - w / eps - phase_correction(theta, alpha, variant)?;
    PreCaptureParams::new(alpha, phase)
}

/// ε^{−2/3}(−1−θ); values ≥ [`VALIDITY_MARGIN`] count as inside the domain.
pub fn validity_pre(theta: f64, eps: f64) -> f64 {
    (-1.0 - theta) / eps.cbrt().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::primary_rhs;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    const ALL: [PhaseVariantPre; 3] = PhaseVariantPre::ALL;

    /// ω evaluated directly from the closed form with the naive logarithm.
    fn omega_naive(theta: f64) -> f64 {
        let sq = (theta * theta - 1.0).sqrt();
        0.5 * theta * sq - 0.5 * (theta + sq).abs().ln()
    }

    #[test]
    fn omega_examples() {
        let (w, wp) = omega_pre(-1.0 - 1e-12).unwrap();
        assert!(w.abs() < 1e-9 && wp < 1e-5);
        let (_, wp) = omega_pre(-SQRT_2).unwrap();
        assert!((wp - 1.0).abs() < 1e-15);
        // frozen value at θ = −3: −3√2 + ½ln(3 + 2√2)
        let (w, _) = omega_pre(-3.0).unwrap();
        assert!((w - (-3.361_267_100_099_742_5)).abs() < 1e-14, "{w}");
        assert!((w - omega_naive(-3.0)).abs() < 1e-14);
        assert!(matches!(omega_pre(-1.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn omega_derivative_matches_central_difference() {
        for theta in [-1.2, -2.0, -3.5, -7.0] {
            let h = 1e-5;
            let d = (omega_pre(theta + h).unwrap().0 - omega_pre(theta - h).unwrap().0) / (2.0 * h);
            assert!((d - omega_pre(theta).unwrap().1).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_amplitude_variants_agree() {
        let p = PreCaptureParams::new(0.0, 1.3).unwrap();
        let (w, _) = omega_pre(-2.2).unwrap();
        for v in ALL {
            assert!((phase_pre(-2.2, 0.02, p, v).unwrap() - (w / 0.02 + 1.3)).abs() < 1e-12);
            assert_eq!(wkb_pre_eval(-2.2, 0.02, p, v).unwrap(), Phi::new(0.0, 0.0));
        }
    }

    #[test]
    fn log_ratio_identity() {
        let l = log_ratio(-SQRT_2);
        assert!((l - 2.0 * (SQRT_2 + 1.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn phase_example_doubled() {
        // θ = −3: L = ln 2, ω/ε + 0.25·(−6 + 2 ln 2)
        let p = PreCaptureParams::new(0.5, 0.0).unwrap();
        let s = phase_pre(-3.0, 0.01, p, PhaseVariantPre::Doubled).unwrap();
        let want = -336.126_710_009_974_25 + 0.25 * (-6.0 + 2.0 * 2f64.ln());
        assert!((s - want).abs() < 1e-11, "{s} vs {want}");
    }

    #[test]
    fn polarized_real_value() {
        // cos s = 0 makes φ real with modulus √ε·α·r^{1/4}, r^{1/4} = √(√2+1)
        for v in ALL {
            let phi = wkb_pre_at_phase(-SQRT_2, 0.01, 0.5, PI / 2.0, v).unwrap();
            assert!((phi.re - 0.1 * 0.5 * (SQRT_2 + 1.0).sqrt()).abs() < 1e-15);
            assert!((phi.re - 0.077_688_698_7).abs() < 1e-8);
            assert!(phi.im.abs() < 1e-16);
        }
    }

    #[test]
    fn validity_examples() {
        assert_eq!(validity_pre(-1.0, 0.3), 0.0);
        assert!((validity_pre(-1.1, 1e-3) - 10.0).abs() < 1e-10);
        assert!((validity_pre(-2.0, 1e-2) - 21.544_346_9).abs() < 1e-6);
    }

    /// Residual of the detuned equation, |iεφ′ + (−θ+|φ|²)φ − φ*|, using the
    /// exact derivative of the leading term.
    fn residual(theta: f64, eps: f64, p: PreCaptureParams, v: PhaseVariantPre) -> f64 {
        let phi = wkb_pre_eval(theta, eps, p, v).unwrap();
        let dphi = wkb_pre_derivative(theta, eps, p, v).unwrap();
        let want = primary_rhs(theta, phi, eps);
        (dphi.re - want.re).hypot(dphi.im - want.im) * eps
    }

    fn max_residual(eps: f64, p: PreCaptureParams, v: PhaseVariantPre) -> f64 {
        (0..=400)
            .map(|i| residual(-3.0 + i as f64 / 400.0, eps, p, v))
            .fold(0.0, f64::max)
    }

    #[test]
    fn derivative_matches_central_difference() {
        let p = PreCaptureParams::new(0.7, 2.0).unwrap();
        for v in ALL {
            let h = 1e-7;
            let a = wkb_pre_eval(-2.3 + h, 0.05, p, v).unwrap();
            let b = wkb_pre_eval(-2.3 - h, 0.05, p, v).unwrap();
            let d = wkb_pre_derivative(-2.3, 0.05, p, v).unwrap();
            assert!(((a.re - b.re) / (2.0 * h) - d.re).abs() < 1e-5);
            assert!(((a.im - b.im) / (2.0 * h) - d.im).abs() < 1e-5);
        }
    }

    #[test]
    fn minus_polarization_residual_is_three_halves_order() {
        let p = PreCaptureParams::new(0.6, 1.0).unwrap();
        for v in [PhaseVariantPre::Negated, PhaseVariantPre::Averaged] {
            let r1 = max_residual(0.01, p, v);
            let r2 = max_residual(0.005, p, v);
            let ratio = r1 / r2;
            assert!((ratio - 2f64.powf(1.5)).abs() < 0.4, "{v:?}: ratio {ratio}");
        }
    }

    #[test]
    fn plus_polarization_leaves_half_order_residual() {
        // sin + i cos does not solve the linearized equation; the residual
        // only drops like √ε.
        let p = PreCaptureParams::new(0.6, 1.0).unwrap();
        let r1 = max_residual(0.01, p, PhaseVariantPre::Doubled);
        let r2 = max_residual(0.005, p, PhaseVariantPre::Doubled);
        assert!((r1 / r2 - SQRT_2).abs() < 0.2, "ratio {}", r1 / r2);
        assert!(r1 > 10.0 * max_residual(0.01, p, PhaseVariantPre::Averaged));
    }

    proptest! {
        #[test]
        fn envelope_identity(theta in -6.0f64..-1.01, le in -4.0f64..-1.0, a in 0.0f64..2.0, ph in 0.0f64..std::f64::consts::TAU) {
            let eps = 10f64.powf(le);
            let p = PreCaptureParams::new(a, ph).unwrap();
            for v in ALL {
                let s = phase_pre(theta, eps, p, v).unwrap();
                let phi = wkb_pre_eval(theta, eps, p, v).unwrap();
                let r = (theta - 1.0) / (theta + 1.0);
                let want = eps * a * a * (r.sqrt() * s.sin().powi(2) + s.cos().powi(2) / r.sqrt());
                prop_assert!((phi.abs2() - want).abs() <= 1e-12 * want.max(1e-300));
            }
        }

        #[test]
        fn inversion_round_trip(theta in -5.0f64..-1.1, a in 0.05f64..1.5, ph in 0.0f64..std::f64::consts::TAU) {
            let eps = 0.01;
            let p = PreCaptureParams::new(a, ph).unwrap();
            for v in ALL {
                let phi = wkb_pre_eval(theta, eps, p, v).unwrap();
                let q = invert_wkb_pre(theta, eps, phi, v).unwrap();
                prop_assert!((q.alpha10 - a).abs() < 1e-10);
                prop_assert!(crate::numerics::lsq::angular_distance(q.phi10, p.phi10) < 1e-8);
            }
        }
    }
}
