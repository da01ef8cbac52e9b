//! Connection formulas across the resonant layer.
//!
//! The −∞ data (α̃, φ̃) of a real layer solution determine a complex number
//!
//! ```text
//! p = √(e^{πα̃²} − 1) · exp(i(3/2·α̃² ln 2 − π/4 − arg Γ(iα̃²/2) − φ̃))
//! ```
//!
//! whose imaginary part selects the captured branch and whose modulus and
//! argument give the +∞ data (ρ, υ). Im p = 0 is the decaying separatrix.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::conventions::{ConstantVariantPost, Conventions, MatchingRule};
use crate::error::{Error, Result};
use crate::numerics::arg_gamma_imag;
use crate::numerics::lsq::wrap_2pi;
use crate::pre::PreCaptureParams;

/// |Im p| at or below this is treated as the separatrix.
pub const SPECIAL_TOL: f64 = 1e-12;

/// Phase of p without the −φ̃ term.
fn p_phase_offset(alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        // arg Γ(ix) → −π/2 as x → 0⁺
        return Ok(PI / 4.0);
    }
    let a2 = alpha * alpha;
    Ok(1.5 * a2 * LN_2 - PI / 4.0 - arg_gamma_imag(a2 / 2.0)?)
}

/// p for layer data (α̃, φ̃).
pub fn compute_p_layer(alpha: f64, phi: f64) -> Result<Complex64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidInput(format!("alpha = {alpha}")));
    }
    let x = PI * alpha * alpha;
    if x > 700.0 {
        return Err(Error::Overflow("exp(pi alpha^2)"));
    }
    let modulus = x.exp_m1().sqrt();
    if modulus == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(Complex64::from_polar(modulus, p_phase_offset(alpha)? - phi))
}

/// p with the identity matching α̃ = α₁₀, φ̃ = φ₁₀.
pub fn compute_p(pre: PreCaptureParams) -> Result<Complex64> {
    compute_p_layer(pre.alpha10, pre.phi10)
}

/// The two separatrix phases (κ = 0, 1) in [0, 2π).
pub fn special_phases(alpha: f64) -> Result<[f64; 2]> {
    let base = p_phase_offset(alpha)?;
    Ok([wrap_2pi(base), wrap_2pi(base + PI)])
}

/// (ρ², υ) from p. Never clamps: a negative ρ² is reported as an error.
pub fn rho_upsilon(p: Complex64, variant: ConstantVariantPost) -> Result<(f64, f64)> {
    if p.im.abs() <= SPECIAL_TOL {
        return Err(Error::SpecialPhase);
    }
    let denom = match variant {
        ConstantVariantPost::Plain | ConstantVariantPost::Ln2 => 3.0,
        ConstantVariantPost::Reflected => 2.0,
    };
    let rho2 = ((1.0 + p.norm_sqr()) / (denom * p.im.abs())).ln() / PI;
    if rho2 < 0.0 {
        return Err(Error::NegativeRho2(rho2));
    }
    let arg1p2 = (Complex64::new(1.0, 0.0) + p * p).arg();
    let ag = arg_gamma_imag(rho2)?;
    let upsilon = match variant {
        ConstantVariantPost::Plain => -PI / 4.0 + 3.5 * rho2 - ag - arg1p2,
        ConstantVariantPost::Ln2 => -PI / 4.0 + 3.5 * rho2 * LN_2 - ag - arg1p2,
        ConstantVariantPost::Reflected => -0.75 * PI - 3.5 * rho2 * LN_2 + ag + arg1p2,
    };
    Ok((rho2, wrap_2pi(upsilon)))
}

/// Predicted connection data. The captured fields are `None` on the
/// separatrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectionResult {
    /// Layer data actually fed to p.
    pub alpha_t: f64,
    pub phi_t: f64,
    #[serde(skip)]
    pub p: Complex64,
    pub special: bool,
    pub rho2: Option<f64>,
    pub upsilon: Option<f64>,
    #[serde(rename = "A00")]
    pub a00: Option<f64>,
    pub phi00: Option<f64>,
    pub branch_j: Option<u8>,
}

/// j = 2 (positive branch) when Im p > 0, j = 3 when Im p < 0.
pub fn branch_from_p(p: Complex64) -> Option<u8> {
    if p.im > SPECIAL_TOL {
        Some(2)
    } else if p.im < -SPECIAL_TOL {
        Some(3)
    } else {
        None
    }
}

fn special_result(alpha_t: f64, phi_t: f64, p: Complex64) -> ConnectionResult {
    ConnectionResult {
        alpha_t,
        phi_t,
        p,
        special: true,
        rho2: None,
        upsilon: None,
        a00: None,
        phi00: None,
        branch_j: None,
    }
}

/// Captured parameters with identity matching: A₀₀ = ρ, φ₀₀ = υ.
pub fn capture_params(pre: PreCaptureParams, variant: ConstantVariantPost) -> Result<ConnectionResult> {
    let p = compute_p(pre)?;
    let Some(branch) = branch_from_p(p) else {
        return Ok(special_result(pre.alpha10, pre.phi10, p));
    };
    let (rho2, upsilon) = rho_upsilon(p, variant)?;
    Ok(ConnectionResult {
        alpha_t: pre.alpha10,
        phi_t: pre.phi10,
        p,
        special: false,
        rho2: Some(rho2),
        upsilon: Some(upsilon),
        a00: Some(rho2.sqrt()),
        phi00: Some(upsilon),
        branch_j: Some(branch),
    })
}

/// Layer phase φ̃ seen from the outer phase φ₁₀ under the scaled matching.
pub fn layer_phase(pre: PreCaptureParams, eps: f64) -> f64 {
    let a2 = pre.alpha10 * pre.alpha10;
    wrap_2pi(-pre.phi10 + a2 * (1.0 - LN_2 + 0.5 * eps.ln()))
}

/// Outer phase φ₀₀ seen from the layer phase υ under the scaled matching.
pub fn outer_phase(rho2: f64, upsilon: f64, eps: f64) -> f64 {
    wrap_2pi(upsilon - 0.5 * rho2 * LN_2 + rho2 * eps.ln())
}

/// Full prediction from pre-capture parameters at a given ε.
pub fn predict(pre: PreCaptureParams, eps: f64, conv: &Conventions) -> Result<ConnectionResult> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps = {eps}")));
    }
    match conv.matching {
        MatchingRule::Identity => capture_params(pre, conv.constant_post),
        MatchingRule::LayerScaled => {
            let phi_t = layer_phase(pre, eps);
            let p = compute_p_layer(pre.alpha10, phi_t)?;
            let Some(branch) = branch_from_p(p) else {
                return Ok(special_result(pre.alpha10, phi_t, p));
            };
            let (rho2, upsilon) = rho_upsilon(p, conv.constant_post)?;
            Ok(ConnectionResult {
                alpha_t: pre.alpha10,
                phi_t,
                p,
                special: false,
                rho2: Some(rho2),
                upsilon: Some(upsilon),
                a00: Some(rho2.sqrt()),
                phi00: Some(outer_phase(rho2, upsilon, eps)),
                branch_j: Some(branch),
            })
        }
    }
}
