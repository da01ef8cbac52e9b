//! Captured solutions after the pitchfork (θ > −1): slow equilibria, the
//! leading WKB term riding on them, and fitting its parameters back out of
//! numerical trajectories.

use serde::{Deserialize, Serialize};

use crate::conventions::{EquilibriumVariant, SlowPhaseVariant};
use crate::error::{Error, Result};
use crate::model::Phi;
use crate::numerics::lsq::{circular_mean, unwrap, wrap_2pi, LinearFit};
use crate::numerics::Trajectory;

/// Captured-solution parameters (A₀₀, φ₀₀, j).
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostCaptureParams {
    #[serde(rename = "A00")]
    pub a00: f64,
    pub phi00: f64,
    pub branch_j: u8,
}

impl PostCaptureParams {
    pub fn new(a00: f64, phi00: f64, branch_j: u8) -> Result<Self> {
        if !(a00.is_finite() && a00 >= 0.0) {
            return Err(Error::InvalidInput(format!("A00 = {a00} must be finite and >= 0")));
        }
        if !phi00.is_finite() {
            return Err(Error::InvalidInput(format!("phi00 = {phi00}")));
        }
        if branch_j != 2 && branch_j != 3 {
            return Err(Error::InvalidInput(format!("branch j = {branch_j} (must be 2 or 3)")));
        }
        Ok(Self {
            a00,
            phi00: wrap_2pi(phi00),
            branch_j,
        })
    }

    /// (−1)^j
    pub fn sign(&self) -> f64 {
        if self.branch_j == 2 {
            1.0
        } else {
            -1.0
        }
    }
}

fn out_of_domain(theta: f64, need: &str) -> Error {
    Error::OutOfDomain {
        what: "theta",
        detail: format!("{theta} ({need})"),
    }
}

/// Slowly varying equilibria U₀^(j): 0, ±√(1+θ), ±i√(θ−1).
pub fn slow_manifold(theta: f64, j: u8) -> Result<Phi> {
    match j {
        1 => Ok(Phi::ZERO),
        2 | 3 if theta >= -1.0 => {
            let r = (1.0 + theta).sqrt();
            Ok(Phi::new(if j == 2 { r } else { -r }, 0.0))
        }
        4 | 5 if theta >= 1.0 => {
            let r = (theta - 1.0).sqrt();
            Ok(Phi::new(0.0, if j == 4 { r } else { -r }))
        }
        2 | 3 => Err(out_of_domain(theta, "families 2 and 3 need theta >= -1")),
        4 | 5 => Err(out_of_domain(theta, "families 4 and 5 need theta >= 1")),
        _ => Err(Error::InvalidInput(format!("family j = {j} (must be 1..=5)"))),
    }
}

/// Ω(θ) = 4/3·(1+θ)^{3/2}.
pub fn omega_post(theta: f64) -> Result<f64> {
    if theta < -1.0 {
        return Err(out_of_domain(theta, "needs theta >= -1"));
    }
    Ok(4.0 / 3.0 * (1.0 + theta).powf(1.5))
}

/// Amplitude-dependent slow phase G(θ); S = Ω/ε + φ₀₀ + A₀₀²G(θ).
pub fn slow_phase(theta: f64, variant: SlowPhaseVariant) -> f64 {
    let u = 1.0 + theta;
    match variant {
        SlowPhaseVariant::Expanded => {
            2.5 * theta + 0.75 * theta * theta + (112.0 - 8.0 * theta) * u.sqrt() / 6.0 + 1.5 * u.ln()
        }
        SlowPhaseVariant::NormalForm => -0.5 * u - 1.5 * u.ln(),
    }
}

/// (ε^{−2/3}(1+θ), ε^{4/5}θ); inside validity when left ≥ 10 and right ≤ 0.1.
pub fn validity_post(theta: f64, eps: f64) -> (f64, f64) {
    ((1.0 + theta) / eps.cbrt().powi(2), eps.powf(0.8) * theta)
}

pub const VALIDITY_LEFT: f64 = 10.0;
pub const VALIDITY_RIGHT: f64 = 0.1;

/// Leading-order captured solution
/// (−1)^j [c√(1+θ) + √ε A₀₀((1+θ)^{−1/4} cos S + i(1+θ)^{1/4} sin S)],
/// c = 1 or ½ by `ev`.
pub fn wkb_post_eval(
    theta: f64,
    eps: f64,
    p: PostCaptureParams,
    ev: EquilibriumVariant,
    sv: SlowPhaseVariant,
) -> Result<Phi> {
    if theta <= -1.0 {
        return Err(out_of_domain(theta, "needs theta > -1"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps = {eps}")));
    }
    let u = 1.0 + theta;
    let s = omega_post(theta)? / eps + p.phi00 + p.a00 * p.a00 * slow_phase(theta, sv);
    let q = u.powf(0.25);
    let amp = eps.sqrt() * p.a00;
    let sg = p.sign();
    Ok(Phi::new(
        sg * (ev.factor() * u.sqrt() + amp / q * s.cos()),
        sg * amp * q * s.sin(),
    ))
}

/// Phase offset and its spread for one slow-phase variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseFit {
    pub variant: SlowPhaseVariant,
    pub phi00: f64,
    /// Peak-to-peak excursion of the unwrapped phase residual (rad).
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PostCaptureFit {
    pub params: PostCaptureParams,
    pub best: SlowPhaseVariant,
    pub per_variant: Vec<PhaseFit>,
    /// Relative standard deviation of the rescaled radius.
    pub radius_spread: f64,
}

impl PostCaptureFit {
    pub fn phase_for(&self, v: SlowPhaseVariant) -> Option<f64> {
        self.per_variant.iter().find(|f| f.variant == v).map(|f| f.phi00)
    }
}

/// Fits (A₀₀, φ₀₀, j) on `window` = (θ1, θ2).
pub fn fit_post_capture(
    traj: &Trajectory,
    eps: f64,
    window: (f64, f64),
    ev: EquilibriumVariant,
) -> Result<PostCaptureFit> {
    let (t1, t2) = (window.0.min(window.1), window.0.max(window.1));
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps = {eps}")));
    }
    let (left, _) = validity_post(t1, eps);
    let (_, right) = validity_post(t2, eps);
    if left < VALIDITY_LEFT || right > VALIDITY_RIGHT {
        return Err(Error::OutOfDomain {
            what: "fit window",
            detail: format!("[{t1}, {t2}] at eps = {eps}: margins {left:.3} (>= 10), {right:.3} (<= 0.1)"),
        });
    }
    let (lo, hi) = traj.range();
    if lo > t1 || hi < t2 {
        return Err(Error::WindowTooShort(format!(
            "trajectory covers [{lo}, {hi}], window is [{t1}, {t2}]"
        )));
    }
    let span = (omega_post(t2)? - omega_post(t1)?) / eps;
    if span < 16.0 * std::f64::consts::PI {
        return Err(Error::WindowTooShort(format!(
            "{span:.1} rad of fast phase (needs 16 pi)"
        )));
    }
    let pts: Vec<(f64, f64, f64)> = traj.window(t1, t2).map(|(t, s)| (t, s[0], s[1])).collect();
    if pts.len() < 16 {
        return Err(Error::WindowTooShort(format!("{} samples", pts.len())));
    }
    let mean_re = pts.iter().map(|p| p.1 / (1.0 + p.0).sqrt()).sum::<f64>() / pts.len() as f64;
    if mean_re.abs() < 0.25 * ev.factor() {
        return Err(Error::NotCaptured);
    }
    let sg = mean_re.signum();
    let branch_j = if sg > 0.0 { 2 } else { 3 };
    let se = eps.sqrt();
    let xy: Vec<(f64, f64, f64)> = pts
        .iter()
        .map(|&(t, a, b)| {
            let u = 1.0 + t;
            let x = (sg * a - ev.factor() * u.sqrt()) / (se * u.powf(-0.25));
            let y = sg * b / (se * u.powf(0.25));
            (t, x, y)
        })
        .collect();
    let n = xy.len() as f64;
    let radii: Vec<f64> = xy.iter().map(|p| p.1.hypot(p.2)).collect();
    let a00 = radii.iter().sum::<f64>() / n;
    let var = radii.iter().map(|r| (r - a00).powi(2)).sum::<f64>() / n;
    let radius_spread = if a00 > 0.0 { var.sqrt() / a00 } else { 0.0 };

    let mut per_variant = Vec::new();
    for sv in SlowPhaseVariant::ALL {
        let mut res: Vec<f64> = Vec::with_capacity(xy.len());
        for &(t, x, y) in &xy {
            let model = omega_post(t)? / eps + a00 * a00 * slow_phase(t, sv);
            res.push(crate::numerics::gamma::wrap_pi(y.atan2(x) - model));
        }
        let (phi00, _) = circular_mean(res.iter().copied());
        unwrap(&mut res);
        let (mn, mx) = res
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
        per_variant.push(PhaseFit {
            variant: sv,
            phi00,
            drift: mx - mn,
        });
    }
    let best = per_variant.iter().min_by(|a, b| a.drift.total_cmp(&b.drift)).unwrap();
    let params = PostCaptureParams::new(a00, best.phi00, branch_j)?;
    Ok(PostCaptureFit {
        params,
        best: best.variant,
        per_variant,
        radius_spread,
    })
}

/// Log-log slope of the slow amplitude
/// A₀ = √((δa/(2√(1+θ)))² + (δb/(2(1+θ)))²) against 1+θ on `window`,
/// where δa, δb are the deviations from the branch. The leading term
/// predicts −3/4.
pub fn slow_amplitude_slope(traj: &Trajectory, window: (f64, f64)) -> Result<f64> {
    let (t1, t2) = (window.0.min(window.1), window.0.max(window.1));
    let pts: Vec<(f64, f64, f64)> = traj.window(t1, t2).map(|(t, s)| (t, s[0], s[1])).collect();
    if pts.len() < 16 {
        return Err(Error::WindowTooShort(format!("{} samples", pts.len())));
    }
    let sg = pts.iter().map(|p| p.1).sum::<f64>().signum();
    let mut fit = LinearFit::<2>::new();
    for (t, a, b) in pts {
        let u = 1.0 + t;
        let da = sg * a - u.sqrt();
        let db = sg * b;
        let a0 = (da / (2.0 * u.sqrt())).hypot(db / (2.0 * u));
        if a0 > 0.0 {
            fit.push([1.0, u.ln()], a0.ln());
        }
    }
    Ok(fit.solve()?[1])
}
