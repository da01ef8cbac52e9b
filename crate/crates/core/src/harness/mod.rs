//! End-to-end experiments: scattering runs, capture detection, figures.

pub mod config;
pub mod figures;
pub mod io;
pub mod portrait;
pub mod svg;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::connection::{self, ConnectionResult};
use crate::conventions::Conventions;
use crate::error::{Error, Result};
use crate::model::{primary_field, Phi};
use crate::numerics::lsq::angular_distance;
use crate::numerics::{integrate_adaptive, EquationId, IndependentVar, Tolerances, Trajectory};
use crate::post::{fit_post_capture, PostCaptureFit};
use crate::pre::{invert_wkb_pre, validity_pre, wkb_pre_eval, PreCaptureParams, VALIDITY_MARGIN};

/// Starting data of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    State(Phi),
    Wkb(PreCaptureParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub eps: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub initial: Initial,
    pub tolerances: Tolerances,
    pub conventions: Conventions,
    /// θ-window for the post-capture fit.
    pub fit_window: (f64, f64),
}

impl RunConfig {
    pub const DEFAULT_FIT_WINDOW: (f64, f64) = (0.5, 1.5);

    pub fn new(eps: f64, theta0: f64, theta1: f64, initial: Initial) -> Result<Self> {
        let cfg = Self {
            eps,
            theta0,
            theta1,
            initial,
            tolerances: Tolerances::ode_default(),
            conventions: Conventions::derived(),
            fit_window: Self::DEFAULT_FIT_WINDOW,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps = {} must be positive", self.eps)));
        }
        if !(self.theta0.is_finite() && self.theta1.is_finite() && self.theta0 < self.theta1) {
            return Err(Error::InvalidInput(format!(
                "need theta0 < theta1 (got {}, {})",
                self.theta0, self.theta1
            )));
        }
        self.tolerances.validate()?;
        if let Initial::State(phi) = self.initial {
            if !phi.is_finite() {
                return Err(Error::InvalidInput("initial state must be finite".into()));
            }
        }
        Ok(())
    }

    /// φ(θ0), built from the pre-capture WKB term when parameters are given.
    pub fn initial_state(&self) -> Result<Phi> {
        match self.initial {
            Initial::State(phi) => Ok(phi),
            Initial::Wkb(p) => {
                let margin = validity_pre(self.theta0, self.eps);
                if margin < VALIDITY_MARGIN {
                    return Err(Error::OutOfDomain {
                        what: "theta0",
                        detail: format!(
                            "{} gives validity margin {margin:.3} < {VALIDITY_MARGIN} at eps = {}",
                            self.theta0, self.eps
                        ),
                    });
                }
                wkb_pre_eval(self.theta0, self.eps, p, self.conventions.phase_pre)
            }
        }
    }
}

/// Integrates the detuned equation over [θ0, θ1].
pub fn simulate(cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let phi0 = cfg.initial_state()?;
    Ok(integrate_adaptive(
        primary_field(cfg.eps),
        &[phi0.re, phi0.im],
        (cfg.theta0, cfg.theta1),
        &cfg.tolerances,
    )?
    .tagged(EquationId::Primary, IndependentVar::Theta))
}

/// Default capture criterion: |φ|² ≥ 0.5(1+θ) on a trailing window of 0.5.
pub const CAPTURE_FACTOR: f64 = 0.5;
pub const CAPTURE_WINDOW: f64 = 0.5;

pub fn detect_capture(traj: &Trajectory) -> Result<Option<f64>> {
    detect_capture_with(traj, CAPTURE_FACTOR, CAPTURE_WINDOW)
}

/// Capture holds when |φ|² ≥ factor·(1+θ) at every sample of the trailing
/// `window`. The reported θ is the first sample from which the criterion
/// holds continuously up to the end.
pub fn detect_capture_with(traj: &Trajectory, factor: f64, window: f64) -> Result<Option<f64>> {
    if traj.dim() != 2 {
        return Err(Error::InvalidInput(format!(
            "expected a 2-component trajectory, got {}",
            traj.dim()
        )));
    }
    let (lo, hi) = traj.range();
    if hi < 0.0 {
        return Err(Error::SpanTooShort(format!(
            "trajectory ends at {hi}, needs to reach 0"
        )));
    }
    let holds = |t: f64, s: &[f64]| s[0] * s[0] + s[1] * s[1] >= factor * (1.0 + t);
    // walk backward from the end of the run
    let mut idx: Vec<usize> = (0..traj.len()).collect();
    if traj.points()[0] > traj.points()[traj.len() - 1] {
        idx.reverse();
    }
    let pts = traj.points();
    let mut first_ok = None;
    for &i in idx.iter().rev() {
        if holds(pts[i], traj.state(i)) {
            first_ok = Some(pts[i]);
        } else {
            break;
        }
    }
    match first_ok {
        Some(t) if t <= (hi - window).max(lo) => Ok(Some(t)),
        _ => Ok(None),
    }
}

/// Predicted-versus-measured summary of one run. Field names are the JSON
/// keys.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct ScatteringReport {
    pub eps: f64,
    pub alpha10: Option<f64>,
    pub phi10: Option<f64>,
    pub p_re: Option<f64>,
    pub p_im: Option<f64>,
    pub special: Option<bool>,
    pub rho2: Option<f64>,
    pub upsilon: Option<f64>,
    pub A00_pred: Option<f64>,
    pub phi00_pred: Option<f64>,
    pub j_pred: Option<u8>,
    pub theta_capture: Option<f64>,
    pub A00_meas: Option<f64>,
    pub phi00_meas: Option<f64>,
    pub j_meas: Option<u8>,
    pub variant_resolution: VariantResolution,
    pub residuals: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantResolution {
    pub conventions: Conventions,
    /// Slow-phase form with the smallest residual drift in the fit window.
    pub best_slow_phase: Option<crate::conventions::SlowPhaseVariant>,
    pub prediction_error: Option<String>,
    pub fit_error: Option<String>,
}

/// Runs, detects capture, fits and compares with the connection formulas.
pub fn run_scattering(cfg: &RunConfig) -> Result<ScatteringReport> {
    let traj = simulate(cfg)?;
    scattering_report(cfg, &traj)
}

/// Builds the report for an already integrated trajectory.
pub fn scattering_report(cfg: &RunConfig, traj: &Trajectory) -> Result<ScatteringReport> {
    let conv = cfg.conventions;
    let pre = match cfg.initial {
        Initial::Wkb(p) => Some(p),
        Initial::State(phi) if validity_pre(cfg.theta0, cfg.eps) >= VALIDITY_MARGIN => {
            invert_wkb_pre(cfg.theta0, cfg.eps, phi, conv.phase_pre).ok()
        }
        Initial::State(_) => None,
    };

    let mut prediction_error = None;
    let predicted: Option<ConnectionResult> = match pre {
        Some(p) => match connection::predict(p, cfg.eps, &conv) {
            Ok(r) => Some(r),
            Err(e) => {
                prediction_error = Some(e.to_string());
                None
            }
        },
        None => None,
    };

    let theta_capture = detect_capture(traj)?;
    let mut fit_error = None;
    let measured: Option<PostCaptureFit> = if theta_capture.is_some() {
        match fit_post_capture(traj, cfg.eps, cfg.fit_window, conv.equilibrium) {
            Ok(f) => Some(f),
            Err(e) => {
                fit_error = Some(e.to_string());
                None
            }
        }
    } else {
        fit_error = Some(Error::NotCaptured.to_string());
        None
    };

    let meas_phase = measured.as_ref().and_then(|m| m.phase_for(conv.slow_phase));
    let mut residuals = BTreeMap::new();
    if let (Some(pr), Some(m)) = (&predicted, &measured) {
        if let Some(a) = pr.a00 {
            if a > 0.0 {
                residuals.insert("A00_rel_err".to_string(), (m.params.a00 - a).abs() / a);
            }
        }
        if let (Some(ph), Some(mp)) = (pr.phi00, meas_phase) {
            residuals.insert("phi00_err".to_string(), angular_distance(ph, mp));
        }
        if let Some(j) = pr.branch_j {
            residuals.insert("j_match".to_string(), if j == m.params.branch_j { 1.0 } else { 0.0 });
        }
    }
    if let Some(m) = &measured {
        residuals.insert("radius_spread".to_string(), m.radius_spread);
        for f in &m.per_variant {
            let key = match f.variant {
                crate::conventions::SlowPhaseVariant::Expanded => "phase_drift_expanded",
                crate::conventions::SlowPhaseVariant::NormalForm => "phase_drift_normal_form",
            };
            residuals.insert(key.to_string(), f.drift);
        }
    }
    residuals.retain(|_, v| v.is_finite());

    Ok(ScatteringReport {
        eps: cfg.eps,
        alpha10: pre.map(|p| p.alpha10),
        phi10: pre.map(|p| p.phi10),
        p_re: predicted.map(|r| r.p.re),
        p_im: predicted.map(|r| r.p.im),
        special: predicted.map(|r| r.special),
        rho2: predicted.and_then(|r| r.rho2),
        upsilon: predicted.and_then(|r| r.upsilon),
        A00_pred: predicted.and_then(|r| r.a00),
        phi00_pred: predicted.and_then(|r| r.phi00),
        j_pred: predicted.and_then(|r| r.branch_j),
        theta_capture,
        A00_meas: measured.as_ref().map(|m| m.params.a00),
        phi00_meas: meas_phase,
        j_meas: measured.as_ref().map(|m| m.params.branch_j),
        variant_resolution: VariantResolution {
            conventions: conv,
            best_slow_phase: measured.as_ref().map(|m| m.best),
            prediction_error,
            fit_error,
        },
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(f: impl Fn(f64) -> Phi, a: f64, b: f64) -> Trajectory {
        let n = 2001;
        let pts: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let st: Vec<f64> = pts
            .iter()
            .flat_map(|&t| {
                let p = f(t);
                [p.re, p.im]
            })
            .collect();
        Trajectory::from_samples(
            EquationId::Primary,
            IndependentVar::Theta,
            2,
            pts,
            st,
            Tolerances::ode_default(),
        )
        .unwrap()
    }

    #[test]
    fn branch_trajectory_is_captured_from_the_start() {
        let traj = synthetic(|t| Phi::new((1.0 + t).max(0.0).sqrt(), 0.0), -1.0, 1.0);
        assert_eq!(detect_capture(&traj).unwrap(), Some(-1.0));
    }

    #[test]
    fn flat_small_signal_is_not_captured() {
        let traj = synthetic(|_| Phi::new(0.01, 0.0), -2.0, 1.0);
        assert_eq!(detect_capture(&traj).unwrap(), None);
    }

    #[test]
    fn short_span_is_rejected() {
        let traj = synthetic(|_| Phi::new(0.01, 0.0), -2.0, -0.8);
        assert!(matches!(detect_capture(&traj), Err(Error::SpanTooShort(_))));
    }

    #[test]
    fn capture_time_is_where_the_criterion_starts_holding() {
        // grows onto the branch at θ = −0.3
        let traj = synthetic(
            |t| {
                if t < -0.3 {
                    Phi::new(0.05, 0.0)
                } else {
                    Phi::new((1.0 + t).sqrt(), 0.0)
                }
            },
            -2.0,
            1.0,
        );
        let tc = detect_capture(&traj).unwrap().unwrap();
        assert!((tc + 0.3).abs() < 2e-3, "{tc}");
    }

    #[test]
    fn invalid_configs_rejected() {
        let init = Initial::State(Phi::new(0.02, 0.0));
        assert!(RunConfig::new(0.0, -2.0, 1.0, init).is_err());
        assert!(RunConfig::new(0.01, 1.0, -2.0, init).is_err());
        let cfg = RunConfig::new(0.01, -1.2, 1.0, Initial::Wkb(PreCaptureParams::new(0.5, 1.0).unwrap())).unwrap();
        assert!(matches!(cfg.initial_state(), Err(Error::OutOfDomain { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn raising_the_factor_never_moves_capture_earlier(
            f1 in 0.05f64..1.5, df in 0.0f64..1.0, amp in 0.0f64..0.5, k in 5.0f64..60.0
        ) {
            let traj = synthetic(
                |t| {
                    let r = (1.0 + t).max(0.0).sqrt() * (1.0 + amp * (k * t).sin());
                    Phi::new(r, 0.1 * (k * t).cos())
                },
                -1.5,
                1.0,
            );
            let a = detect_capture_with(&traj, f1, 0.5).unwrap();
            let b = detect_capture_with(&traj, f1 + df, 0.5).unwrap();
            match (a, b) {
                (Some(x), Some(y)) => prop_assert!(y >= x),
                (None, Some(_)) => prop_assert!(false, "higher factor captured, lower did not"),
                _ => {}
            }
        }
    }
}
