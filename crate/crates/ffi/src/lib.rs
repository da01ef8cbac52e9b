//! C interface.
//!
//! Every function returns an [`ArStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and can be read with
//! [`ar_last_error`]. Trajectories are opaque handles released with
//! [`ar_trajectory_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use autoresonance::connection::{capture_params, special_phases};
use autoresonance::conventions::ConstantVariantPost;
use autoresonance::harness::{detect_capture, simulate, Initial, RunConfig};
use autoresonance::model::{equilibria, EquilibriumKind, Phi};
use autoresonance::numerics::{arg_gamma_imag, Tolerances, Trajectory};
use autoresonance::painleve::{integrate_painleve, PainleveSeed};
use autoresonance::pre::PreCaptureParams;
use autoresonance::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    OutOfDomain = 3,
    NumericFailure = 4,
    NotCaptured = 5,
    BufferTooSmall = 6,
    Io = 7,
    Panic = 8,
}

/// Closed form used for ρ² and υ.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArConstantVariant {
    Plain = 0,
    Ln2 = 1,
    Reflected = 2,
}

impl From<ArConstantVariant> for ConstantVariantPost {
    fn from(v: ArConstantVariant) -> Self {
        match v {
            ArConstantVariant::Plain => ConstantVariantPost::Plain,
            ArConstantVariant::Ln2 => ConstantVariantPost::Ln2,
            ArConstantVariant::Reflected => ConstantVariantPost::Reflected,
        }
    }
}

/// Equilibrium of the frozen system. `kind` is 0 for a center, 1 for a saddle.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArEquilibrium {
    pub re: f64,
    pub im: f64,
    pub kind: u8,
    pub family: u8,
}

/// Connection data. Undefined entries (special phase) are NaN, and
/// `branch_j` is 0.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArConnection {
    pub p_re: f64,
    pub p_im: f64,
    pub special: bool,
    pub rho2: f64,
    pub upsilon: f64,
    pub a00: f64,
    pub phi00: f64,
    pub branch_j: u8,
}

/// Opaque trajectory.
pub struct ArTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ArStatus {
    match e {
        Error::InvalidInput(_) | Error::SpecialPhase | Error::NegativeRho2(_) | Error::PoleAtNonPositiveInteger(_) => {
            ArStatus::InvalidInput
        }
        Error::OutOfDomain { .. } | Error::AtBifurcation(_) | Error::WindowTooShort(_) | Error::SpanTooShort(_) => {
            ArStatus::OutOfDomain
        }
        Error::StepUnderflow { .. } | Error::NonFiniteState { .. } | Error::FitDiverged(_) | Error::Overflow(_) => {
            ArStatus::NumericFailure
        }
        Error::NotCaptured => ArStatus::NotCaptured,
        Error::Io(_) => ArStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (ArStatus, String)>) -> ArStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ArStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ArStatus::Panic
        }
    }
}

fn lib(e: Error) -> (ArStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (ArStatus, String) {
    (ArStatus::NullPointer, format!("{name} is null"))
}

fn tolerances(base: Tolerances, tol: f64) -> Result<Tolerances, (ArStatus, String)> {
    if tol == 0.0 {
        return Ok(base);
    }
    let t = base.with_tol(tol);
    t.validate().map_err(lib)?;
    Ok(t)
}

fn emit_handle(out: *mut *mut ArTrajectory, traj: Trajectory) {
    // SAFETY: callers check `out` for null first
    unsafe { *out = Box::into_raw(Box::new(ArTrajectory(traj))) };
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Integrates the detuned equation from φ(θ0) = re + i·im. `tol` = 0
/// keeps the default tolerance.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ar_simulate(
    eps: f64,
    theta0: f64,
    theta1: f64,
    re: f64,
    im: f64,
    tol: f64,
    out: *mut *mut ArTrajectory,
) -> ArStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = RunConfig::new(eps, theta0, theta1, Initial::State(Phi::new(re, im))).map_err(lib)?;
        cfg.tolerances = tolerances(cfg.tolerances, tol)?;
        emit_handle(out, simulate(&cfg).map_err(lib)?);
        Ok(())
    })
}

/// Same as [`ar_simulate`] but starts on the pre-capture WKB solution
/// with amplitude `alpha10` and phase `phi10`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ar_simulate_wkb(
    eps: f64,
    theta0: f64,
    theta1: f64,
    alpha10: f64,
    phi10: f64,
    tol: f64,
    out: *mut *mut ArTrajectory,
) -> ArStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pre = PreCaptureParams::new(alpha10, phi10).map_err(lib)?;
        let mut cfg = RunConfig::new(eps, theta0, theta1, Initial::Wkb(pre)).map_err(lib)?;
        cfg.tolerances = tolerances(cfg.tolerances, tol)?;
        emit_handle(out, simulate(&cfg).map_err(lib)?);
        Ok(())
    })
}

/// Integrates the layer equation v'' = zv − 2v³ from its −∞ data seeded at
/// `z0` up to `z1`. States are (v, v').
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ar_painleve(
    alpha: f64,
    phi: f64,
    z0: f64,
    z1: f64,
    tol: f64,
    out: *mut *mut ArTrajectory,
) -> ArStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let seed = PainleveSeed::new(alpha, phi, z0).map_err(lib)?;
        let t = tolerances(Tolerances::painleve_default(), tol)?;
        emit_handle(out, integrate_painleve(&seed, z1, &t).map_err(lib)?);
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ar_trajectory_len(traj: *const ArTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copies up to `cap` samples: abscissae into `points` and the two state
/// components interleaved into `states` (2·cap entries). Fails with
/// `BufferTooSmall` when `cap` is less than the length.
///
/// # Safety
/// `traj` must be a live handle; `points` and `states` must hold `cap` and
/// `2·cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ar_trajectory_copy(
    traj: *const ArTrajectory,
    points: *mut f64,
    states: *mut f64,
    cap: usize,
) -> ArStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        if points.is_null() || states.is_null() {
            return Err(null("buffer"));
        }
        let n = t.0.len();
        if cap < n {
            return Err((
                ArStatus::BufferTooSmall,
                format!("need {n} samples, have room for {cap}"),
            ));
        }
        let pts = std::slice::from_raw_parts_mut(points, n);
        let st = std::slice::from_raw_parts_mut(states, 2 * n);
        for (i, (z, s)) in t.0.iter().enumerate() {
            pts[i] = z;
            st[2 * i] = s[0];
            st[2 * i + 1] = s[1];
        }
        Ok(())
    })
}

/// Capture time by the default criterion. `*captured` is false and
/// `*theta_capture` NaN when the run is not captured.
///
/// # Safety
/// `traj` must be a live handle from [`ar_simulate`] or
/// [`ar_simulate_wkb`]; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_detect_capture(
    traj: *const ArTrajectory,
    captured: *mut bool,
    theta_capture: *mut f64,
) -> ArStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        if captured.is_null() || theta_capture.is_null() {
            return Err(null("out"));
        }
        let tc = detect_capture(&t.0).map_err(lib)?;
        *captured = tc.is_some();
        *theta_capture = tc.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `traj` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ar_trajectory_free(traj: *mut ArTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Equilibria of the frozen system at `t_const`. At most `cap` are
/// written; `*count` receives the total (at most 5).
///
/// # Safety
/// `out` must hold `cap` entries; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_equilibria(
    t_const: f64,
    out: *mut ArEquilibrium,
    cap: usize,
    count: *mut usize,
) -> ArStatus {
    guard(|| {
        if count.is_null() || (out.is_null() && cap > 0) {
            return Err(null("out"));
        }
        let eq = equilibria(t_const).map_err(lib)?;
        *count = eq.len();
        if cap < eq.len() {
            return Err((
                ArStatus::BufferTooSmall,
                format!("{} equilibria, room for {cap}", eq.len()),
            ));
        }
        for (i, e) in eq.iter().enumerate() {
            *out.add(i) = ArEquilibrium {
                re: e.location.re,
                im: e.location.im,
                kind: match e.kind {
                    EquilibriumKind::Center => 0,
                    EquilibriumKind::Saddle => 1,
                },
                family: e.family,
            };
        }
        Ok(())
    })
}

/// Connection data for layer parameters (α̃, φ̃) with identity matching.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_connect(
    alpha: f64,
    phi: f64,
    variant: ArConstantVariant,
    out: *mut ArConnection,
) -> ArStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pre = PreCaptureParams::new(alpha, phi).map_err(lib)?;
        let r = capture_params(pre, variant.into()).map_err(lib)?;
        *out = ArConnection {
            p_re: r.p.re,
            p_im: r.p.im,
            special: r.special,
            rho2: r.rho2.unwrap_or(f64::NAN),
            upsilon: r.upsilon.unwrap_or(f64::NAN),
            a00: r.a00.unwrap_or(f64::NAN),
            phi00: r.phi00.unwrap_or(f64::NAN),
            branch_j: r.branch_j.unwrap_or(0),
        };
        Ok(())
    })
}

/// The two phases at which amplitude `alpha` leads to decay.
///
/// # Safety
/// `out` must hold two doubles.
#[no_mangle]
pub unsafe extern "C" fn ar_special_phases(alpha: f64, out: *mut f64) -> ArStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = special_phases(alpha).map_err(lib)?;
        *out = s[0];
        *out.add(1) = s[1];
        Ok(())
    })
}

/// arg Γ(ix) in (−π, π].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar_arg_gamma_imag(x: f64, out: *mut f64) -> ArStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = arg_gamma_imag(x).map_err(lib)?;
        Ok(())
    })
}
