use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} is outside its domain: {detail}")]
    OutOfDomain { what: &'static str, detail: String },

    #[error("step size underflow at t = {t} (required step {step:e} below minimum)")]
    StepUnderflow { t: f64, step: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("log-gamma pole at non-positive integer {0}")]
    PoleAtNonPositiveInteger(f64),

    #[error("T = {0} is within the guard band of a bifurcation value (T = -1 or T = 1)")]
    AtBifurcation(f64),

    #[error("fit window too short: {0}")]
    WindowTooShort(String),

    #[error("nonlinear fit did not converge: {0}")]
    FitDiverged(String),

    #[error("phase lies on the special (decay) line; rho and upsilon are undefined")]
    SpecialPhase,

    #[error("connection formula gives rho^2 = {0} < 0")]
    NegativeRho2(f64),

    #[error("overflow evaluating {0}")]
    Overflow(&'static str),

    #[error("trajectory is not captured on the requested window")]
    NotCaptured,

    #[error("trajectory span too short: {0}")]
    SpanTooShort(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::OutOfDomain { .. }
            | Error::PoleAtNonPositiveInteger(_)
            | Error::AtBifurcation(_)
            | Error::WindowTooShort(_)
            | Error::SpecialPhase
            | Error::NegativeRho2(_)
            | Error::NotCaptured
            | Error::SpanTooShort(_) => 2,
            Error::StepUnderflow { .. } | Error::NonFiniteState { .. } | Error::FitDiverged(_) | Error::Overflow(_) => {
                3
            }
            Error::Io(_) => 1,
        }
    }
}
