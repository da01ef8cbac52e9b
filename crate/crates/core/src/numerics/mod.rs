//! Numerical kernels: adaptive integration, complex log-gamma, small fits.

pub mod gamma;
pub mod lsq;
pub mod ode;

pub use gamma::{arg_gamma_imag, log_gamma_complex};
pub use ode::{integrate_adaptive, EquationId, IndependentVar, Tolerances, Trajectory};
