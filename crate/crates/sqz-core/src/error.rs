//! Engine error type.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by the engine.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Evaluation outside a time function's declared domain.
    Domain { t: f64 },
    /// An argument violated a documented precondition or invariant.
    InvalidArgument(String),
    /// Adaptive step control underflowed on the given interval.
    Convergence { t_from: f64, t_to: f64 },
    /// A closed form was requested outside its stability region
    /// (`|eps|^2 >= kappa^2 + 4 Omega^2`).
    Unstable { eps_mag: f64, kappa: f64, omega: f64 },
    /// Quadrature refinement stalled above the requested tolerance; both the
    /// last estimate and its refinement are reported.
    Accuracy { estimate: f64, refined: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { t } => write!(f, "time {t} is outside the declared domain"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Convergence { t_from, t_to } => write!(
                f,
                "integrator step size underflowed on [{t_from}, {t_to}]"
            ),
            Error::Unstable { eps_mag, kappa, omega } => write!(
                f,
                "unstable drive: |eps| = {eps_mag} violates |eps|^2 < kappa^2 + 4 Omega^2 \
                 (kappa = {kappa}, Omega = {omega})"
            ),
            Error::Accuracy { estimate, refined } => write!(
                f,
                "quadrature did not resolve: estimate {estimate}, refined {refined}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
