//! Error type shared by all modules of the crate.

use std::fmt;

/// Errors reported by the differentiator and its supporting modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Order parameter (or channel index `m`) outside the supported range.
    OrderOutOfRange { order: usize, max: usize },
    /// A 1-based coefficient index fell outside `1..=order`.
    IndexOutOfRange { index: usize, order: usize },
    /// A sample carried a NaN or infinite timestamp/value.
    NonFiniteSample { t: f64, value: f64 },
    /// First sample must have a nonnegative timestamp.
    InvalidStartTime { t: f64 },
    /// Samples must arrive with strictly increasing timestamps.
    NonMonotonicTime { state_t: f64, sample_t: f64 },
    /// The update gains divide by powers of t; an update at t = 0 is rejected.
    UpdateAtZeroTime,
    /// A slice argument had the wrong length for the configured order.
    LengthMismatch { expected: usize, actual: usize },
    /// An update or integration step produced a non-finite state.
    NonFiniteState { t: f64 },
    /// The integrator state diverged (step too large for the problem).
    Diverged { t: f64 },
    /// A linear system that should be nonsingular failed to pivot.
    SingularSystem,
    /// The Monte Carlo harness needs a minimum number of replicas.
    InsufficientRuns { runs: usize, min: usize },
    /// The generator polynomial degree exceeds what the order can track.
    SignalDegreeTooHigh { degree: usize, order: usize },
    /// A state snapshot could not be parsed.
    InvalidSnapshot(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OrderOutOfRange { order, max } => {
                write!(f, "order {order} outside supported range 1..={max}")
            }
            Error::IndexOutOfRange { index, order } => {
                write!(f, "index {index} outside 1..={order}")
            }
            Error::NonFiniteSample { t, value } => {
                write!(f, "non-finite sample (t = {t}, value = {value})")
            }
            Error::InvalidStartTime { t } => {
                write!(f, "first sample must have t >= 0, got {t}")
            }
            Error::NonMonotonicTime { state_t, sample_t } => write!(
                f,
                "sample at t = {sample_t} does not advance past state time {state_t}"
            ),
            Error::UpdateAtZeroTime => write!(f, "update at t = 0 is singular"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "expected {expected} entries, got {actual}")
            }
            Error::NonFiniteState { t } => {
                write!(f, "update at t = {t} produced a non-finite state")
            }
            Error::Diverged { t } => {
                write!(f, "integration diverged at t = {t}; reduce the step")
            }
            Error::SingularSystem => write!(f, "linear system is singular"),
            Error::InsufficientRuns { runs, min } => {
                write!(f, "{runs} replicas requested, at least {min} required")
            }
            Error::SignalDegreeTooHigh { degree, order } => write!(
                f,
                "polynomial degree {degree} needs order > {degree}, got {order}"
            ),
            Error::InvalidSnapshot(msg) => write!(f, "invalid snapshot: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
