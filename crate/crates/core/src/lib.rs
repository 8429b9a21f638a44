//! High-order online numerical differentiation by cumulative smoothing.
//!
//! The differentiator tracks a signal and its first `n - 1` derivatives
//! from a stream of (time, value) samples. Its correction gains are fixed
//! combinatorial constants divided by growing powers of time, so there is
//! nothing to tune: no window length, no forgetting factor, no noise
//! model. For `n = 1` the scheme reduces exactly to the running mean, for
//! `n = 2` to Holt-style double smoothing with shrinking factors, and in
//! general it behaves as polynomial regression over the whole history with
//! equal weights, filtering additive white noise as it goes.
//!
//! Modules:
//!
//! - [`coefficients`] — exact (big-integer/rational) gain and solution
//!   tables and the identity suite that validates them.
//! - [`differentiator`] — the streaming state machine.
//! - [`taylor`] — polynomial snapshots: interpolation, extrapolation, and
//!   recentering to global polynomial coefficients.
//! - [`continuous`] — the underlying ODE integrated with RK4, closed-form
//!   error evaluation, and the Lipschitz error bound, used to
//!   cross-validate the discrete path.
//! - [`signals`] — seeded signal generators and the Monte Carlo harness
//!   for the noise-variance decay law.
//!
//! # Example
//!
//! ```
//! use hound_core::{Differentiator, DifferentiatorConfig, Sample};
//!
//! let mut diff = Differentiator::new(
//!     DifferentiatorConfig::new(3),
//!     Sample::new(0.0, 1.0),
//! )
//! .unwrap();
//! for step in 1..=2000u64 {
//!     let t = step as f64;
//!     let f = 1.0 + 2.0 * t + 3.0 * t * t;
//!     diff.update(Sample::new(t, f)).unwrap();
//! }
//! let z = diff.estimates();
//! assert!((z[2] - 6.0).abs() < 1e-3); // second derivative of 3t^2
//! ```

pub mod coefficients;
pub mod continuous;
pub mod differentiator;
pub mod error;
pub mod signals;
pub mod taylor;

pub use coefficients::{CharPoly, GainTable, IdentityOutcome, IDENTITY_MAX_ORDER, MAX_ORDER};
pub use continuous::{ContinuousRun, ErrorBoundParams, Trajectory};
pub use differentiator::{Differentiator, DifferentiatorConfig, Sample, Update};
pub use error::Error;
pub use signals::{Harmonic, SignalSpec, VarianceSlopeReport};
pub use taylor::TaylorModel;
