//! Hybrid PSK-PAM ("concentric ring") constellations for links whose channel
//! estimate has an exact magnitude but a bounded phase error.
//!
//! - [`constellation`]: PSK-PAM, PSK and QAM construction.
//! - [`channel`]: Rayleigh fading, AWGN and the phase-biased estimate.
//! - [`decoder`]: the two-step ray-then-ring receiver and the coherent baseline.
//! - [`analytic`]: Rayleigh-averaged pairwise errors and the union bound.
//! - [`design`]: brute-force min-max search over `(K, N)`.
//! - [`harness`]: Monte Carlo sweeps, analytic curves, CSV/SVG output.

pub mod analytic;
pub mod channel;
pub mod constellation;
pub mod decoder;
pub mod design;
pub mod harness;
pub mod quadrature;

pub use num_complex::Complex64;
