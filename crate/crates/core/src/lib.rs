//! Impedance of finite and infinite LC ladder networks.
//!
//! * [`ladder`]: the impedance recursion, its fixed points and Möbius-coordinate
//!   convergence analysis, plus the resistive-ladder partial sums.
//! * [`lowpass`]: low-pass and high-pass LC parametrization with small loss
//!   resistances and the lossless limits on either side of the cutoff.
//! * [`propagation`]: per-section transfer ratio, phase, group delay and
//!   wave-packet propagation into the infinite ladder.
//! * [`fixedpoint`]: generic map iteration, sampled contraction checks and the
//!   quadratic / tangent counterexamples.
//! * [`output`]: number formatting and CSV tables shared by the CLI.

pub mod error;
pub mod fixedpoint;
pub mod ladder;
pub mod lowpass;
pub mod output;
pub mod propagation;

pub use error::{Error, Result};

/// Complex scalar used for impedances, ratios and spectra.
pub type ComplexValue = num_complex::Complex64;
