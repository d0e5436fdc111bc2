use thiserror::Error;

use crate::ComplexValue;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `t` lies on the branch cut `(-inf, -1/4]` of `sqrt(1 + 4t)`.
    #[error(
        "t = {t} lies on the branch cut (-inf, -1/4] of sqrt(1 + 4t); \
         lossless passband inputs need positive loss resistances (regularized path)"
    )]
    Cut { t: ComplexValue },

    /// An iterate landed on the pole `p = -t` of the ladder recursion.
    #[error("iterate {index} hit the pole of the ladder recursion")]
    Pole { index: usize },

    #[error("degenerate ladder: {0}")]
    Degenerate(&'static str),

    /// The Möbius coordinate of `p-` is the point at infinity.
    #[error("p equals the repelling fixed point p-, Möbius coordinate is infinite")]
    Infinity,

    #[error("no convergence after {iterations} iterations (|gamma|^2 = {rate})")]
    NoConvergence { iterations: usize, rate: f64 },

    #[error("seed equals the unstable fixed point p-")]
    UnstableSeed,

    #[error("extrapolation fit failed: {0}")]
    Fit(String),

    #[error("phase jump of {jump} rad between omega = {omega_lo} and {omega_hi}; grid too coarse")]
    Unwrap { omega_lo: f64, omega_hi: f64, jump: f64 },

    #[error("packet spectrum leaks outside the passband: {reason} (leakage {leakage:.3e})")]
    Bandwidth { reason: String, leakage: f64 },

    #[error("no contracting disc found: radius fell below {floor:.3e}")]
    SearchFailure { floor: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
