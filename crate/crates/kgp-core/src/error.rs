//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `-b` collides with an eigenvalue of the wave operator, so the shifted
    /// operator is singular and the splitting is undefined.
    SpectrumCollision {
        /// The offending mass shift.
        b: f64,
    },
    /// Two fields that must share a truncation do not.
    TruncationMismatch,
    /// A collocation grid is too coarse to resolve the requested truncation
    /// without aliasing.
    AliasedGrid {
        /// Time points provided.
        nt: usize,
        /// Interior space points provided.
        nx: usize,
        /// Minimum time points required.
        need_nt: usize,
        /// Minimum space points required.
        need_nx: usize,
    },
    /// An amplitude coefficient is not strictly positive somewhere.
    NonPositiveAmplitude,
    /// A field handed to the explicit wave-operator inverse has kernel
    /// content, so it is not in the range.
    NotInRange {
        /// Sup of the range-condition violation.
        sup: f64,
    },
    /// A field treated as a kernel element carries a mode off the diagonal
    /// `j = |k|`.
    NotKernel {
        /// Offending spatial index.
        j: u32,
        /// Offending temporal index.
        k: i32,
        /// Magnitude of the offending coefficient.
        magnitude: f64,
    },
    /// The inner linear solve produced a non-finite iterate.
    LinearSolveBreakdown {
        /// Krylov iteration at which the breakdown was detected.
        iteration: usize,
    },
    /// A configuration value is out of its admissible range.
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SpectrumCollision { b } => {
                write!(f, "-b is an eigenvalue of the wave operator (b = {b})")
            }
            Error::TruncationMismatch => write!(f, "fields have different truncations"),
            Error::AliasedGrid {
                nt,
                nx,
                need_nt,
                need_nx,
            } => write!(
                f,
                "grid {nt}x{nx} aliases the truncation (need at least {need_nt}x{need_nx})"
            ),
            Error::NonPositiveAmplitude => {
                write!(f, "amplitude must be strictly positive everywhere")
            }
            Error::NotInRange { sup } => write!(
                f,
                "field is not in the range of the wave operator (range condition sup = {sup:e})"
            ),
            Error::NotKernel { j, k, magnitude } => write!(
                f,
                "field is not a kernel element (mode ({j},{k}) has magnitude {magnitude:e})"
            ),
            Error::LinearSolveBreakdown { iteration } => {
                write!(f, "linear solver breakdown at iteration {iteration}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
