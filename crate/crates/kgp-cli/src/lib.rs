//! Command line front end for the coupled Klein-Gordon spectral solver.
//!
//! The library half of the binary: configuration parsing and validation,
//! file formats, JSON report mirrors, and the five command implementations.
//! Everything here is deterministic; identical configuration and seed
//! produce byte-identical output files.

pub mod commands;
pub mod config;
pub mod io;
pub mod json;

use std::fmt;

/// Exit discipline of the binary: 0 success, 1 numerical failure, 2
/// configuration or parse error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// Rejected before any computation; exit code 2.
    Config(String),
    /// Computation ran and failed; exit code 1.
    Numerical(String),
}

impl Failure {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }

    /// Human-readable message.
    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

/// Sorts library errors into the exit-code classes.
///
/// Everything that a well-formed configuration rules out up front counts
/// as a configuration error; breakdowns and unsatisfiable solvability
/// conditions surface as numerical failures.
pub fn classify(err: kgp_core::Error) -> Failure {
    use kgp_core::Error::*;
    match err {
        SpectrumCollision { .. }
        | TruncationMismatch
        | AliasedGrid { .. }
        | NonPositiveAmplitude
        | InvalidConfig(_) => Failure::Config(err.to_string()),
        NotInRange { .. } | NotKernel { .. } | LinearSolveBreakdown { .. } => {
            Failure::Numerical(err.to_string())
        }
    }
}

/// Parallelism cap requested through `KGP_THREADS`; 0 means auto.
///
/// The current implementation computes on a single thread, so the cap is
/// recorded in reports rather than acted on, but malformed values are
/// still rejected.
pub fn thread_cap() -> Result<u64, Failure> {
    match std::env::var("KGP_THREADS") {
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .map_err(|_| Failure::Config(format!("KGP_THREADS must be a nonnegative integer, got {raw:?}"))),
        Err(_) => Ok(0),
    }
}
