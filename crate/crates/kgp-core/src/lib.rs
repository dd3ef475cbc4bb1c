//! Spectral Galerkin machinery for 2π-time-periodic states of a linearly
//! coupled pair of nonlinear Klein-Gordon equations on the segment `[0, π]`
//! with Dirichlet ends:
//!
//! ```text
//! u_tt - u_xx + b u + eps v + f(t, x, u) = 0
//! v_tt - v_xx + b v + eps u + g(t, x, v) = 0
//! ```
//!
//! Fields are expanded over `sin(j x) e^{i k t}` with `j >= 1`, `k` an
//! integer, and real values enforced through the conjugacy `c_{j,-k} =
//! conj(c_{j,k})`. The d'Alembert operator is diagonal in this basis with
//! integer eigenvalues `j^2 - k^2`, which splits every truncation into a
//! kernel (`j = |k|`), a positive part and a negative part relative to the
//! mass shift `b`. Everything else builds on that splitting:
//!
//! - [`modes`]: mode indexing, eigenvalues, spectral classification and the
//!   distance from `-b` to the spectrum;
//! - [`field`]: truncated coefficient vectors, norms, inner products and the
//!   diagonal action of the shifted wave operator;
//! - [`grid`]: sine/Fourier collocation transforms between coefficients and
//!   space-time samples;
//! - [`nonlin`]: pointwise nonlinearities with growth metadata and the
//!   hypothesis checkers used to vet them;
//! - [`functional`]: the action functional, its gradient and energy
//!   decompositions;
//! - [`solver`]: Newton and Picard iterations on the strong residual,
//!   truncation refinement, continuation in the coupling and a multi-start
//!   search for nontrivial states;
//! - [`waverep`]: d'Alembert representation of kernel states by profiles
//!   `p(t+x) - p(t-x)` and an explicit inverse of the wave operator on its
//!   range.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats and the command
//! line front end live in the companion `kgp-cli` crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod field;
pub mod functional;
pub mod grid;
pub mod modes;
pub mod nonlin;
pub mod quad;
pub mod rng;
pub mod solver;
pub mod waverep;

pub use error::{Error, Result};
pub use field::{SpectralField, SpectralSplit};
pub use num_complex::Complex64;
pub use functional::{
    decomposition_report, DecompositionReport, EnergyBreakdown, EnergyModel, FieldPair, Forcing,
    PairSupport, ResidualNorms,
};
pub use grid::{dealias_sizes, from_grid, to_grid, GridField};
pub use modes::{spectral_gap, spectrum_contains, ModeClass, ModeIndex, SpectralGapInfo, Truncation};
pub use nonlin::{Amplitude, CheckOutcome, HypothesisReport, Nonlinearity, Witness};
pub use solver::{
    continuation_in_epsilon, fixed_point_solve, newton_solve, nontrivial_search, refine,
    InitialGuess, JacobianMode, Linesearch, RefinementSchedule, SolveConfig, SolveReport,
    SweepRecord, SweepReport,
};
pub use waverep::{
    continuity_report, kernel_profile, kernel_range_split, linf_report, orthogonality_check,
    range_condition, represent_w1, ContinuityReport, ContinuityRow, KernelProfile, LinfReport,
    RangeSolution, RangeTrace,
};
