//! Mode indexing and the spectrum of the periodic-Dirichlet wave operator.
//!
//! On `[0, 2π] x [0, π]` the d'Alembert operator acts diagonally on the
//! basis `sin(j x) e^{i k t}` with eigenvalue `j^2 - k^2`. The eigenvalues
//! are integers, so for a mass shift `b` the three-way classification of a
//! mode is decided exactly:
//!
//! ```text
//! kernel  :  j = |k|                (eigenvalue 0)
//! plus    :  j^2 - k^2 + b > 0, off the kernel diagonal
//! minus   :  j^2 - k^2 + b < 0
//! ```
//!
//! `-b` itself can only be an eigenvalue when `b` is an integer, and whether
//! it is reduces to factoring `b = (k - j)(k + j)` over integers of equal
//! parity, so membership and the distance `eta` from `-b` to the spectrum
//! are computed without any tolerance.

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// A single basis mode `sin(j x) e^{i k t}`.
///
/// `j >= 1` indexes the Dirichlet sine in space, `k` the temporal Fourier
/// harmonic and may be negative. Real fields store `k >= 0` only and derive
/// the rest by conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    /// Spatial index, at least 1.
    pub j: u32,
    /// Temporal harmonic.
    pub k: i32,
}

impl ModeIndex {
    /// Creates a mode index. `j` must be at least 1.
    pub fn new(j: u32, k: i32) -> Self {
        assert!(j >= 1, "spatial index must be at least 1");
        ModeIndex { j, k }
    }

    /// Eigenvalue `j^2 - k^2` of the wave operator on this mode.
    pub fn eigenvalue(&self) -> i64 {
        let j = self.j as i64;
        let k = self.k as i64;
        j * j - k * k
    }

    /// True when the mode sits on the characteristic diagonal `j = |k|`.
    pub fn is_kernel(&self) -> bool {
        self.j as i64 == (self.k as i64).abs()
    }

    /// Classifies the mode relative to the mass shift `b`.
    ///
    /// Fails with [`Error::SpectrumCollision`] when `j^2 - k^2 = -b`, since
    /// the shifted operator vanishes on the mode and no sign can be assigned.
    pub fn classify(&self, b: f64) -> Result<ModeClass> {
        if self.is_kernel() {
            return Ok(ModeClass::Kernel);
        }
        let shifted = self.eigenvalue() as f64 + b;
        if shifted > 0.0 {
            Ok(ModeClass::Plus)
        } else if shifted < 0.0 {
            Ok(ModeClass::Minus)
        } else {
            Err(Error::SpectrumCollision { b })
        }
    }
}

/// Spectral class of a mode relative to the shifted operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeClass {
    /// Characteristic modes `j = |k|`, annihilated by the wave operator.
    Kernel,
    /// Modes with `j^2 - k^2 + b > 0`.
    Plus,
    /// Modes with `j^2 - k^2 + b < 0`.
    Minus,
}

impl ModeClass {
    /// Short lowercase name, used by file formats.
    pub fn name(&self) -> &'static str {
        match self {
            ModeClass::Kernel => "kernel",
            ModeClass::Plus => "plus",
            ModeClass::Minus => "minus",
        }
    }
}

/// Rectangular truncation `1 <= j <= j_max`, `|k| <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Truncation {
    /// Largest spatial index.
    pub j_max: u32,
    /// Largest temporal harmonic in absolute value.
    pub k_max: u32,
}

impl Truncation {
    /// Creates a truncation. `j_max` must be at least 1; `k_max` may be 0
    /// for time-independent problems.
    pub fn new(j_max: u32, k_max: u32) -> Self {
        assert!(j_max >= 1, "truncation needs at least one spatial mode");
        Truncation { j_max, k_max }
    }

    /// Number of stored coefficients (`k >= 0` half only).
    pub fn n_stored(&self) -> usize {
        self.j_max as usize * (self.k_max as usize + 1)
    }

    /// Flat index of a stored mode, or `None` if `(j, k)` is outside the
    /// truncation or on the derived half `k < 0`.
    pub fn index_of(&self, j: u32, k: i32) -> Option<usize> {
        if j < 1 || j > self.j_max || k < 0 || k > self.k_max as i32 {
            return None;
        }
        Some((j as usize - 1) * (self.k_max as usize + 1) + k as usize)
    }

    /// True when the mode (either sign of `k`) lies inside the truncation.
    pub fn contains(&self, m: ModeIndex) -> bool {
        m.j >= 1 && m.j <= self.j_max && m.k.unsigned_abs() <= self.k_max
    }

    /// True when every mode of `self` is also a mode of `other`.
    pub fn subset_of(&self, other: &Truncation) -> bool {
        self.j_max <= other.j_max && self.k_max <= other.k_max
    }

    /// Stored modes in deterministic order: `j` ascending, then `k` from 0
    /// to `k_max`.
    pub fn iter_stored(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        let k_max = self.k_max as i32;
        (1..=self.j_max).flat_map(move |j| (0..=k_max).map(move |k| ModeIndex { j, k }))
    }

    /// Number of kernel modes inside the truncation, counting both signs
    /// of `k`.
    pub fn kernel_mode_count(&self) -> usize {
        2 * self.j_max.min(self.k_max) as usize
    }
}

/// Distance data between `-b` and the spectrum of the wave operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGapInfo {
    /// The mass shift the gap refers to.
    pub b: f64,
    /// `min |lambda + b|` over all eigenvalues `lambda`; zero exactly when
    /// `-b` is an eigenvalue.
    pub eta: f64,
    /// Conditioning constant `max(1/eta, 1)`; infinite on collision.
    pub kappa: f64,
    /// Whether `-b` is an eigenvalue.
    pub in_spectrum: bool,
    /// An eigenvalue attaining `eta`.
    pub attained_at: i64,
}

/// True when the integer `lambda` is an eigenvalue, i.e. `lambda = j^2 - k^2`
/// for some `j >= 1`, integer `k`.
///
/// Writing `lambda = d e` with `d = j - k`, `e = j + k` of equal parity shows
/// the positive eigenvalues are the odd numbers and the multiples of four,
/// while the negative ones (where `j >= 1` forces the factors apart) are
/// `-m` for odd `m >= 3` and for `m >= 8` divisible by four. Zero is the
/// kernel.
pub fn is_eigenvalue(lambda: i64) -> bool {
    if lambda == 0 {
        return true;
    }
    if lambda > 0 {
        return lambda % 2 == 1 || lambda % 4 == 0;
    }
    let m = -lambda;
    (m % 2 == 1 && m >= 3) || (m % 4 == 0 && m >= 8)
}

/// Whether `-b` is an eigenvalue of the wave operator.
///
/// Eigenvalues are integers, so any `b` with a fractional part can never
/// collide and the integer case is decided exactly by [`is_eigenvalue`].
pub fn spectrum_contains(b: f64) -> bool {
    if !b.is_finite() || b.fract() != 0.0 || b.abs() >= 9.0e18 {
        return false;
    }
    is_eigenvalue(-(b as i64))
}

/// Computes the spectral gap `eta = min |lambda + b|` and the conditioning
/// constant `kappa = max(1/eta, 1)`.
///
/// Only eigenvalues within `|lambda| <= ceil(b) + 2` can attain the minimum:
/// the kernel eigenvalue 0 already gives `|0 + b| = b`, and consecutive odd
/// negative eigenvalues are at most 2 apart, so everything outside that
/// window is at distance at least 2 from `-b`.
///
/// Requires a finite `b > 0`. On collision the info carries `eta = 0`,
/// `kappa = inf` and the `in_spectrum` flag instead of an error, so callers
/// that must reject such `b` (solver and CLI configuration) can do so with
/// full context.
pub fn spectral_gap(b: f64) -> Result<SpectralGapInfo> {
    if !b.is_finite() || b <= 0.0 {
        return Err(Error::InvalidConfig(alloc::format!(
            "mass shift must be finite and positive, got {b}"
        )));
    }
    if spectrum_contains(b) {
        return Ok(SpectralGapInfo {
            b,
            eta: 0.0,
            kappa: f64::INFINITY,
            in_spectrum: true,
            attained_at: -(b as i64),
        });
    }
    let window = b.ceil() as i64 + 2;
    let mut eta = f64::INFINITY;
    let mut attained_at = 0;
    for lambda in -window..=window {
        if !is_eigenvalue(lambda) {
            continue;
        }
        let dist = (lambda as f64 + b).abs();
        if dist < eta {
            eta = dist;
            attained_at = lambda;
        }
    }
    Ok(SpectralGapInfo {
        b,
        eta,
        kappa: (1.0 / eta).max(1.0),
        in_spectrum: false,
        attained_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_sample_modes() {
        assert_eq!(ModeIndex::new(1, 0).eigenvalue(), 1);
        assert_eq!(ModeIndex::new(3, 3).eigenvalue(), 0);
        assert_eq!(ModeIndex::new(3, -3).eigenvalue(), 0);
        assert_eq!(ModeIndex::new(2, 1).eigenvalue(), 3);
        assert_eq!(ModeIndex::new(1, 2).eigenvalue(), -3);
    }

    #[test]
    fn classification_at_unit_mass() {
        assert_eq!(ModeIndex::new(1, 1).classify(1.0).unwrap(), ModeClass::Kernel);
        assert_eq!(ModeIndex::new(2, 1).classify(1.0).unwrap(), ModeClass::Plus);
        assert_eq!(ModeIndex::new(1, 2).classify(1.0).unwrap(), ModeClass::Minus);
    }

    #[test]
    fn classification_detects_collision() {
        // j^2 - k^2 = -3 exactly cancels b = 3.
        let err = ModeIndex::new(1, 2).classify(3.0).unwrap_err();
        assert_eq!(err, Error::SpectrumCollision { b: 3.0 });
    }

    #[test]
    fn membership_examples() {
        assert!(!spectrum_contains(1.0));
        assert!(spectrum_contains(3.0));
        assert!(!spectrum_contains(0.5));
        assert!(!spectrum_contains(4.0));
        assert!(spectrum_contains(8.0));
    }

    #[test]
    fn membership_matches_brute_force() {
        // Independent route: search actual (j, k) pairs. Any collision with
        // an integer b <= 60 must show up with j, k <= 61.
        for b in 1..=60i64 {
            let mut found = false;
            for j in 1..=61i64 {
                for k in 0..=61i64 {
                    if j * j - k * k == -b {
                        found = true;
                    }
                }
            }
            assert_eq!(
                spectrum_contains(b as f64),
                found,
                "membership disagrees at b = {b}"
            );
        }
    }

    #[test]
    fn gap_examples() {
        let info = spectral_gap(1.0).unwrap();
        assert_eq!(info.eta, 1.0);
        assert_eq!(info.kappa, 1.0);
        assert_eq!(info.attained_at, 0);
        assert!(!info.in_spectrum);

        let info = spectral_gap(0.5).unwrap();
        assert_eq!(info.eta, 0.5);
        assert_eq!(info.kappa, 2.0);
        assert_eq!(info.attained_at, 0);

        // Nearest eigenvalue to -2.5 is -3; -2 is not an eigenvalue.
        let info = spectral_gap(2.5).unwrap();
        assert_eq!(info.eta, 0.5);
        assert_eq!(info.attained_at, -3);
    }

    #[test]
    fn gap_flags_collision() {
        let info = spectral_gap(3.0).unwrap();
        assert!(info.in_spectrum);
        assert_eq!(info.eta, 0.0);
        assert!(info.kappa.is_infinite());
    }

    #[test]
    fn gap_rejects_nonpositive_mass() {
        assert!(spectral_gap(0.0).is_err());
        assert!(spectral_gap(-1.0).is_err());
        assert!(spectral_gap(f64::NAN).is_err());
    }

    #[test]
    fn gap_is_a_lower_bound_over_modes() {
        for &b in &[0.5, 1.0, 2.5, 7.3, 12.0, 100.3] {
            let eta = spectral_gap(b).unwrap().eta;
            for j in 1..=200u32 {
                for k in -200..=200i32 {
                    let m = ModeIndex::new(j, k);
                    let dist = (m.eigenvalue() as f64 + b).abs();
                    assert!(
                        dist + 1e-14 >= eta,
                        "mode ({j},{k}) beats eta at b = {b}: {dist} < {eta}"
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvalue_set_matches_brute_force() {
        // Realizable values of j^2 - k^2 over a generous index range.
        let mut reachable = std::collections::HashSet::new();
        for j in 1..=400i64 {
            for k in 0..=400i64 {
                let l = j * j - k * k;
                if l.abs() <= 300 {
                    reachable.insert(l);
                }
            }
        }
        for lambda in -300..=300i64 {
            assert_eq!(
                is_eigenvalue(lambda),
                reachable.contains(&lambda),
                "disagreement at lambda = {lambda}"
            );
        }
    }

    #[test]
    fn truncation_indexing_roundtrip() {
        let t = Truncation::new(4, 3);
        assert_eq!(t.n_stored(), 16);
        let collected: Vec<_> = t.iter_stored().collect();
        assert_eq!(collected.len(), 16);
        for (i, m) in collected.iter().enumerate() {
            assert_eq!(t.index_of(m.j, m.k), Some(i));
        }
        assert_eq!(t.index_of(5, 0), None);
        assert_eq!(t.index_of(1, -1), None);
        assert!(t.contains(ModeIndex::new(1, -3)));
        assert!(!t.contains(ModeIndex::new(1, -4)));
    }

    #[test]
    fn kernel_count_counts_both_signs() {
        assert_eq!(Truncation::new(3, 3).kernel_mode_count(), 6);
        assert_eq!(Truncation::new(5, 2).kernel_mode_count(), 4);
        assert_eq!(Truncation::new(2, 0).kernel_mode_count(), 0);
    }
}
