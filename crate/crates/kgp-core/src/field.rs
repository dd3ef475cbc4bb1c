//! Truncated spectral fields and the diagonal calculus on them.
//!
//! A real field on `[0, 2π] x [0, π]` is stored as the complex coefficients
//! `c_{j,k}` of `sin(j x) e^{i k t}` for `1 <= j <= j_max`, `0 <= k <=
//! k_max`; the negative harmonics are implied by `c_{j,-k} = conj(c_{j,k})`
//! and the `k = 0` coefficients are kept real. All norms and inner products
//! sum over the full index set (both signs of `k`), so a stored coefficient
//! with `k > 0` counts twice:
//!
//! ```text
//! ||u||_{L2}^2   = pi^2 sum |c_{j,k}|^2
//! <u, v>_{L2}    = pi^2 sum c_{j,k} conj(d_{j,k})
//! ||u||_{H}^2    = pi^2 [ sum_{j != |k|} |j^2 - k^2 + b| |c_{j,k}|^2
//!                       + sum_{j = |k|} |c_{j,k}|^2 ]
//! ```
//!
//! With this scaling the coefficient sums match the space-time quadrature of
//! the reconstructed field exactly, e.g. `sin(x) cos(t)` has stored
//! coefficient 1/2 at `(1, 1)` and squared `L2` norm `pi^2 / 2`.

use crate::error::{Error, Result};
use crate::modes::{ModeClass, ModeIndex, Truncation};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// A real space-time field in truncated spectral form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    trunc: Truncation,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// The zero field on the given truncation.
    pub fn zero(trunc: Truncation) -> Self {
        SpectralField {
            trunc,
            coeffs: vec![Complex64::new(0.0, 0.0); trunc.n_stored()],
        }
    }

    /// Builds a field by evaluating `f` on every stored mode.
    ///
    /// The imaginary part returned for `k = 0` modes is discarded to keep
    /// the field real.
    pub fn from_fn(trunc: Truncation, mut f: impl FnMut(ModeIndex) -> Complex64) -> Self {
        let mut out = SpectralField::zero(trunc);
        for m in trunc.iter_stored() {
            let mut c = f(m);
            if m.k == 0 {
                c.im = 0.0;
            }
            let idx = trunc.index_of(m.j, m.k).unwrap();
            out.coeffs[idx] = c;
        }
        out
    }

    /// The normalized single real mode with the given amplitude:
    /// `a sin(j x)` for `k = 0` and `a sqrt(2) sin(j x) cos(|k| t)` for
    /// `k != 0`, so that `||mode||_{L2} = |a| pi` in every case.
    ///
    /// In stored coefficients this puts `a` at `(j, 0)` respectively
    /// `a / sqrt(2)` at `(j, |k|)`.
    pub fn mode(trunc: Truncation, m: ModeIndex, amplitude: f64) -> Self {
        assert!(
            trunc.contains(m),
            "mode ({}, {}) outside the truncation",
            m.j,
            m.k
        );
        let mut out = SpectralField::zero(trunc);
        let k = m.k.unsigned_abs() as i32;
        let idx = trunc.index_of(m.j, k).unwrap();
        let stored = if k == 0 { amplitude } else { amplitude / SQRT_2 };
        out.coeffs[idx] = Complex64::new(stored, 0.0);
        out
    }

    /// The truncation this field lives on.
    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// Raw stored coefficients, `j`-major with `k` from 0 to `k_max`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `sin(j x) e^{i k t}` for any sign of `k`; zero outside
    /// the truncation.
    pub fn get(&self, j: u32, k: i32) -> Complex64 {
        if k < 0 {
            return self.get(j, -k).conj();
        }
        match self.trunc.index_of(j, k) {
            Some(idx) => self.coeffs[idx],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets a stored coefficient. `k` must be non-negative and inside the
    /// truncation; a `k = 0` value must be real.
    pub fn set(&mut self, j: u32, k: i32, value: Complex64) {
        let idx = self
            .trunc
            .index_of(j, k)
            .expect("set: mode outside stored range");
        assert!(
            k != 0 || value.im == 0.0,
            "zero-harmonic coefficients must be real"
        );
        self.coeffs[idx] = value;
    }

    /// Largest stored coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        let mut m: f64 = 0.0;
        for c in &self.coeffs {
            m = m.max(c.norm_sqr().sqrt());
        }
        m
    }

    fn check_same_trunc(&self, other: &SpectralField) -> Result<()> {
        if self.trunc == other.trunc {
            Ok(())
        } else {
            Err(Error::TruncationMismatch)
        }
    }

    /// Weight of a stored mode in the full-index sums: 1 for `k = 0`, 2 for
    /// `k > 0` (its conjugate partner).
    fn pair_weight(k: i32) -> f64 {
        if k == 0 {
            1.0
        } else {
            2.0
        }
    }

    /// Squared `L2` norm `pi^2 sum |c_{j,k}|^2` over both signs of `k`.
    pub fn l2_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            s += Self::pair_weight(m.k) * self.coeffs[idx].norm_sqr();
        }
        PI * PI * s
    }

    /// `L2` norm of the field.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `L2` inner product `pi^2 sum c_{j,k} conj(d_{j,k})`; real because
    /// the conjugate harmonics pair up.
    pub fn l2_inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_trunc(other)?;
        let mut s = 0.0;
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            let prod = self.coeffs[idx] * other.coeffs[idx].conj();
            s += Self::pair_weight(m.k) * prod.re;
        }
        Ok(PI * PI * s)
    }

    /// `L2` distance between two fields on the same truncation.
    pub fn l2_distance(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_trunc(other)?;
        let mut s = 0.0;
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            let d = self.coeffs[idx] - other.coeffs[idx];
            s += Self::pair_weight(m.k) * d.norm_sqr();
        }
        Ok((PI * PI * s).sqrt())
    }

    /// Squared working-space norm: eigenvalue weight `|j^2 - k^2 + b|` off
    /// the kernel, plain `L2` weight on it.
    pub fn h_norm_sq(&self, b: f64) -> Result<f64> {
        let mut s = 0.0;
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            let w = match m.classify(b)? {
                ModeClass::Kernel => 1.0,
                _ => (m.eigenvalue() as f64 + b).abs(),
            };
            s += Self::pair_weight(m.k) * w * self.coeffs[idx].norm_sqr();
        }
        Ok(PI * PI * s)
    }

    /// Working-space norm of the field.
    pub fn h_norm(&self, b: f64) -> Result<f64> {
        Ok(self.h_norm_sq(b)?.sqrt())
    }

    /// Squared dual-space norm: weight `1 / |j^2 - k^2 + b|` off the
    /// kernel, 1 on it. This is the norm residuals are measured in.
    pub fn h_dual_norm_sq(&self, b: f64) -> Result<f64> {
        let mut s = 0.0;
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            let w = match m.classify(b)? {
                ModeClass::Kernel => 1.0,
                _ => 1.0 / (m.eigenvalue() as f64 + b).abs(),
            };
            s += Self::pair_weight(m.k) * w * self.coeffs[idx].norm_sqr();
        }
        Ok(PI * PI * s)
    }

    /// Dual-space norm of the field.
    pub fn h_dual_norm(&self, b: f64) -> Result<f64> {
        Ok(self.h_dual_norm_sq(b)?.sqrt())
    }

    /// Quadratic form `<(L + b) u, u>` of the shifted wave operator,
    /// `pi^2 sum (j^2 - k^2 + b) |c_{j,k}|^2`.
    pub fn quadratic_form_shifted(&self, b: f64) -> f64 {
        let mut s = 0.0;
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            s += Self::pair_weight(m.k)
                * (m.eigenvalue() as f64 + b)
                * self.coeffs[idx].norm_sqr();
        }
        PI * PI * s
    }

    /// Quadratic form `<L u, u>` of the bare wave operator.
    pub fn quadratic_form_wave(&self) -> f64 {
        let mut s = 0.0;
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            s += Self::pair_weight(m.k) * m.eigenvalue() as f64 * self.coeffs[idx].norm_sqr();
        }
        PI * PI * s
    }

    /// Splits the field into its plus, minus and kernel components relative
    /// to the mass shift `b`. The three parts recombine to the original
    /// field and are mutually `L2`-orthogonal.
    pub fn split(&self, b: f64) -> Result<SpectralSplit> {
        let mut plus = SpectralField::zero(self.trunc);
        let mut minus = SpectralField::zero(self.trunc);
        let mut kernel = SpectralField::zero(self.trunc);
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            let c = self.coeffs[idx];
            match m.classify(b)? {
                ModeClass::Plus => plus.coeffs[idx] = c,
                ModeClass::Minus => minus.coeffs[idx] = c,
                ModeClass::Kernel => kernel.coeffs[idx] = c,
            }
        }
        Ok(SpectralSplit {
            plus,
            minus,
            kernel,
        })
    }

    /// Applies the diagonal operator `L + b`, scaling each mode by
    /// `j^2 - k^2 + b`.
    pub fn apply_l_plus_b(&self, b: f64) -> SpectralField {
        let mut out = self.clone();
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            out.coeffs[idx] = self.coeffs[idx] * (m.eigenvalue() as f64 + b);
        }
        out
    }

    /// Inverts the diagonal operator `L + b`, dividing each mode by
    /// `j^2 - k^2 + b`. Fails when some divisor vanishes, i.e. when `-b`
    /// is an eigenvalue met by the truncation.
    pub fn invert_l_plus_b(&self, b: f64) -> Result<SpectralField> {
        let mut out = self.clone();
        for m in self.trunc.iter_stored() {
            let idx = self.trunc.index_of(m.j, m.k).unwrap();
            let d = m.eigenvalue() as f64 + b;
            if d == 0.0 {
                return Err(Error::SpectrumCollision { b });
            }
            out.coeffs[idx] = self.coeffs[idx] / d;
        }
        Ok(out)
    }

    /// Zero-pads the field onto a containing truncation.
    pub fn embed(&self, target: Truncation) -> Result<SpectralField> {
        if !self.trunc.subset_of(&target) {
            return Err(Error::TruncationMismatch);
        }
        let mut out = SpectralField::zero(target);
        for m in self.trunc.iter_stored() {
            let src = self.trunc.index_of(m.j, m.k).unwrap();
            let dst = target.index_of(m.j, m.k).unwrap();
            out.coeffs[dst] = self.coeffs[src];
        }
        Ok(out)
    }

    /// Sum of two fields on the same truncation.
    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_trunc(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    /// Difference of two fields on the same truncation.
    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_trunc(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    /// Scales the field by a real factor.
    pub fn scale(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    /// `self + s * other` on the same truncation.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_trunc(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        Ok(out)
    }

    /// Evaluates the field at an arbitrary space-time point,
    /// `sum_j sin(j x) [c_{j,0} + 2 Re sum_{k >= 1} c_{j,k} e^{i k t}]`.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let k_max = self.trunc.k_max as i32;
        let (sin_t, cos_t) = t.sin_cos();
        let rot = Complex64::new(cos_t, sin_t);
        let mut total = 0.0;
        for j in 1..=self.trunc.j_max {
            let mut time_part = 0.0;
            let mut phase = Complex64::new(1.0, 0.0);
            for k in 0..=k_max {
                let idx = self.trunc.index_of(j, k).unwrap();
                let c = self.coeffs[idx];
                let term = c * phase;
                time_part += if k == 0 { term.re } else { 2.0 * term.re };
                phase *= rot;
            }
            total += (j as f64 * x).sin() * time_part;
        }
        total
    }
}

/// The three spectral components of a field relative to a mass shift.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    /// Modes with positive shifted eigenvalue, off the kernel.
    pub plus: SpectralField,
    /// Modes with negative shifted eigenvalue.
    pub minus: SpectralField,
    /// Characteristic modes `j = |k|`.
    pub kernel: SpectralField,
}

impl SpectralSplit {
    /// Reassembles the original field.
    pub fn recombine(&self) -> SpectralField {
        self.plus
            .add(&self.minus)
            .and_then(|s| s.add(&self.kernel))
            .expect("split parts share a truncation")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(trunc: Truncation, rng: &mut ChaCha8Rng) -> SpectralField {
        SpectralField::from_fn(trunc, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn mode_l2_norm_is_pi_times_amplitude() {
        let t = Truncation::new(4, 4);
        for (j, k, a) in [(1, 0, 1.0), (2, 1, 1.0), (1, 1, 0.7), (3, -2, 2.0)] {
            let u = SpectralField::mode(t, ModeIndex::new(j, k), a);
            let expect = (a as f64).abs() * PI;
            assert!((u.l2_norm() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn h_norm_frozen_values() {
        let t = Truncation::new(4, 4);
        // Plus mode (2, 1): |3 + 1| = 4, squared norm pi^2 * 4.
        let u = SpectralField::mode(t, ModeIndex::new(2, 1), 1.0);
        assert!((u.h_norm(1.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        // Kernel mode (1, 1): unit weight.
        let u = SpectralField::mode(t, ModeIndex::new(1, 1), 1.0);
        assert!((u.h_norm(1.0).unwrap() - PI).abs() < 1e-12);
        // Minus mode (1, 2): |-3 + 1| = 2.
        let u = SpectralField::mode(t, ModeIndex::new(1, 2), 1.0);
        assert!((u.h_norm(1.0).unwrap() - PI * SQRT_2).abs() < 1e-12);
        assert_eq!(SpectralField::zero(t).h_norm(1.0).unwrap(), 0.0);
    }

    #[test]
    fn l2_inner_frozen_values() {
        let t = Truncation::new(2, 2);
        let u = SpectralField::mode(t, ModeIndex::new(1, 0), 1.0);
        assert!((u.l2_inner(&u).unwrap() - PI * PI).abs() < 1e-12);
        // Distinct modes are orthogonal.
        let v = SpectralField::mode(t, ModeIndex::new(2, 1), 3.0);
        assert_eq!(u.l2_inner(&v).unwrap(), 0.0);
    }

    #[test]
    fn sine_cos_field_has_half_coefficients() {
        // sin(x) cos(t) = (1/2) sin(x) (e^{it} + e^{-it}).
        let t = Truncation::new(2, 2);
        let u = SpectralField::mode(t, ModeIndex::new(1, 1), 1.0 / SQRT_2);
        assert!((u.get(1, 1).re - 0.5).abs() < 1e-15);
        assert!((u.get(1, -1).re - 0.5).abs() < 1e-15);
        assert!((u.l2_norm_sq() - PI * PI / 2.0).abs() < 1e-12);
        // Pointwise agreement with the closed form.
        for (tt, xx) in [(0.3, 0.7), (2.0, 1.1), (5.5, 3.0)] {
            assert!((u.eval(tt, xx) - xx.sin() * tt.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn split_frozen_examples() {
        let t = Truncation::new(4, 4);
        let u = SpectralField::mode(t, ModeIndex::new(2, 1), 1.0);
        let parts = u.split(1.0).unwrap();
        assert_eq!(parts.plus, u);
        assert_eq!(parts.minus.l2_norm(), 0.0);
        assert_eq!(parts.kernel.l2_norm(), 0.0);

        let y = SpectralField::mode(t, ModeIndex::new(1, 1), 1.0);
        let parts = y.split(1.0).unwrap();
        assert_eq!(parts.kernel, y);
        assert_eq!(parts.plus.l2_norm(), 0.0);
    }

    #[test]
    fn split_is_an_orthogonal_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t = Truncation::new(rng.gen_range(1..7), rng.gen_range(0..7));
            let u = random_field(t, &mut rng);
            let parts = u.split(1.0).unwrap();
            let back = parts.recombine();
            assert!(u.l2_distance(&back).unwrap() < 1e-13);
            assert!(parts.plus.l2_inner(&parts.minus).unwrap().abs() < 1e-13);
            assert!(parts.plus.l2_inner(&parts.kernel).unwrap().abs() < 1e-13);
            assert!(parts.minus.l2_inner(&parts.kernel).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn apply_and_invert_are_diagonal() {
        let t = Truncation::new(4, 4);
        let u = SpectralField::mode(t, ModeIndex::new(2, 1), 1.0);
        let applied = u.apply_l_plus_b(1.0);
        assert!(applied.l2_distance(&u.scale(4.0)).unwrap() < 1e-15);
        let inverted = u.invert_l_plus_b(1.0).unwrap();
        assert!(inverted.l2_distance(&u.scale(0.25)).unwrap() < 1e-15);

        // Kernel mode sees only the mass shift.
        let y = SpectralField::mode(t, ModeIndex::new(1, 1), 1.0);
        assert!(y.apply_l_plus_b(1.0).l2_distance(&y).unwrap() < 1e-15);

        // Collision: (1, 2) has eigenvalue -3.
        assert!(u.invert_l_plus_b(3.0).is_err());
    }

    #[test]
    fn invert_undoes_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let t = Truncation::new(rng.gen_range(1..8), rng.gen_range(0..8));
            let u = random_field(t, &mut rng);
            let back = u.apply_l_plus_b(1.3).invert_l_plus_b(1.3).unwrap();
            assert!(u.l2_distance(&back).unwrap() < 1e-12);
        }
    }

    #[test]
    fn shifted_quadratic_form_matches_split_norms() {
        // <(L+b) u, u> = ||u+||_H^2 - ||u-||_H^2 + b ||y||_{L2}^2.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for &b in &[0.5, 1.0, 2.5] {
            for _ in 0..40 {
                let t = Truncation::new(rng.gen_range(1..9), rng.gen_range(0..9));
                let u = random_field(t, &mut rng);
                let parts = u.split(b).unwrap();
                let lhs = u.quadratic_form_shifted(b);
                let rhs = parts.plus.h_norm_sq(b).unwrap() - parts.minus.h_norm_sq(b).unwrap()
                    + b * parts.kernel.l2_norm_sq();
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * scale,
                    "identity off at b = {b}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn l2_dominated_by_h_norm_times_kappa() {
        // ||u||_{L2}^2 <= kappa ||u||_H^2 with kappa = max(1/eta, 1).
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &b in &[0.5, 1.0, 2.5, 7.3] {
            let kappa = crate::modes::spectral_gap(b).unwrap().kappa;
            for _ in 0..40 {
                let t = Truncation::new(rng.gen_range(1..9), rng.gen_range(0..9));
                let u = random_field(t, &mut rng);
                assert!(u.l2_norm_sq() <= kappa * u.h_norm_sq(b).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn embed_preserves_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let small = Truncation::new(3, 2);
        let big = Truncation::new(5, 6);
        let u = random_field(small, &mut rng);
        let e = u.embed(big).unwrap();
        for m in small.iter_stored() {
            assert_eq!(e.get(m.j, m.k), u.get(m.j, m.k));
        }
        assert!((e.l2_norm() - u.l2_norm()).abs() < 1e-14);
        assert!(e.embed(small).is_err());
    }

    #[test]
    fn truncation_mismatch_is_an_error() {
        let a = SpectralField::zero(Truncation::new(2, 2));
        let b = SpectralField::zero(Truncation::new(3, 2));
        assert_eq!(a.l2_inner(&b).unwrap_err(), Error::TruncationMismatch);
        assert_eq!(a.add(&b).unwrap_err(), Error::TruncationMismatch);
    }

    #[test]
    fn conjugate_access() {
        let t = Truncation::new(2, 2);
        let mut u = SpectralField::zero(t);
        u.set(2, 1, Complex64::new(0.3, -0.4));
        assert_eq!(u.get(2, -1), Complex64::new(0.3, 0.4));
        assert_eq!(u.get(2, 3), Complex64::new(0.0, 0.0));
    }
}
