//! Collocation grids and the transforms to and from spectral coefficients.
//!
//! The grid is uniform in time over `[0, 2π)` and uses the interior sine
//! nodes `x_m = π m / (n_x + 1)`, `m = 1..n_x`, in space, so the discrete
//! sine transform in `x` and the discrete Fourier transform in `t` are both
//! exactly orthogonal. A truncation with indices up to `(J, K)` round-trips
//! without aliasing whenever `n_t >= 2K + 2` and `n_x >= J + 1`.
//!
//! Transforms are evaluated by direct summation. Grids at the scales this
//! crate targets stay in the hundreds of points per axis, where the tabled
//! direct transform is fast enough and keeps the crate free of platform
//! FFT dependencies.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::modes::Truncation;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Real samples of a field on the collocation grid.
///
/// Values are stored time-major: `values[i * nx + m]` is the sample at
/// `(t_i, x_{m+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    nt: usize,
    nx: usize,
    values: Vec<f64>,
}

impl GridField {
    /// Creates a grid field from raw samples; `values.len()` must equal
    /// `nt * nx`.
    pub fn new(nt: usize, nx: usize, values: Vec<f64>) -> Self {
        assert!(nt >= 1 && nx >= 1, "grid must have at least one point");
        assert_eq!(values.len(), nt * nx, "sample count does not match grid");
        GridField { nt, nx, values }
    }

    /// All-zero samples.
    pub fn zeros(nt: usize, nx: usize) -> Self {
        Self::new(nt, nx, vec![0.0; nt * nx])
    }

    /// Number of time samples.
    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Number of interior space samples.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Time coordinate of sample row `i`.
    pub fn t_coord(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.nt as f64
    }

    /// Space coordinate of sample column `m`.
    pub fn x_coord(&self, m: usize) -> f64 {
        PI * (m + 1) as f64 / (self.nx + 1) as f64
    }

    /// Raw samples, time-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable raw samples.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Applies a pointwise map `(t, x, value) -> value`.
    pub fn map_with_coords(&self, mut f: impl FnMut(f64, f64, f64) -> f64) -> GridField {
        let mut out = self.clone();
        for i in 0..self.nt {
            let t = self.t_coord(i);
            for m in 0..self.nx {
                let x = self.x_coord(m);
                let idx = i * self.nx + m;
                out.values[idx] = f(t, x, self.values[idx]);
            }
        }
        out
    }

    /// Tensor quadrature of the samples over `[0, 2π] x [0, π]`.
    ///
    /// Uniform weights: the trapezoid rule in the periodic direction, and in
    /// `x` the interior sum whose endpoint contributions vanish because every
    /// represented field does at `x = 0, π`.
    pub fn integral(&self) -> f64 {
        let w = (2.0 * PI / self.nt as f64) * (PI / (self.nx + 1) as f64);
        let mut s = 0.0;
        for v in &self.values {
            s += v;
        }
        w * s
    }

    /// Largest absolute sample value.
    pub fn sup_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for v in &self.values {
            m = m.max(v.abs());
        }
        m
    }

    /// Quadrature of `|values|` over the rectangle.
    pub fn l1_norm(&self) -> f64 {
        let w = (2.0 * PI / self.nt as f64) * (PI / (self.nx + 1) as f64);
        let mut s = 0.0;
        for v in &self.values {
            s += v.abs();
        }
        w * s
    }
}

fn check_resolves(trunc: Truncation, nt: usize, nx: usize) -> Result<()> {
    let need_nt = 2 * trunc.k_max as usize + 2;
    let need_nx = trunc.j_max as usize + 1;
    if nt < need_nt || nx < need_nx {
        return Err(Error::AliasedGrid {
            nt,
            nx,
            need_nt,
            need_nx,
        });
    }
    Ok(())
}

/// Sine table `sin(j x_m)` for `j = 1..=j_max`, `m = 0..nx`, row per `j`.
fn sine_table(j_max: u32, nx: usize) -> Vec<f64> {
    let mut table = vec![0.0; j_max as usize * nx];
    for j in 1..=j_max as usize {
        for m in 0..nx {
            let x = PI * (m + 1) as f64 / (nx + 1) as f64;
            table[(j - 1) * nx + m] = (j as f64 * x).sin();
        }
    }
    table
}

/// Phase table `e^{i k t_i}` for `k = 0..=k_max`, `i = 0..nt`, row per `k`.
fn phase_table(k_max: u32, nt: usize) -> Vec<Complex64> {
    let mut table = vec![Complex64::new(0.0, 0.0); (k_max as usize + 1) * nt];
    for i in 0..nt {
        let t = 2.0 * PI * i as f64 / nt as f64;
        for k in 0..=k_max as usize {
            let (s, c) = (k as f64 * t).sin_cos();
            table[k * nt + i] = Complex64::new(c, s);
        }
    }
    table
}

/// Evaluates a spectral field on the collocation grid.
///
/// Fails with [`Error::AliasedGrid`] when the grid cannot represent the
/// truncation (`nt < 2 k_max + 2` or `nx < j_max + 1`).
pub fn to_grid(u: &SpectralField, nt: usize, nx: usize) -> Result<GridField> {
    let trunc = u.truncation();
    check_resolves(trunc, nt, nx)?;
    let j_max = trunc.j_max as usize;
    let sines = sine_table(trunc.j_max, nx);
    let phases = phase_table(trunc.k_max, nt);

    // Time profile per spatial index: A_j(t_i) = c_{j,0} + 2 Re sum c_{j,k} e^{ikt_i}.
    let mut profiles = vec![0.0; j_max * nt];
    for j in 1..=j_max {
        for i in 0..nt {
            let mut a = u.get(j as u32, 0).re;
            for k in 1..=trunc.k_max as usize {
                let c = u.get(j as u32, k as i32);
                let p = phases[k * nt + i];
                a += 2.0 * (c * p).re;
            }
            profiles[(j - 1) * nt + i] = a;
        }
    }

    let mut values = vec![0.0; nt * nx];
    for i in 0..nt {
        for m in 0..nx {
            let mut s = 0.0;
            for j in 0..j_max {
                s += sines[j * nx + m] * profiles[j * nt + i];
            }
            values[i * nx + m] = s;
        }
    }
    Ok(GridField::new(nt, nx, values))
}

/// Projects grid samples onto a truncation by the discrete sine and Fourier
/// transforms.
///
/// Exact (up to rounding) for samples of any field the grid resolves; on a
/// grid oversampled beyond `(j_max, k_max)` it acts as the Galerkin
/// projection. Fails with [`Error::AliasedGrid`] on a grid too coarse for
/// the requested truncation.
pub fn from_grid(g: &GridField, trunc: Truncation) -> Result<SpectralField> {
    check_resolves(trunc, g.nt(), g.nx())?;
    let nt = g.nt();
    let nx = g.nx();
    let j_max = trunc.j_max as usize;
    let sines = sine_table(trunc.j_max, nx);
    let phases = phase_table(trunc.k_max, nt);

    // Sine analysis per time row: B_j(t_i) = (2/(nx+1)) sum_m g(t_i, x_m) sin(j x_m).
    let sine_scale = 2.0 / (nx + 1) as f64;
    let mut profiles = vec![0.0; j_max * nt];
    for i in 0..nt {
        for j in 0..j_max {
            let mut s = 0.0;
            for m in 0..nx {
                s += g.values()[i * nx + m] * sines[j * nx + m];
            }
            profiles[j * nt + i] = sine_scale * s;
        }
    }

    let mut out = SpectralField::zero(trunc);
    let dft_scale = 1.0 / nt as f64;
    for j in 1..=j_max {
        for k in 0..=trunc.k_max as i32 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..nt {
                let p = phases[k as usize * nt + i].conj();
                acc += profiles[(j - 1) * nt + i] * p;
            }
            let mut c = acc * dft_scale;
            if k == 0 {
                // Real samples leave only rounding noise in the imaginary part.
                c.im = 0.0;
            }
            out.set(j as u32, k, c);
        }
    }
    Ok(out)
}

/// Grid sizes that evaluate a power nonlinearity of growth `p` without
/// aliasing back into the truncation.
///
/// For integer `p` a product of `p + 1` truncated factors stays below the
/// returned Nyquist limits, so collocation products project exactly. For
/// fractional `p` the composed field is not band-limited; a fixed
/// oversampling factor of 4 is used and a small aliasing residual remains.
pub fn dealias_sizes(trunc: Truncation, growth: f64) -> (usize, usize) {
    let growth = growth.max(1.0);
    let factor = if (growth - growth.round()).abs() < 1e-9 {
        growth.round() as usize + 1
    } else {
        4
    };
    let nt = factor * (2 * trunc.k_max as usize + 1) + 1;
    let nx = factor * trunc.j_max as usize + 1;
    (nt.max(2 * trunc.k_max as usize + 2), nx.max(trunc.j_max as usize + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::ModeIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn static_mode_roundtrip_on_minimal_grid() {
        let t = Truncation::new(1, 0);
        let u = SpectralField::mode(t, ModeIndex::new(1, 0), 1.0);
        let g = to_grid(&u, 2, 2).unwrap();
        let back = from_grid(&g, t).unwrap();
        assert!(u.l2_distance(&back).unwrap() < 1e-14);
    }

    #[test]
    fn nyquist_boundary_roundtrip() {
        // Every mode of (J, K) = (4, 3) on the minimal grid (nt, nx) = (8, 5).
        let t = Truncation::new(4, 3);
        for m in t.iter_stored() {
            let u = SpectralField::mode(t, m, 1.0);
            let g = to_grid(&u, 8, 5).unwrap();
            let back = from_grid(&g, t).unwrap();
            assert!(
                u.l2_distance(&back).unwrap() < 1e-12,
                "mode ({}, {}) does not round trip",
                m.j,
                m.k
            );
        }
    }

    #[test]
    fn random_roundtrip_with_oversampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = Truncation::new(rng.gen_range(1..9), rng.gen_range(0..9));
            let u = SpectralField::from_fn(t, |_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let nt = 2 * t.k_max as usize + 2 + rng.gen_range(0..5);
            let nx = t.j_max as usize + 1 + rng.gen_range(0..5);
            let g = to_grid(&u, nt, nx).unwrap();
            let back = from_grid(&g, t).unwrap();
            let rel = u.l2_distance(&back).unwrap() / u.l2_norm().max(1e-300);
            assert!(rel < 1e-12, "relative roundtrip error {rel}");
        }
    }

    #[test]
    fn sampled_standing_wave_has_half_coefficients() {
        // Sampling sin(x) cos(t) splits the unit amplitude evenly between
        // the (1, 1) and (1, -1) harmonics.
        let t = Truncation::new(2, 2);
        let mut g = GridField::zeros(8, 4);
        for i in 0..8 {
            for m in 0..4 {
                let (tt, xx) = (g.t_coord(i), g.x_coord(m));
                g.values_mut()[i * 4 + m] = xx.sin() * tt.cos();
            }
        }
        let u = from_grid(&g, t).unwrap();
        assert!((u.get(1, 1) - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!((u.get(1, -1) - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!(u.get(2, 0).norm() < 1e-13);
    }

    #[test]
    fn grid_values_match_pointwise_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = Truncation::new(3, 4);
        let u = SpectralField::from_fn(t, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let g = to_grid(&u, 12, 6).unwrap();
        for i in 0..12 {
            for m in 0..6 {
                let direct = u.eval(g.t_coord(i), g.x_coord(m));
                assert!((direct - g.values()[i * 6 + m]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadrature_matches_coefficient_l2() {
        // pi^2 sum |c|^2 equals the quadrature of u^2 once the grid resolves
        // the squared field.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let t = Truncation::new(rng.gen_range(1..7), rng.gen_range(0..7));
            let u = SpectralField::from_fn(t, |_| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let nt = 4 * t.k_max as usize + 4;
            let nx = 2 * t.j_max as usize + 2;
            let g = to_grid(&u, nt, nx).unwrap();
            let squared = g.map_with_coords(|_, _, v| v * v);
            let lhs = squared.integral();
            let rhs = u.l2_norm_sq();
            let scale = rhs.abs().max(1.0);
            assert!(
                (lhs - rhs).abs() < 1e-10 * scale,
                "quadrature {lhs} vs coefficients {rhs}"
            );
        }
    }

    #[test]
    fn aliased_grid_is_rejected() {
        let t = Truncation::new(4, 3);
        let u = SpectralField::zero(t);
        // nt = 7 < 2*3 + 2 and nx = 4 < 4 + 1.
        assert!(matches!(
            to_grid(&u, 7, 5),
            Err(Error::AliasedGrid { need_nt: 8, .. })
        ));
        assert!(matches!(
            to_grid(&u, 8, 4),
            Err(Error::AliasedGrid { need_nx: 5, .. })
        ));
        let g = GridField::zeros(7, 4);
        assert!(from_grid(&g, t).is_err());
    }

    #[test]
    fn dealias_sizes_for_cubic_growth() {
        // Growth 3 needs factor 4: nt = 4(2K+1)+1, nx = 4J+1.
        let t = Truncation::new(8, 8);
        assert_eq!(dealias_sizes(t, 3.0), (69, 33));
        // Fractional growth falls back to the fixed factor 4.
        assert_eq!(dealias_sizes(t, 2.5), (69, 33));
        // Growth 1 still resolves plain products.
        assert_eq!(dealias_sizes(t, 1.0), (35, 17));
    }
}
