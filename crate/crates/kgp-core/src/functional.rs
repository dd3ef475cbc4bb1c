//! Energy functional of the coupled system, its gradient and diagnostics.
//!
//! States are pairs `(u, v)` on a common truncation. With `L = d_tt - d_xx`
//! acting diagonally on the basis, the equations
//!
//! ```text
//! (L + b) u + eps v + f(t, x, u) + h1 = 0
//! (L + b) v + eps u + g(t, x, v) + h2 = 0
//! ```
//!
//! are the critical-point condition of
//!
//! ```text
//! Phi(u, v) = -1/2 <(L+b)u, u> - 1/2 <(L+b)v, v> - eps <u, v>
//!             - int F(t, x, u) - int G(t, x, v) - <h1, u> - <h2, v>
//! ```
//!
//! where `F`, `G` are the primitives of `f`, `g`. [`EnergyModel`] evaluates
//! `Phi` along two independent routes (diagonal quadratic sums versus the
//! plus/minus/kernel splitting) so agreement between them certifies the
//! splitting code, and exposes the gradient that the Newton solver drives
//! to zero. Nonlinear terms are projected through alias-free collocation
//! grids sized from the declared growth exponents.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{dealias_sizes, from_grid, to_grid};
use crate::modes::{spectral_gap, spectrum_contains, Truncation};
use crate::nonlin::Nonlinearity;
use crate::rng::SplitMix64;
use crate::field::SpectralField;

/// A state of the coupled system: two fields on one truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    /// First component.
    pub u: SpectralField,
    /// Second component.
    pub v: SpectralField,
}

impl FieldPair {
    /// Pairs two fields; they must share a truncation.
    pub fn new(u: SpectralField, v: SpectralField) -> Result<Self> {
        if u.truncation() != v.truncation() {
            return Err(Error::TruncationMismatch);
        }
        Ok(Self { u, v })
    }

    /// The zero state.
    pub fn zero(trunc: Truncation) -> Self {
        Self {
            u: SpectralField::zero(trunc),
            v: SpectralField::zero(trunc),
        }
    }

    /// Common truncation of both components.
    pub fn truncation(&self) -> Truncation {
        self.u.truncation()
    }

    /// Squared `L2` norm of the pair.
    pub fn l2_norm_sq(&self) -> f64 {
        self.u.l2_norm_sq() + self.v.l2_norm_sq()
    }

    /// `L2` norm of the pair.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `L2` distance to another pair.
    pub fn l2_distance(&self, other: &FieldPair) -> Result<f64> {
        let du = self.u.l2_distance(&other.u)?;
        let dv = self.v.l2_distance(&other.v)?;
        Ok((du * du + dv * dv).sqrt())
    }

    /// Componentwise `self + s * other`.
    pub fn axpy(&self, s: f64, other: &FieldPair) -> Result<FieldPair> {
        Ok(FieldPair {
            u: self.u.axpy(s, &other.u)?,
            v: self.v.axpy(s, &other.v)?,
        })
    }

    /// Componentwise scaling.
    pub fn scale(&self, s: f64) -> FieldPair {
        FieldPair {
            u: self.u.scale(s),
            v: self.v.scale(s),
        }
    }

    /// Zero-pads both components into a finer truncation.
    pub fn embed(&self, target: Truncation) -> Result<FieldPair> {
        Ok(FieldPair {
            u: self.u.embed(target)?,
            v: self.v.embed(target)?,
        })
    }
}

/// Which components of a pair carry mass above a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSupport {
    /// Both components vanish.
    Neither,
    /// Only the first component is nonzero.
    FirstOnly,
    /// Only the second component is nonzero.
    SecondOnly,
    /// Both components are nonzero.
    Both,
}

/// Classifies a pair by the `L2` mass of its components.
///
/// Semi-trivial states of the coupled search show up as `FirstOnly` or
/// `SecondOnly`.
pub fn classify_support(pair: &FieldPair, tol: f64) -> PairSupport {
    let u = pair.u.l2_norm() > tol;
    let v = pair.v.l2_norm() > tol;
    match (u, v) {
        (false, false) => PairSupport::Neither,
        (true, false) => PairSupport::FirstOnly,
        (false, true) => PairSupport::SecondOnly,
        (true, true) => PairSupport::Both,
    }
}

/// Inhomogeneous terms of the two equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    h1: SpectralField,
    h2: SpectralField,
}

impl Forcing {
    /// Pairs two forcing fields on a common truncation.
    pub fn new(h1: SpectralField, h2: SpectralField) -> Result<Self> {
        if h1.truncation() != h2.truncation() {
            return Err(Error::TruncationMismatch);
        }
        Ok(Self { h1, h2 })
    }

    /// No forcing.
    pub fn zero(trunc: Truncation) -> Self {
        Self {
            h1: SpectralField::zero(trunc),
            h2: SpectralField::zero(trunc),
        }
    }

    /// Forcing of the first equation.
    pub fn first(&self) -> &SpectralField {
        &self.h1
    }

    /// Forcing of the second equation.
    pub fn second(&self) -> &SpectralField {
        &self.h2
    }

    /// Truncation both fields live on.
    pub fn truncation(&self) -> Truncation {
        self.h1.truncation()
    }

    /// Forcing that makes `target` an exact critical point.
    ///
    /// Sets `h1 = -[(L+b)u + eps v + P f(u)]` and symmetrically for `h2`,
    /// with the nonlinear projection carried out on the same alias-free grid
    /// the energy model uses, so the residual at `target` cancels to
    /// rounding.
    pub fn manufactured(
        target: &FieldPair,
        b: f64,
        eps: f64,
        f: &Nonlinearity,
        g: &Nonlinearity,
    ) -> Result<Forcing> {
        Self::build_manufactured(target, b, eps, f, g)
    }

    /// Like [`Forcing::manufactured`] but without the cross-coupling terms,
    /// so one forcing serves a whole family of coupling strengths.
    ///
    /// At coupling `eps` the state `target` then misses being a solution by
    /// exactly the coupling terms, which is what perturbation sweeps measure.
    pub fn manufactured_decoupled(
        target: &FieldPair,
        b: f64,
        f: &Nonlinearity,
        g: &Nonlinearity,
    ) -> Result<Forcing> {
        Self::build_manufactured(target, b, 0.0, f, g)
    }

    fn build_manufactured(
        target: &FieldPair,
        b: f64,
        eps: f64,
        f: &Nonlinearity,
        g: &Nonlinearity,
    ) -> Result<Forcing> {
        let trunc = target.truncation();
        let (nt, nx) = dealias_sizes(trunc, f.growth().max(g.growth()));
        let fu = nonlinear_projection(&target.u, f, trunc, nt, nx)?;
        let gv = nonlinear_projection(&target.v, g, trunc, nt, nx)?;
        let h1 = target
            .u
            .apply_l_plus_b(b)
            .axpy(eps, &target.v)?
            .add(&fu)?
            .scale(-1.0);
        let h2 = target
            .v
            .apply_l_plus_b(b)
            .axpy(eps, &target.u)?
            .add(&gv)?
            .scale(-1.0);
        Ok(Forcing { h1, h2 })
    }
}

/// Projection of a pointwise nonlinearity back onto a truncation.
///
/// Evaluates the field on an `nt` by `nx` collocation grid, applies the map
/// pointwise and transforms back. The grid must resolve both the input
/// truncation and the polynomial growth of the map for this to be the exact
/// Galerkin projection.
pub fn nonlinear_projection(
    field: &SpectralField,
    nl: &Nonlinearity,
    target: Truncation,
    nt: usize,
    nx: usize,
) -> Result<SpectralField> {
    let grid = to_grid(field, nt, nx)?;
    let mapped = grid.map_with_coords(|t, x, val| nl.eval(t, x, val));
    from_grid(&mapped, target)
}

/// Sizes of the residual of a state, in the two norms that matter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualNorms {
    /// Plain `L2` norm of the gradient pair.
    pub l2: f64,
    /// Dual norm, weighting each mode by the inverse of its spectral
    /// distance; the natural size for the variational problem.
    pub dual: f64,
}

impl ResidualNorms {
    /// Measures an already computed gradient pair.
    pub fn of(grad: &FieldPair, b: f64) -> Result<ResidualNorms> {
        let dual_sq = grad.u.h_dual_norm_sq(b)? + grad.v.h_dual_norm_sq(b)?;
        Ok(ResidualNorms {
            l2: grad.l2_norm(),
            dual: dual_sq.sqrt(),
        })
    }
}

/// Value of the energy functional split into its constituent terms, with the
/// quadratic part computed along two independent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// `<(L+b)u, u>` summed directly over the diagonal.
    pub quadratic_u: f64,
    /// `<(L+b)v, v>` summed directly over the diagonal.
    pub quadratic_v: f64,
    /// Squared working-norm of the positive-spectrum part of `u`.
    pub plus_u: f64,
    /// Squared working-norm of the negative-spectrum part of `u`.
    pub minus_u: f64,
    /// `b` times the squared `L2` norm of the kernel part of `u`.
    pub kernel_u: f64,
    /// Squared working-norm of the positive-spectrum part of `v`.
    pub plus_v: f64,
    /// Squared working-norm of the negative-spectrum part of `v`.
    pub minus_v: f64,
    /// `b` times the squared `L2` norm of the kernel part of `v`.
    pub kernel_v: f64,
    /// Coupling term `eps <u, v>`.
    pub coupling: f64,
    /// Integral of the primitive of `f` along `u`.
    pub potential_u: f64,
    /// Integral of the primitive of `g` along `v`.
    pub potential_v: f64,
    /// Forcing pairing `<h1, u> + <h2, v>`.
    pub forcing: f64,
    /// Functional value assembled from the diagonal quadratic sums.
    pub total: f64,
    /// Functional value assembled from the six splitting terms instead.
    pub total_from_split: f64,
}

impl EnergyBreakdown {
    /// Disagreement between the two assembly routes.
    pub fn consistency_gap(&self) -> f64 {
        (self.total - self.total_from_split).abs()
    }

    /// Size of the terms entering the totals, for relative comparisons.
    pub fn scale(&self) -> f64 {
        1.0 + self.quadratic_u.abs()
            + self.quadratic_v.abs()
            + self.coupling.abs()
            + self.potential_u.abs()
            + self.potential_v.abs()
            + self.forcing.abs()
    }
}

/// Per-class norm content of a state, with the product-space norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    /// Working-norm of the positive-spectrum part of `u`.
    pub u_plus_h: f64,
    /// Working-norm of the negative-spectrum part of `u`.
    pub u_minus_h: f64,
    /// `L2` norm of the kernel part of `u`.
    pub y_l2: f64,
    /// Working-norm of the positive-spectrum part of `v`.
    pub v_plus_h: f64,
    /// Working-norm of the negative-spectrum part of `v`.
    pub v_minus_h: f64,
    /// `L2` norm of the kernel part of `v`.
    pub z_l2: f64,
    /// Product-space norm, the root of the six squared parts.
    pub e_norm: f64,
    /// Gap between the six-term sum and the directly computed working
    /// norms of the two components.
    pub identity_gap: f64,
}

/// Splits both components of a state and assembles the six-term norm
/// identity alongside an independent evaluation of it.
pub fn decomposition_report(pair: &FieldPair, b: f64) -> Result<DecompositionReport> {
    let su = pair.u.split(b)?;
    let sv = pair.v.split(b)?;
    let u_plus = su.plus.h_norm_sq(b)?;
    let u_minus = su.minus.h_norm_sq(b)?;
    let y = su.kernel.l2_norm_sq();
    let v_plus = sv.plus.h_norm_sq(b)?;
    let v_minus = sv.minus.h_norm_sq(b)?;
    let z = sv.kernel.l2_norm_sq();
    let six_term = u_plus + u_minus + y + v_plus + v_minus + z;
    let direct = pair.u.h_norm_sq(b)? + pair.v.h_norm_sq(b)?;
    Ok(DecompositionReport {
        u_plus_h: u_plus.sqrt(),
        u_minus_h: u_minus.sqrt(),
        y_l2: y.sqrt(),
        v_plus_h: v_plus.sqrt(),
        v_minus_h: v_minus.sqrt(),
        z_l2: z.sqrt(),
        e_norm: six_term.sqrt(),
        identity_gap: (six_term - direct).abs(),
    })
}

/// The functional for one fixed choice of mass shift, coupling,
/// nonlinearities and forcing.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    b: f64,
    eps: f64,
    f: Nonlinearity,
    g: Nonlinearity,
    forcing: Forcing,
    trunc: Truncation,
    nt: usize,
    nx: usize,
}

impl EnergyModel {
    /// Builds a model, sizing the collocation grid from the declared growth
    /// exponents.
    ///
    /// Rejects a mass shift that collides with the wave spectrum, since the
    /// working norms degenerate there.
    pub fn new(
        b: f64,
        eps: f64,
        f: Nonlinearity,
        g: Nonlinearity,
        forcing: Forcing,
        trunc: Truncation,
    ) -> Result<Self> {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "mass shift must be positive and finite, got {b}"
            )));
        }
        if spectrum_contains(b) {
            return Err(Error::SpectrumCollision { b });
        }
        if !eps.is_finite() {
            return Err(Error::InvalidConfig("coupling must be finite".into()));
        }
        if forcing.truncation() != trunc {
            return Err(Error::TruncationMismatch);
        }
        let (nt, nx) = dealias_sizes(trunc, f.growth().max(g.growth()));
        Ok(Self {
            b,
            eps,
            f,
            g,
            forcing,
            trunc,
            nt,
            nx,
        })
    }

    /// Replaces the collocation grid with explicit sizes.
    pub fn with_grid(mut self, nt: usize, nx: usize) -> Result<Self> {
        let need_nt = 2 * self.trunc.k_max as usize + 2;
        let need_nx = self.trunc.j_max as usize + 1;
        if nt < need_nt || nx < need_nx {
            return Err(Error::AliasedGrid {
                nt,
                nx,
                need_nt,
                need_nx,
            });
        }
        self.nt = nt;
        self.nx = nx;
        Ok(self)
    }

    /// Mass shift `b`.
    pub fn mass_shift(&self) -> f64 {
        self.b
    }

    /// Coupling strength `eps`.
    pub fn coupling(&self) -> f64 {
        self.eps
    }

    /// Truncation states live on.
    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// Collocation grid sizes `(nt, nx)`.
    pub fn grid_sizes(&self) -> (usize, usize) {
        (self.nt, self.nx)
    }

    /// Nonlinearity of the first equation.
    pub fn nonlinearity_u(&self) -> &Nonlinearity {
        &self.f
    }

    /// Nonlinearity of the second equation.
    pub fn nonlinearity_v(&self) -> &Nonlinearity {
        &self.g
    }

    /// Forcing terms.
    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    /// True when the coupling is large enough, relative to the spectral gap
    /// and the mass shift, that the perturbative regime is in doubt.
    pub fn coupling_warning(&self) -> Result<bool> {
        let gap = spectral_gap(self.b)?;
        Ok(self.eps.abs() >= 0.5 * gap.eta.min(self.b))
    }

    fn check_pair(&self, pair: &FieldPair) -> Result<()> {
        if pair.truncation() != self.trunc {
            return Err(Error::TruncationMismatch);
        }
        Ok(())
    }

    fn potential(&self, field: &SpectralField, nl: &Nonlinearity) -> Result<f64> {
        let grid = to_grid(field, self.nt, self.nx)?;
        Ok(grid
            .map_with_coords(|t, x, val| nl.primitive(t, x, val))
            .integral())
    }

    /// Value of the functional at `pair`.
    pub fn energy(&self, pair: &FieldPair) -> Result<f64> {
        self.check_pair(pair)?;
        let quad = pair.u.quadratic_form_shifted(self.b) + pair.v.quadratic_form_shifted(self.b);
        let coupling = self.eps * pair.u.l2_inner(&pair.v)?;
        let potential = self.potential(&pair.u, &self.f)? + self.potential(&pair.v, &self.g)?;
        let forcing =
            self.forcing.h1.l2_inner(&pair.u)? + self.forcing.h2.l2_inner(&pair.v)?;
        Ok(-0.5 * quad - coupling - potential - forcing)
    }

    /// Full term-by-term account of the functional, with the quadratic part
    /// assembled both from the diagonal and from the splitting.
    pub fn breakdown(&self, pair: &FieldPair) -> Result<EnergyBreakdown> {
        self.check_pair(pair)?;
        let split_u = pair.u.split(self.b)?;
        let split_v = pair.v.split(self.b)?;
        let plus_u = split_u.plus.h_norm_sq(self.b)?;
        let minus_u = split_u.minus.h_norm_sq(self.b)?;
        let kernel_u = self.b * split_u.kernel.l2_norm_sq();
        let plus_v = split_v.plus.h_norm_sq(self.b)?;
        let minus_v = split_v.minus.h_norm_sq(self.b)?;
        let kernel_v = self.b * split_v.kernel.l2_norm_sq();
        let quadratic_u = pair.u.quadratic_form_shifted(self.b);
        let quadratic_v = pair.v.quadratic_form_shifted(self.b);
        let coupling = self.eps * pair.u.l2_inner(&pair.v)?;
        let potential_u = self.potential(&pair.u, &self.f)?;
        let potential_v = self.potential(&pair.v, &self.g)?;
        let forcing =
            self.forcing.h1.l2_inner(&pair.u)? + self.forcing.h2.l2_inner(&pair.v)?;
        let rest = -coupling - potential_u - potential_v - forcing;
        let total = -0.5 * (quadratic_u + quadratic_v) + rest;
        let total_from_split = -0.5
            * ((plus_u - minus_u + kernel_u) + (plus_v - minus_v + kernel_v))
            + rest;
        Ok(EnergyBreakdown {
            quadratic_u,
            quadratic_v,
            plus_u,
            minus_u,
            kernel_u,
            plus_v,
            minus_v,
            kernel_v,
            coupling,
            potential_u,
            potential_v,
            forcing,
            total,
            total_from_split,
        })
    }

    /// `L2` gradient of the functional at `pair`.
    ///
    /// Its vanishing is exactly the Galerkin form of the coupled equations.
    pub fn gradient(&self, pair: &FieldPair) -> Result<FieldPair> {
        self.check_pair(pair)?;
        let fu = nonlinear_projection(&pair.u, &self.f, self.trunc, self.nt, self.nx)?;
        let gv = nonlinear_projection(&pair.v, &self.g, self.trunc, self.nt, self.nx)?;
        let gu = pair
            .u
            .apply_l_plus_b(self.b)
            .axpy(self.eps, &pair.v)?
            .add(&fu)?
            .add(&self.forcing.h1)?
            .scale(-1.0);
        let gv = pair
            .v
            .apply_l_plus_b(self.b)
            .axpy(self.eps, &pair.u)?
            .add(&gv)?
            .add(&self.forcing.h2)?
            .scale(-1.0);
        FieldPair::new(gu, gv)
    }

    /// Residual norms of the state, from a fresh gradient evaluation.
    pub fn residual_norms(&self, pair: &FieldPair) -> Result<ResidualNorms> {
        ResidualNorms::of(&self.gradient(pair)?, self.b)
    }

    /// Dual-norm residual content beyond the working truncation.
    ///
    /// Embeds the state into the doubled truncation, re-evaluates the
    /// gradient there and measures only the modes outside the original
    /// truncation. For an exact Galerkin solution this isolates the
    /// spectral truncation error committed by the cutoff.
    pub fn tail_residual(&self, pair: &FieldPair) -> Result<f64> {
        self.check_pair(pair)?;
        let wide = Truncation::new(2 * self.trunc.j_max, 2 * self.trunc.k_max);
        let (nt, nx) = dealias_sizes(wide, self.f.growth().max(self.g.growth()));
        let model = EnergyModel {
            b: self.b,
            eps: self.eps,
            f: self.f.clone(),
            g: self.g.clone(),
            forcing: Forcing {
                h1: self.forcing.h1.embed(wide)?,
                h2: self.forcing.h2.embed(wide)?,
            },
            trunc: wide,
            nt,
            nx,
        };
        let mut grad = model.gradient(&pair.embed(wide)?)?;
        for m in wide.iter_stored() {
            if self.trunc.contains(m) {
                grad.u.set(m.j, m.k, Complex64::new(0.0, 0.0));
                grad.v.set(m.j, m.k, Complex64::new(0.0, 0.0));
            }
        }
        let sq = grad.u.h_dual_norm_sq(self.b)? + grad.v.h_dual_norm_sq(self.b)?;
        Ok(sq.sqrt())
    }
}

/// Sampled comparison of field norms against the working norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingReport {
    /// Mass shift the working norm was built with.
    pub b: f64,
    /// Lebesgue exponent of the comparison norm.
    pub r: f64,
    /// Inverse spectral gap bound for the `L2` case.
    pub kappa: f64,
    /// Largest sampled ratio of squared `L2` norm to squared working norm.
    pub max_l2_ratio_sq: f64,
    /// Largest sampled ratio of `L^r` norm to working norm.
    pub max_lr_ratio: f64,
    /// Number of random fields drawn.
    pub samples: usize,
    /// Seed the draws started from.
    pub seed: u64,
    /// Whether every sampled `L2` ratio respected the gap bound.
    pub within_gap_bound: bool,
}

/// Draws random fields and compares their `L2` and `L^r` norms to the
/// working norm.
///
/// The squared `L2` ratio is provably bounded by `kappa`; the `L^r` ratio
/// has no closed-form constant on the truncation, so its sampled maximum is
/// reported as an empirical stand-in.
pub fn embedding_report(
    b: f64,
    r: f64,
    trunc: Truncation,
    samples: usize,
    seed: u64,
) -> Result<EmbeddingReport> {
    if !(r >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "Lebesgue exponent must be at least 1, got {r}"
        )));
    }
    let gap = spectral_gap(b)?;
    if gap.in_spectrum {
        return Err(Error::SpectrumCollision { b });
    }
    let (nt, nx) = dealias_sizes(trunc, (r - 1.0).max(1.0));
    let mut rng = SplitMix64::new(seed);
    let mut max_l2_ratio_sq: f64 = 0.0;
    let mut max_lr_ratio: f64 = 0.0;
    for _ in 0..samples {
        let mut coeffs: Vec<Complex64> = Vec::with_capacity(trunc.n_stored());
        for m in trunc.iter_stored() {
            let re = rng.next_symmetric();
            let im = if m.k == 0 { 0.0 } else { rng.next_symmetric() };
            coeffs.push(Complex64::new(re, im));
        }
        let field = {
            let mut it = coeffs.into_iter();
            SpectralField::from_fn(trunc, |_| it.next().unwrap())
        };
        let h_sq = field.h_norm_sq(b)?;
        if h_sq == 0.0 {
            continue;
        }
        max_l2_ratio_sq = max_l2_ratio_sq.max(field.l2_norm_sq() / h_sq);
        let grid = to_grid(&field, nt, nx)?;
        let lr = grid
            .map_with_coords(|_, _, val| val.abs().powf(r))
            .integral()
            .powf(1.0 / r);
        max_lr_ratio = max_lr_ratio.max(lr / h_sq.sqrt());
    }
    Ok(EmbeddingReport {
        b,
        r,
        kappa: gap.kappa,
        max_l2_ratio_sq,
        max_lr_ratio,
        samples,
        seed,
        within_gap_bound: max_l2_ratio_sq <= gap.kappa * (1.0 + 1e-9),
    })
}
