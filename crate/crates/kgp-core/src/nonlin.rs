//! Nonlinearities and verification of the structural hypotheses on them.
//!
//! A [`Nonlinearity`] bundles the pointwise map `f(t, x, xi)`, its primitive
//! in `xi`, an optional `xi`-derivative for Newton linearizations, and the
//! declared growth data `(p, c0)`. The existence argument behind the solver
//! needs four properties of `f`:
//!
//! * polynomial growth `|f| <= c0 (1 + |xi|^p)` with `p > 1`,
//! * superlinear flatness at zero, `f(t, x, xi) = o(xi)`,
//! * the Ambrosetti-Rabinowitz inequality `(p + 1) F <= xi f`,
//! * monotonicity of `xi -> f(t, x, xi)`.
//!
//! [`Nonlinearity::hypothesis_report`] samples all four over a deterministic
//! grid and returns concrete witnesses for any failure, so a configuration
//! outside the supported class is rejected with an explanation rather than
//! handed to a solver whose convergence theory no longer applies.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Pointwise scalar map `(t, x, xi) -> f64`.
pub type PointFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Strength of a power-law nonlinearity, constant or slowly varying in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    /// Fixed coefficient `a(t, x) = value`.
    Const(f64),
    /// Time-periodic coefficient `a(t) = base + modulation * cos(t)`.
    CosT {
        /// Mean value over a period.
        base: f64,
        /// Size of the cosine modulation.
        modulation: f64,
    },
}

impl Amplitude {
    /// Coefficient value at `(t, x)`.
    pub fn eval(&self, t: f64, _x: f64) -> f64 {
        match *self {
            Amplitude::Const(a) => a,
            Amplitude::CosT { base, modulation } => base + modulation * t.cos(),
        }
    }

    /// Infimum over a period.
    pub fn min(&self) -> f64 {
        match *self {
            Amplitude::Const(a) => a,
            Amplitude::CosT { base, modulation } => base - modulation.abs(),
        }
    }

    /// Supremum over a period.
    pub fn max(&self) -> f64 {
        match *self {
            Amplitude::Const(a) => a,
            Amplitude::CosT { base, modulation } => base + modulation.abs(),
        }
    }
}

enum Primitive {
    Closed(PointFn),
    /// Fall back to adaptive quadrature of `f` from 0 to `xi`.
    Quadrature,
}

/// A nonlinear term together with its calculus and growth metadata.
///
/// Cloning is cheap; the closures are shared.
#[derive(Clone)]
pub struct Nonlinearity {
    f: PointFn,
    primitive: Arc<Primitive>,
    df: Option<PointFn>,
    p: f64,
    c0: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Nonlinearity")
            .field("p", &self.p)
            .field("c0", &self.c0)
            .field("has_df", &self.df.is_some())
            .finish()
    }
}

/// `|xi|^e` with integer exponents routed through `powi`.
fn pow_abs(xi: f64, e: f64) -> f64 {
    let r = e.round();
    if (e - r).abs() < 1e-9 && (0.0..=64.0).contains(&r) {
        xi.abs().powi(r as i32)
    } else {
        xi.abs().powf(e)
    }
}

impl Nonlinearity {
    /// The identically zero nonlinearity.
    pub fn zero() -> Self {
        Self {
            f: Arc::new(|_, _, _| 0.0),
            primitive: Arc::new(Primitive::Closed(Arc::new(|_, _, _| 0.0))),
            df: Some(Arc::new(|_, _, _| 0.0)),
            p: 1.0,
            c0: 0.0,
        }
    }

    /// Odd power law `f = a(t, x) |xi|^(p-1) xi` with exponent `p > 1`.
    ///
    /// The amplitude must stay strictly positive over the period.
    pub fn power_law(p: f64, amplitude: Amplitude) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "growth exponent must exceed 1, got {p}"
            )));
        }
        if amplitude.min() <= 0.0 {
            return Err(Error::NonPositiveAmplitude);
        }
        let a = amplitude;
        Ok(Self {
            f: Arc::new(move |t, x, xi| a.eval(t, x) * pow_abs(xi, p - 1.0) * xi),
            primitive: Arc::new(Primitive::Closed(Arc::new(move |t, x, xi| {
                a.eval(t, x) * pow_abs(xi, p + 1.0) / (p + 1.0)
            }))),
            df: Some(Arc::new(move |t, x, xi| {
                a.eval(t, x) * p * pow_abs(xi, p - 1.0)
            })),
            p,
            c0: amplitude.max(),
        })
    }

    /// Linear term `f = slope * xi`, declared with growth exponent 2.
    ///
    /// Useful as a deliberate counterexample: it satisfies the growth bound
    /// but fails flatness at zero and the superquadratic inequality.
    pub fn linear(slope: f64) -> Self {
        Self {
            f: Arc::new(move |_, _, xi| slope * xi),
            primitive: Arc::new(Primitive::Closed(Arc::new(move |_, _, xi| {
                0.5 * slope * xi * xi
            }))),
            df: Some(Arc::new(move |_, _, _| slope)),
            p: 2.0,
            c0: slope.abs().max(1.0),
        }
    }

    /// Wraps arbitrary closures.
    ///
    /// `primitive` and `df` may be omitted; the primitive is then computed by
    /// adaptive quadrature and Newton falls back to finite differences.
    pub fn from_fns(
        f: PointFn,
        primitive: Option<PointFn>,
        df: Option<PointFn>,
        p: f64,
        c0: f64,
    ) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "growth exponent must exceed 1, got {p}"
            )));
        }
        if !c0.is_finite() || c0 < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "growth constant must be finite and nonnegative, got {c0}"
            )));
        }
        let primitive = match primitive {
            Some(g) => Primitive::Closed(g),
            None => Primitive::Quadrature,
        };
        Ok(Self {
            f,
            primitive: Arc::new(primitive),
            df,
            p,
            c0,
        })
    }

    /// Declared growth exponent `p`.
    pub fn growth(&self) -> f64 {
        self.p
    }

    /// Declared growth constant `c0`.
    pub fn growth_constant(&self) -> f64 {
        self.c0
    }

    /// Whether an exact `xi`-derivative is available.
    pub fn has_derivative(&self) -> bool {
        self.df.is_some()
    }

    /// `f(t, x, xi)`.
    pub fn eval(&self, t: f64, x: f64, xi: f64) -> f64 {
        (self.f)(t, x, xi)
    }

    /// Primitive `F(t, x, xi)` with `F(t, x, 0) = 0`.
    pub fn primitive(&self, t: f64, x: f64, xi: f64) -> f64 {
        match &*self.primitive {
            Primitive::Closed(g) => g(t, x, xi),
            Primitive::Quadrature => {
                if xi == 0.0 {
                    0.0
                } else {
                    adaptive_simpson(&|s| (self.f)(t, x, s), 0.0, xi, 1e-10)
                }
            }
        }
    }

    /// `xi`-derivative if available.
    pub fn derivative(&self, t: f64, x: f64, xi: f64) -> Option<f64> {
        self.df.as_ref().map(|d| d(t, x, xi))
    }

    /// Runs all four hypothesis checks over the standard sample grid.
    pub fn hypothesis_report(&self) -> HypothesisReport {
        let s = SampleSet::standard();
        HypothesisReport {
            growth_bound: self.check_growth_bound(&s),
            flat_at_zero: self.check_flatness(&s),
            superquadratic: self.check_superquadratic(&s),
            monotone: self.check_monotone(&s),
        }
    }

    /// Verifies `|f| <= c0 (1 + |xi|^p)` on the sample grid.
    fn check_growth_bound(&self, s: &SampleSet) -> CheckOutcome {
        let mut worst: Option<Witness> = None;
        let mut samples = 0;
        for &(t, x) in &s.tx {
            for &xi in &s.xi {
                samples += 1;
                let bound = self.c0 * (1.0 + pow_abs(xi, self.p));
                let excess = (self.f)(t, x, xi).abs() - bound * (1.0 + 1e-12);
                if excess > 0.0 && worst.map_or(true, |w| excess > w.magnitude) {
                    worst = Some(Witness {
                        t,
                        x,
                        xi,
                        xi_other: None,
                        magnitude: excess,
                    });
                }
            }
        }
        CheckOutcome {
            passed: worst.is_none(),
            witness: worst,
            samples,
        }
    }

    /// Verifies that `f / xi` and `F / xi^2` vanish along `xi -> 0`.
    fn check_flatness(&self, s: &SampleSet) -> CheckOutcome {
        let ladder: Vec<f64> = (1..=6).map(|e| 10f64.powi(-e)).collect();
        let mut f_ratios = Vec::with_capacity(ladder.len());
        let mut prim_ratios = Vec::with_capacity(ladder.len());
        let mut last_witness = Witness {
            t: 0.0,
            x: 0.0,
            xi: *ladder.last().unwrap(),
            xi_other: None,
            magnitude: 0.0,
        };
        let mut samples = 0;
        for &xi in &ladder {
            let mut fr: f64 = 0.0;
            let mut pr: f64 = 0.0;
            for &(t, x) in &s.tx {
                for sign in [-1.0, 1.0] {
                    samples += 1;
                    let z = sign * xi;
                    let r = (self.f)(t, x, z).abs() / xi;
                    if r > fr {
                        fr = r;
                        if xi == *ladder.last().unwrap() {
                            last_witness = Witness {
                                t,
                                x,
                                xi: z,
                                xi_other: None,
                                magnitude: r,
                            };
                        }
                    }
                    pr = pr.max(self.primitive(t, x, z).abs() / (xi * xi));
                }
            }
            f_ratios.push(fr);
            prim_ratios.push(pr);
        }
        let decayed = *f_ratios.last().unwrap() <= 1e-3 && *prim_ratios.last().unwrap() <= 1e-3;
        let monotone = f_ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
            && prim_ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
        let passed = decayed && monotone;
        CheckOutcome {
            passed,
            witness: if passed { None } else { Some(last_witness) },
            samples,
        }
    }

    /// Verifies `(p + 1) F(t, x, xi) <= xi f(t, x, xi)` on the sample grid.
    fn check_superquadratic(&self, s: &SampleSet) -> CheckOutcome {
        let mut worst: Option<Witness> = None;
        let mut samples = 0;
        for &(t, x) in &s.tx {
            for &xi in &s.xi {
                samples += 1;
                let lhs = (self.p + 1.0) * self.primitive(t, x, xi);
                let rhs = xi * (self.f)(t, x, xi);
                let slack = 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
                let gap = lhs - rhs - slack;
                if gap > 0.0 && worst.map_or(true, |w| gap > w.magnitude) {
                    worst = Some(Witness {
                        t,
                        x,
                        xi,
                        xi_other: None,
                        magnitude: lhs - rhs,
                    });
                }
            }
        }
        CheckOutcome {
            passed: worst.is_none(),
            witness: worst,
            samples,
        }
    }

    /// Verifies that `xi -> f(t, x, xi)` is nondecreasing on the sample grid.
    fn check_monotone(&self, s: &SampleSet) -> CheckOutcome {
        let mut sorted = s.xi.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut worst: Option<Witness> = None;
        let mut samples = 0;
        for &(t, x) in &s.tx {
            for w in sorted.windows(2) {
                samples += 1;
                let lo = (self.f)(t, x, w[0]);
                let hi = (self.f)(t, x, w[1]);
                let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                let drop = lo - hi - slack;
                if drop > 0.0 && worst.map_or(true, |v| drop > v.magnitude) {
                    worst = Some(Witness {
                        t,
                        x,
                        xi: w[0],
                        xi_other: Some(w[1]),
                        magnitude: lo - hi,
                    });
                }
            }
        }
        CheckOutcome {
            passed: worst.is_none(),
            witness: worst,
            samples,
        }
    }

    /// Fits two-sided power envelopes for the primitive on the sample grid.
    ///
    /// The lower coefficient is the sampled infimum of `F / |xi|^(p+1)`, the
    /// offset absorbs small-`xi` slack in `F >= c_lower |xi|^(p+1) - offset`,
    /// and `c_nu` realizes `|F| <= nu xi^2 + c_nu |xi|^(p+1)` for the given
    /// `nu`. `radius` is the smallest sampled `|xi|` beyond which the halved
    /// lower envelope holds without offset. A primitive that vanishes on the
    /// whole grid is reported as degenerate.
    pub fn envelope_fit(&self, nu: f64) -> EnvelopeFit {
        let s = SampleSet::standard();
        let mut magnitudes: Vec<f64> = s.xi.iter().map(|x| x.abs()).filter(|&m| m > 0.0).collect();
        magnitudes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        magnitudes.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

        let mut max_abs_prim: f64 = 0.0;
        let mut c_lower = f64::INFINITY;
        let mut c_nu: f64 = 0.0;
        for &(t, x) in &s.tx {
            for &m in &magnitudes {
                for sign in [-1.0, 1.0] {
                    let xi = sign * m;
                    let prim = self.primitive(t, x, xi);
                    max_abs_prim = max_abs_prim.max(prim.abs());
                    let denom = pow_abs(xi, self.p + 1.0);
                    if m >= 1e-3 {
                        c_lower = c_lower.min(prim / denom);
                    }
                    c_nu = c_nu.max((prim.abs() - nu * xi * xi) / denom);
                }
            }
        }
        if max_abs_prim < 1e-250 {
            return EnvelopeFit {
                c_lower: None,
                offset: 0.0,
                nu,
                c_nu: 0.0,
                radius: None,
                degenerate: true,
            };
        }

        let mut offset: f64 = 0.0;
        for &(t, x) in &s.tx {
            for &m in &magnitudes {
                for sign in [-1.0, 1.0] {
                    let xi = sign * m;
                    let prim = self.primitive(t, x, xi);
                    offset = offset.max(c_lower * pow_abs(xi, self.p + 1.0) - prim);
                }
            }
        }

        // Smallest sampled magnitude from which the halved envelope holds
        // at every larger sample.
        let mut radius = None;
        'outer: for (i, &r) in magnitudes.iter().enumerate() {
            for &m in &magnitudes[i..] {
                for &(t, x) in &s.tx {
                    for sign in [-1.0, 1.0] {
                        let xi = sign * m;
                        let need = 0.5 * c_lower * pow_abs(xi, self.p + 1.0);
                        if self.primitive(t, x, xi) < need - 1e-12 * (1.0 + need.abs()) {
                            continue 'outer;
                        }
                    }
                }
            }
            radius = Some(r);
            break;
        }

        EnvelopeFit {
            c_lower: Some(c_lower),
            offset,
            nu,
            c_nu: c_nu.max(0.0),
            radius,
            degenerate: false,
        }
    }
}

/// Adaptive Simpson integration of a scalar function.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 30)
}

/// Deterministic sample points shared by all checks.
struct SampleSet {
    tx: Vec<(f64, f64)>,
    xi: Vec<f64>,
}

impl SampleSet {
    fn standard() -> Self {
        let nt = 17;
        let nx = 17;
        let mut tx = Vec::with_capacity(nt * nx);
        for i in 0..nt {
            let t = 2.0 * PI * i as f64 / nt as f64;
            for m in 0..nx {
                let x = PI * (m + 1) as f64 / (nx + 1) as f64;
                tx.push((t, x));
            }
        }
        // 41 magnitudes log-spaced over [1e-6, 10], plus round anchors so
        // witnesses land on readable values, mirrored and joined by zero.
        let mut mags: Vec<f64> = (0..41)
            .map(|i| 10f64.powf(-6.0 + 7.0 * i as f64 / 40.0))
            .collect();
        mags.extend_from_slice(&[0.5, 1.0, 2.0]);
        let mut xi = Vec::with_capacity(2 * mags.len() + 1);
        for &m in &mags {
            xi.push(-m);
        }
        xi.push(0.0);
        xi.extend_from_slice(&mags);
        Self { tx, xi }
    }
}

/// Location and size of a hypothesis violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    /// Time sample.
    pub t: f64,
    /// Space sample.
    pub x: f64,
    /// State sample.
    pub xi: f64,
    /// Partner state sample for pairwise checks.
    pub xi_other: Option<f64>,
    /// Violation size, in the units of the inequality being checked.
    pub magnitude: f64,
}

/// Result of one sampled hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    /// Whether every sample satisfied the inequality.
    pub passed: bool,
    /// Worst violation when the check failed.
    pub witness: Option<Witness>,
    /// Number of samples inspected.
    pub samples: usize,
}

/// Outcomes of the four structural hypothesis checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    /// Polynomial growth bound.
    pub growth_bound: CheckOutcome,
    /// Superlinear vanishing at zero.
    pub flat_at_zero: CheckOutcome,
    /// Ambrosetti-Rabinowitz inequality.
    pub superquadratic: CheckOutcome,
    /// Monotonicity in the state variable.
    pub monotone: CheckOutcome,
}

impl HypothesisReport {
    /// True when all four checks passed.
    pub fn all_pass(&self) -> bool {
        self.growth_bound.passed
            && self.flat_at_zero.passed
            && self.superquadratic.passed
            && self.monotone.passed
    }
}

/// Sampled power envelopes for the primitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    /// Infimum of `F / |xi|^(p+1)` away from zero; `None` when degenerate.
    pub c_lower: Option<f64>,
    /// Additive slack making the lower envelope hold down to zero.
    pub offset: f64,
    /// Quadratic weight used for the upper envelope.
    pub nu: f64,
    /// Coefficient of `|xi|^(p+1)` in the upper envelope.
    pub c_nu: f64,
    /// Smallest sampled magnitude from which the halved lower envelope
    /// holds with no offset.
    pub radius: Option<f64>,
    /// True when the primitive vanished at every sample.
    pub degenerate: bool,
}
