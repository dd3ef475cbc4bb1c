//! Newton-Krylov search for critical points of the energy functional.
//!
//! The functional is strongly indefinite, so descent methods are useless;
//! instead the solver drives the strong-form residual to zero with Newton
//! steps. Each linear solve is matrix-free GMRES, right-preconditioned by
//! the diagonal inverse of `L + b`, which leaves a compact perturbation of
//! the identity and converges in a handful of iterations at the truncations
//! this crate targets. On top of the basic iteration sit a Picard fallback,
//! nested-truncation refinement, continuation in the coupling strength, and
//! a multi-start search for unforced nontrivial states.
//!
//! Coefficient pairs are flattened to real vectors with mode-dependent
//! scaling chosen so the Euclidean inner product of packed vectors equals
//! the `L2` inner product of the fields; all Krylov geometry is therefore
//! geometry of the underlying function space.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::functional::{
    decomposition_report, DecompositionReport, EnergyModel, FieldPair, Forcing, ResidualNorms,
};
use crate::grid::{from_grid, to_grid, GridField};
use crate::modes::{ModeIndex, Truncation};
use crate::nonlin::Nonlinearity;

/// Where a solve starts from.
#[derive(Debug, Clone)]
pub enum InitialGuess {
    /// The zero state.
    Zero,
    /// A single normalized mode in the first component, zero second
    /// component.
    SingleMode {
        /// Which mode.
        mode: ModeIndex,
        /// Its amplitude.
        amplitude: f64,
    },
    /// An explicit starting state, e.g. from a file or a previous solve.
    Warm(FieldPair),
}

/// Step-length control for Newton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linesearch {
    /// Always take the full step.
    None,
    /// Halve the step until the residual decreases, up to 20 times.
    Backtracking,
}

/// How the Jacobian action is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Diagonal wave operator plus pointwise multiplication by the
    /// derivative of the nonlinearity on the collocation grid. Falls back
    /// to a pointwise difference quotient when no derivative closure is
    /// available.
    Analytic,
    /// Directional difference of the full residual map.
    FiniteDifference,
}

/// Everything a single solve needs besides the problem data.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Mass shift `b`.
    pub b: f64,
    /// Coupling strength `eps`.
    pub eps: f64,
    /// Galerkin truncation.
    pub trunc: Truncation,
    /// Convergence target for the dual residual norm.
    pub tol_residual: f64,
    /// Newton (or Picard sweep) budget.
    pub max_newton: usize,
    /// Step-length strategy.
    pub linesearch: Linesearch,
    /// Starting state.
    pub initial_guess: InitialGuess,
    /// Jacobian realization.
    pub jacobian: JacobianMode,
    /// Relative residual target of the inner linear solves.
    pub krylov_tol: f64,
    /// Iteration cap of the inner linear solves.
    pub krylov_maxit: usize,
}

impl SolveConfig {
    /// Defaults for the given problem size.
    pub fn new(b: f64, eps: f64, trunc: Truncation) -> Self {
        Self {
            b,
            eps,
            trunc,
            tol_residual: 1e-9,
            max_newton: 50,
            linesearch: Linesearch::Backtracking,
            initial_guess: InitialGuess::Zero,
            jacobian: JacobianMode::Analytic,
            krylov_tol: 1e-6,
            krylov_maxit: 200,
        }
    }

    /// Rejects tolerances, budgets, and guesses a solve cannot run with.
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) || !(self.krylov_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "residual tolerances must be positive".into(),
            ));
        }
        if self.krylov_maxit == 0 {
            return Err(Error::InvalidConfig(
                "krylov iteration cap must be positive".into(),
            ));
        }
        match &self.initial_guess {
            InitialGuess::SingleMode { mode, .. } if !self.trunc.contains(*mode) => {
                Err(Error::InvalidConfig(format!(
                    "initial mode ({}, {}) lies outside the truncation",
                    mode.j, mode.k
                )))
            }
            InitialGuess::Warm(pair) if pair.truncation() != self.trunc => {
                Err(Error::TruncationMismatch)
            }
            _ => Ok(()),
        }
    }

    fn starting_state(&self) -> FieldPair {
        match &self.initial_guess {
            InitialGuess::Zero => FieldPair::zero(self.trunc),
            InitialGuess::SingleMode { mode, amplitude } => FieldPair {
                u: SpectralField::mode(self.trunc, *mode, *amplitude),
                v: SpectralField::zero(self.trunc),
            },
            InitialGuess::Warm(pair) => pair.clone(),
        }
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Final state.
    pub state: FieldPair,
    /// Whether the dual residual reached the tolerance.
    pub converged: bool,
    /// Newton steps (or Picard sweeps) taken.
    pub iterations: usize,
    /// Dual residual after each step, starting with the initial state.
    pub residual_history: Vec<f64>,
    /// Final residual in both norms.
    pub residual: ResidualNorms,
    /// Energy at the final state.
    pub energy: f64,
    /// Per-class norms of the final state.
    pub decomposition: DecompositionReport,
    /// Whether both components carry more than 1e-6 of `L2` mass.
    pub nontrivial: bool,
    /// Whether the coupling exceeds half the safe perturbative margin.
    pub eps_warning: bool,
    /// Inner linear-solver iterations, summed over all steps.
    pub krylov_iterations: usize,
    /// `L2` increment from the previous stage, when produced by [`refine`].
    pub refinement_increment: Option<f64>,
}

const NONTRIVIAL_TOL: f64 = 1e-6;

struct Packing {
    trunc: Truncation,
    field_len: usize,
}

impl Packing {
    fn new(trunc: Truncation) -> Self {
        let field_len = trunc.j_max as usize * (2 * trunc.k_max as usize + 1);
        Self { trunc, field_len }
    }

    fn len(&self) -> usize {
        2 * self.field_len
    }

    fn pack_field(&self, field: &SpectralField, out: &mut [f64]) {
        let mut i = 0;
        for m in self.trunc.iter_stored() {
            let c = field.get(m.j, m.k);
            if m.k == 0 {
                out[i] = PI * c.re;
                i += 1;
            } else {
                let s = PI * 2f64.sqrt();
                out[i] = s * c.re;
                out[i + 1] = s * c.im;
                i += 2;
            }
        }
    }

    fn pack(&self, pair: &FieldPair) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.pack_field(&pair.u, &mut out[..self.field_len]);
        self.pack_field(&pair.v, &mut out[self.field_len..]);
        out
    }

    fn unpack_field(&self, x: &[f64]) -> SpectralField {
        let mut i = 0;
        SpectralField::from_fn(self.trunc, |m| {
            if m.k == 0 {
                let c = Complex64::new(x[i] / PI, 0.0);
                i += 1;
                c
            } else {
                let s = PI * 2f64.sqrt();
                let c = Complex64::new(x[i] / s, x[i + 1] / s);
                i += 2;
                c
            }
        })
    }

    fn unpack(&self, x: &[f64]) -> FieldPair {
        FieldPair {
            u: self.unpack_field(&x[..self.field_len]),
            v: self.unpack_field(&x[self.field_len..]),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Pointwise derivative values of `nl` along the grid samples of `field`,
/// via the exact closure when present and a difference quotient otherwise.
fn derivative_on_grid(
    nl: &Nonlinearity,
    grid: &GridField,
    force_difference: bool,
) -> Vec<f64> {
    let mut vals = Vec::with_capacity(grid.values().len());
    let nx = grid.nx();
    for (idx, &xi) in grid.values().iter().enumerate() {
        let t = grid.t_coord(idx / nx);
        let x = grid.x_coord(idx % nx);
        let d = if force_difference {
            None
        } else {
            nl.derivative(t, x, xi)
        };
        let d = d.unwrap_or_else(|| {
            let h = 1e-6 * (1.0 + xi.abs());
            (nl.eval(t, x, xi + h) - nl.eval(t, x, xi - h)) / (2.0 * h)
        });
        vals.push(d);
    }
    vals
}

/// The linearized residual operator at a fixed state, in packed coordinates.
///
/// Applies `d -> (L+b) d_u + eps d_v + df(u) d_u` (and symmetrically), the
/// derivative of the strong residual; the Newton system is `A d = gradient`.
struct JacobianOp<'a> {
    model: &'a EnergyModel,
    packing: &'a Packing,
    mode: JacobianMode,
    df_u: Vec<f64>,
    df_v: Vec<f64>,
    state: &'a FieldPair,
    grad: &'a FieldPair,
}

impl<'a> JacobianOp<'a> {
    fn new(
        model: &'a EnergyModel,
        packing: &'a Packing,
        mode: JacobianMode,
        state: &'a FieldPair,
        grad: &'a FieldPair,
    ) -> Result<Self> {
        let (df_u, df_v) = match mode {
            JacobianMode::Analytic => {
                let (nt, nx) = model.grid_sizes();
                let ug = to_grid(&state.u, nt, nx)?;
                let vg = to_grid(&state.v, nt, nx)?;
                (
                    derivative_on_grid(model.nonlinearity_u(), &ug, false),
                    derivative_on_grid(model.nonlinearity_v(), &vg, false),
                )
            }
            JacobianMode::FiniteDifference => (Vec::new(), Vec::new()),
        };
        Ok(Self {
            model,
            packing,
            mode,
            df_u,
            df_v,
            state,
            grad,
        })
    }

    fn multiply_project(
        &self,
        dir: &SpectralField,
        df: &[f64],
    ) -> Result<SpectralField> {
        let (nt, nx) = self.model.grid_sizes();
        let mut grid = to_grid(dir, nt, nx)?;
        for (val, d) in grid.values_mut().iter_mut().zip(df) {
            *val *= d;
        }
        from_grid(&grid, self.packing.trunc)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dir = self.packing.unpack(x);
        match self.mode {
            JacobianMode::Analytic => {
                let b = self.model.mass_shift();
                let eps = self.model.coupling();
                let au = dir
                    .u
                    .apply_l_plus_b(b)
                    .axpy(eps, &dir.v)?
                    .add(&self.multiply_project(&dir.u, &self.df_u)?)?;
                let av = dir
                    .v
                    .apply_l_plus_b(b)
                    .axpy(eps, &dir.u)?
                    .add(&self.multiply_project(&dir.v, &self.df_v)?)?;
                Ok(self.packing.pack(&FieldPair { u: au, v: av }))
            }
            JacobianMode::FiniteDifference => {
                let scale = 1.0 + self.state.l2_norm();
                let dir_norm = dir.l2_norm();
                if dir_norm == 0.0 {
                    return Ok(vec![0.0; x.len()]);
                }
                let delta = 1e-7 * scale / dir_norm;
                let perturbed = self.state.axpy(delta, &dir)?;
                let grad_p = self.model.gradient(&perturbed)?;
                // Residual is the negated gradient, so the difference
                // quotient flips sign.
                let diff = FieldPair {
                    u: grad_p.u.sub(&self.grad.u)?.scale(-1.0 / delta),
                    v: grad_p.v.sub(&self.grad.v)?.scale(-1.0 / delta),
                };
                Ok(self.packing.pack(&diff))
            }
        }
    }
}

/// Right-preconditioned GMRES for `A inv(M) z = rhs`, returning `inv(M) z`.
fn gmres(
    op: &JacobianOp<'_>,
    precondition: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = rhs.len();
    let beta = norm(rhs);
    if beta == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let maxit = maxit.min(n);
    let mut basis: Vec<Vec<f64>> = vec![rhs.iter().map(|x| x / beta).collect()];
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut iterations = 0;

    for j in 0..maxit {
        iterations = j + 1;
        let mut w = op.apply(&precondition(&basis[j])?)?;
        let mut col = Vec::with_capacity(j + 2);
        for v in basis.iter() {
            let hij = dot(&w, v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hij * vi;
            }
            col.push(hij);
        }
        let hnext = norm(&w);
        col.push(hnext);

        // Apply the accumulated rotations, then a new one to kill hnext.
        for i in 0..j {
            let tmp = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = tmp;
        }
        let denom = (col[j] * col[j] + hnext * hnext).sqrt();
        if denom == 0.0 {
            return Err(Error::LinearSolveBreakdown { iteration: j });
        }
        let (c, s) = (col[j] / denom, hnext / denom);
        col[j] = denom;
        cs.push(c);
        sn.push(s);
        let res = -s * g[j];
        g[j] *= c;
        g.push(res);
        h.push(col);

        let rel = g[j + 1].abs() / beta;
        if rel <= tol {
            break;
        }
        if hnext <= 1e-14 * beta {
            // Basis exhausted without reaching the target.
            return Err(Error::LinearSolveBreakdown { iteration: j });
        }
        if j + 1 < maxit {
            basis.push(w.iter().map(|x| x / hnext).collect());
        }
    }

    // Back substitution of the triangularized least-squares system.
    let m = h.len();
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for (l, yl) in y.iter().enumerate().take(m).skip(i + 1) {
            s -= h[l][i] * yl;
        }
        y[i] = s / h[i][i];
    }
    let mut z = vec![0.0; n];
    for (yi, v) in y.iter().zip(basis.iter()) {
        for (zi, vi) in z.iter_mut().zip(v) {
            *zi += yi * vi;
        }
    }
    Ok((precondition(&z)?, iterations))
}

fn finish_report(
    model: &EnergyModel,
    cfg: &SolveConfig,
    state: FieldPair,
    converged: bool,
    history: Vec<f64>,
    residual: ResidualNorms,
    krylov_iterations: usize,
) -> Result<SolveReport> {
    let energy = model.energy(&state)?;
    let decomposition = decomposition_report(&state, cfg.b)?;
    let nontrivial =
        state.u.l2_norm().min(state.v.l2_norm()) > NONTRIVIAL_TOL;
    let eps_warning = model.coupling_warning()?;
    Ok(SolveReport {
        iterations: history.len() - 1,
        state,
        converged,
        residual_history: history,
        residual,
        energy,
        decomposition,
        nontrivial,
        eps_warning,
        krylov_iterations,
    refinement_increment: None,
    })
}

/// Newton iteration on the strong residual.
///
/// Inner solves are matrix-free GMRES preconditioned by the diagonal
/// inverse of `L + b`; backtracking halves rejected steps up to 20 times.
/// Running out of Newton steps is reported through `converged = false`
/// rather than an error, so the caller still sees the trace.
pub fn newton_solve(
    cfg: &SolveConfig,
    f: &Nonlinearity,
    g: &Nonlinearity,
    forcing: &Forcing,
) -> Result<SolveReport> {
    cfg.validate()?;
    let model = EnergyModel::new(
        cfg.b,
        cfg.eps,
        f.clone(),
        g.clone(),
        forcing.clone(),
        cfg.trunc,
    )?;
    let packing = Packing::new(cfg.trunc);
    let precondition = |x: &[f64]| -> Result<Vec<f64>> {
        let pair = packing.unpack(x);
        Ok(packing.pack(&FieldPair {
            u: pair.u.invert_l_plus_b(cfg.b)?,
            v: pair.v.invert_l_plus_b(cfg.b)?,
        }))
    };

    let mut state = cfg.starting_state();
    let mut grad = model.gradient(&state)?;
    let mut res = ResidualNorms::of(&grad, cfg.b)?;
    let mut history = vec![res.dual];
    let mut krylov_total = 0;

    while res.dual > cfg.tol_residual && history.len() <= cfg.max_newton {
        let op = JacobianOp::new(&model, &packing, cfg.jacobian, &state, &grad)?;
        let rhs = packing.pack(&grad);
        let (step, inner) = gmres(&op, &precondition, &rhs, cfg.krylov_tol, cfg.krylov_maxit)?;
        krylov_total += inner;
        let direction = packing.unpack(&step);

        let mut alpha = 1.0;
        let mut best: Option<(FieldPair, FieldPair, ResidualNorms)> = None;
        for _ in 0..21 {
            let candidate = state.axpy(alpha, &direction)?;
            let cand_grad = model.gradient(&candidate)?;
            let cand_res = ResidualNorms::of(&cand_grad, cfg.b)?;
            let better = best
                .as_ref()
                .map_or(true, |(_, _, r)| cand_res.dual < r.dual);
            if better {
                best = Some((candidate, cand_grad, cand_res));
            }
            let accept = matches!(cfg.linesearch, Linesearch::None)
                || cand_res.dual <= (1.0 - 1e-4 * alpha) * res.dual;
            if accept {
                break;
            }
            alpha *= 0.5;
        }
        let (next, next_grad, next_res) = best.expect("at least one candidate evaluated");
        state = next;
        grad = next_grad;
        res = next_res;
        history.push(res.dual);
    }

    let converged = res.dual <= cfg.tol_residual;
    finish_report(&model, cfg, state, converged, history, res, krylov_total)
}

/// Picard sweeps `state <- state + inv(L+b) gradient`.
///
/// Equivalent to iterating `(u, v) <- -inv(L+b) (eps v + f(u) + h1, ...)`;
/// converges only when that map contracts, which the report records via
/// `converged`.
pub fn fixed_point_solve(
    cfg: &SolveConfig,
    f: &Nonlinearity,
    g: &Nonlinearity,
    forcing: &Forcing,
) -> Result<SolveReport> {
    cfg.validate()?;
    let model = EnergyModel::new(
        cfg.b,
        cfg.eps,
        f.clone(),
        g.clone(),
        forcing.clone(),
        cfg.trunc,
    )?;
    let mut state = cfg.starting_state();
    let mut grad = model.gradient(&state)?;
    let mut res = ResidualNorms::of(&grad, cfg.b)?;
    let mut history = vec![res.dual];

    while res.dual > cfg.tol_residual && history.len() <= cfg.max_newton {
        let update = FieldPair {
            u: grad.u.invert_l_plus_b(cfg.b)?,
            v: grad.v.invert_l_plus_b(cfg.b)?,
        };
        state = state.axpy(1.0, &update)?;
        grad = model.gradient(&state)?;
        res = ResidualNorms::of(&grad, cfg.b)?;
        history.push(res.dual);
        if !res.dual.is_finite() {
            break;
        }
    }

    let converged = res.dual <= cfg.tol_residual;
    finish_report(&model, cfg, state, converged, history, res, 0)
}

/// Nested truncations for a refinement run, coarse to fine.
#[derive(Debug, Clone)]
pub struct RefinementSchedule {
    stages: Vec<Truncation>,
}

impl RefinementSchedule {
    /// Validates that the stages are nested.
    pub fn new(stages: Vec<Truncation>) -> Result<Self> {
        for pair in stages.windows(2) {
            if !pair[0].subset_of(&pair[1]) {
                return Err(Error::InvalidConfig(
                    "refinement stages must be nondecreasing in both indices".into(),
                ));
            }
        }
        Ok(Self { stages })
    }

    /// The stage truncations in order.
    pub fn stages(&self) -> &[Truncation] {
        &self.stages
    }
}

/// Restriction onto a coarser truncation by dropping modes.
fn restrict(field: &SpectralField, coarse: Truncation) -> SpectralField {
    SpectralField::from_fn(coarse, |m| field.get(m.j, m.k))
}

/// Solves the same problem over a nested ladder of truncations, each stage
/// warm-started from the previous solution.
///
/// The forcing is given at the finest stage and restricted to the earlier
/// ones. Each report after the first carries the `L2` increment from the
/// embedded previous state, a Cauchy-style diagnostic for the ladder.
pub fn refine(
    schedule: &RefinementSchedule,
    cfg: &SolveConfig,
    f: &Nonlinearity,
    g: &Nonlinearity,
    forcing: &Forcing,
) -> Result<Vec<SolveReport>> {
    let stages = schedule.stages();
    let Some(finest) = stages.last() else {
        return Ok(Vec::new());
    };
    if forcing.truncation() != *finest {
        return Err(Error::TruncationMismatch);
    }
    let mut reports = Vec::with_capacity(stages.len());
    let mut previous: Option<FieldPair> = None;
    for stage in stages {
        let stage_forcing = Forcing::new(
            restrict(forcing.first(), *stage),
            restrict(forcing.second(), *stage),
        )?;
        let mut stage_cfg = cfg.clone();
        stage_cfg.trunc = *stage;
        if let Some(prev) = &previous {
            stage_cfg.initial_guess = InitialGuess::Warm(prev.embed(*stage)?);
        }
        let mut report = newton_solve(&stage_cfg, f, g, &stage_forcing)?;
        if let Some(prev) = &previous {
            report.refinement_increment =
                Some(prev.embed(*stage)?.l2_distance(&report.state)?);
        }
        previous = Some(report.state.clone());
        reports.push(report);
    }
    Ok(reports)
}

/// One row of a coupling-strength sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    /// Coupling strength of this stage.
    pub eps: f64,
    /// `L2` distance of the first component from the decoupled reference.
    pub err_u_l2: f64,
    /// `L2` distance of the second component from the decoupled reference.
    pub err_v_l2: f64,
    /// Energy at this stage's state.
    pub energy: f64,
    /// Final dual residual of this stage.
    pub res_dual: f64,
    /// Whether the stage converged.
    pub converged: bool,
    /// Newton steps the stage took.
    pub iterations: usize,
    /// Whether the stage's coupling exceeded the perturbative threshold.
    pub eps_warning: bool,
}

/// Result of a continuation run in the coupling strength.
#[derive(Debug, Clone)]
pub struct SweepReport {
    /// One record per completed stage, in input order.
    pub records: Vec<SweepRecord>,
    /// The decoupled reference state the errors are measured against.
    pub reference: FieldPair,
    /// Residual norms of the reference state at zero coupling.
    pub reference_residual: ResidualNorms,
    /// True when a stage failed and the sweep stopped early.
    pub truncated: bool,
}

/// Continuation in `eps`: solves the stages of `eps_list` in order, warm
/// starting each from the last state, and measures every stage against the
/// decoupled limit.
///
/// The reference is the state solved at `eps = 0`, taken from the sweep
/// itself when the list ends there and computed by one extra warm-started
/// solve otherwise. A stage that fails to converge truncates the sweep and
/// the partial records are returned.
pub fn continuation_in_epsilon(
    eps_list: &[f64],
    cfg: &SolveConfig,
    f: &Nonlinearity,
    g: &Nonlinearity,
    forcing: &Forcing,
) -> Result<SweepReport> {
    cfg.validate()?;
    let mut stages: Vec<(f64, SolveReport)> = Vec::with_capacity(eps_list.len());
    let mut guess = cfg.initial_guess.clone();
    let mut truncated = false;
    for &eps in eps_list {
        let mut stage_cfg = cfg.clone();
        stage_cfg.eps = eps;
        stage_cfg.initial_guess = guess.clone();
        match newton_solve(&stage_cfg, f, g, forcing) {
            Ok(report) if report.converged => {
                guess = InitialGuess::Warm(report.state.clone());
                stages.push((eps, report));
            }
            Ok(_) | Err(Error::LinearSolveBreakdown { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let reference = match stages.iter().rev().find(|(eps, _)| *eps == 0.0) {
        Some((_, report)) => report.state.clone(),
        None => {
            let mut zero_cfg = cfg.clone();
            zero_cfg.eps = 0.0;
            zero_cfg.initial_guess = guess;
            newton_solve(&zero_cfg, f, g, forcing)?.state
        }
    };
    let ref_model = EnergyModel::new(
        cfg.b,
        0.0,
        f.clone(),
        g.clone(),
        forcing.clone(),
        cfg.trunc,
    )?;
    let reference_residual = ref_model.residual_norms(&reference)?;

    let mut records = Vec::with_capacity(stages.len());
    for (eps, report) in &stages {
        records.push(SweepRecord {
            eps: *eps,
            err_u_l2: report.state.u.l2_distance(&reference.u)?,
            err_v_l2: report.state.v.l2_distance(&reference.v)?,
            energy: report.energy,
            res_dual: report.residual.dual,
            converged: report.converged,
            iterations: report.iterations,
            eps_warning: report.eps_warning,
        });
    }
    Ok(SweepReport {
        records,
        reference,
        reference_residual,
        truncated,
    })
}

/// Multi-start Newton search for nontrivial states of the unforced system.
///
/// Launches from every stored mode at a small geometric ladder of
/// amplitudes, keeps converged states whose components both carry `L2`
/// mass, and deduplicates by `L2` distance, preferring the lower energy
/// magnitude. At most `deflation_count` states are returned; finding none
/// is a valid outcome, not an error.
pub fn nontrivial_search(
    cfg: &SolveConfig,
    f: &Nonlinearity,
    g: &Nonlinearity,
    deflation_count: usize,
) -> Result<Vec<SolveReport>> {
    cfg.validate()?;
    if deflation_count == 0 {
        return Ok(Vec::new());
    }
    let forcing = Forcing::zero(cfg.trunc);
    let mut kept: Vec<SolveReport> = Vec::new();
    let amplitudes = [0.5, 1.0, 2.0];
    for m in cfg.trunc.iter_stored() {
        for &a in &amplitudes {
            let u = SpectralField::mode(cfg.trunc, m, a);
            let v = u.scale(0.2);
            let mut start_cfg = cfg.clone();
            start_cfg.initial_guess = InitialGuess::Warm(FieldPair { u, v });
            let report = match newton_solve(&start_cfg, f, g, &forcing) {
                Ok(r) => r,
                Err(Error::LinearSolveBreakdown { .. }) => continue,
                Err(e) => return Err(e),
            };
            if !report.converged || !report.nontrivial {
                continue;
            }
            let mut duplicate = false;
            for existing in kept.iter_mut() {
                if existing.state.l2_distance(&report.state)? <= 1e-4 {
                    duplicate = true;
                    if report.energy.abs() < existing.energy.abs() {
                        *existing = report.clone();
                    }
                    break;
                }
            }
            if !duplicate {
                kept.push(report);
                if kept.len() == deflation_count {
                    return Ok(kept);
                }
            }
        }
    }
    Ok(kept)
}
