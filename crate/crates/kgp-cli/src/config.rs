//! Run configuration: JSON schema, validation, and assembly of library
//! problem objects.
//!
//! Unknown fields are rejected everywhere so a typo cannot silently fall
//! back to a default. Validation happens before any computation and every
//! rejection names the offending field.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use kgp_core::{
    spectral_gap, spectrum_contains, Amplitude, FieldPair, Forcing, InitialGuess, JacobianMode,
    Linesearch, ModeIndex, Nonlinearity, SolveConfig, SpectralField, Truncation,
};

use crate::{classify, io, Failure};

/// Top-level configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Mass shift; must be positive and off the spectrum.
    pub b: f64,
    /// Coupling strength for single solves; defaults to 0.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Coupling stages for sweeps, outermost first.
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    /// Galerkin truncation.
    pub truncation: TruncationSpec,
    /// Nonlinearity of the first equation.
    #[serde(default)]
    pub f: NonlinSpec,
    /// Nonlinearity of the second equation.
    #[serde(default)]
    pub g: NonlinSpec,
    /// Right-hand side.
    #[serde(default)]
    pub forcing: ForcingSpec,
    /// Newton and Krylov controls.
    #[serde(default)]
    pub solver: SolverSpec,
    /// Input and diagnostics for the represent command.
    #[serde(default)]
    pub represent: Option<RepresentSpec>,
    /// Output directory; the command line `--out` flag wins.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Sampling seed, echoed into reports; `--seed` wins.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Stored harmonic rectangle `1 <= j <= j_max`, `0 <= k <= k_max`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    /// Highest spatial wavenumber.
    pub j_max: u32,
    /// Highest temporal harmonic.
    pub k_max: u32,
}

impl TruncationSpec {
    /// Library truncation value.
    pub fn build(&self) -> Truncation {
        Truncation::new(self.j_max, self.k_max)
    }
}

/// Nonlinearity descriptor.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinSpec {
    /// No nonlinear term.
    #[default]
    Zero,
    /// Odd power law `a(t,x) |xi|^(p-1) xi`.
    PowerLaw {
        /// Growth exponent, must exceed 1.
        p: f64,
        /// Coefficient, `const:<a>` or `cos_t:<base>,<modulation>`.
        amplitude: String,
    },
    /// Linear term `slope * xi`; a deliberate hypothesis counterexample.
    Linear {
        /// Slope of the term.
        slope: f64,
    },
}

impl NonlinSpec {
    /// Builds the library nonlinearity; `label` prefixes error messages.
    pub fn build(&self, label: &str) -> Result<Nonlinearity, Failure> {
        match self {
            NonlinSpec::Zero => Ok(Nonlinearity::zero()),
            NonlinSpec::PowerLaw { p, amplitude } => {
                let amp = parse_amplitude(amplitude)
                    .map_err(|m| Failure::Config(format!("{label}.amplitude: {m}")))?;
                Nonlinearity::power_law(*p, amp)
                    .map_err(|e| Failure::Config(format!("{label}: {e}")))
            }
            NonlinSpec::Linear { slope } => {
                if !slope.is_finite() {
                    return Err(Failure::Config(format!("{label}.slope: must be finite")));
                }
                Ok(Nonlinearity::linear(*slope))
            }
        }
    }
}

/// Parses `const:<a>` or `cos_t:<base>,<modulation>`.
pub fn parse_amplitude(raw: &str) -> Result<Amplitude, String> {
    let bad = || format!("expected const:<a> or cos_t:<base>,<modulation>, got {raw:?}");
    let (kind, rest) = raw.split_once(':').ok_or_else(bad)?;
    match kind {
        "const" => {
            let a: f64 = rest.trim().parse().map_err(|_| bad())?;
            if !a.is_finite() {
                return Err("coefficient must be finite".into());
            }
            Ok(Amplitude::Const(a))
        }
        "cos_t" => {
            let (base, modulation) = rest.split_once(',').ok_or_else(bad)?;
            let base: f64 = base.trim().parse().map_err(|_| bad())?;
            let modulation: f64 = modulation.trim().parse().map_err(|_| bad())?;
            if !base.is_finite() || !modulation.is_finite() {
                return Err("coefficients must be finite".into());
            }
            Ok(Amplitude::CosT { base, modulation })
        }
        _ => Err(bad()),
    }
}

/// One stored coefficient, `c_{j,k}` of `e^{ikt} sin(jx)`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    /// Spatial wavenumber, at least 1.
    pub j: u32,
    /// Temporal harmonic, `0 <= k <= k_max`.
    pub k: i32,
    /// Real part.
    pub re: f64,
    /// Imaginary part; must vanish for `k = 0`.
    #[serde(default)]
    pub im: f64,
}

/// Sparse coefficient lists for a two-component target state.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    /// First component.
    #[serde(default)]
    pub u: Vec<ModeEntry>,
    /// Second component.
    #[serde(default)]
    pub v: Vec<ModeEntry>,
}

/// Right-hand-side descriptor.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingSpec {
    /// Unforced problem.
    #[default]
    None,
    /// Forcing that makes `target` an exact solution.
    Manufactured {
        /// The state the forcing is built around.
        target: TargetSpec,
        /// Leave the cross-coupling out of the construction, so one
        /// forcing serves every coupling strength of a sweep.
        #[serde(default)]
        decoupled: bool,
    },
    /// Forcing pair read from a coefficient file.
    File {
        /// Path to the coefficient CSV.
        path: PathBuf,
    },
}

/// Step-length strategy names.
#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LinesearchSpec {
    /// Full Newton steps.
    None,
    /// Residual-reducing backtracking.
    #[default]
    Backtracking,
}

/// Jacobian realization names.
#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum JacobianSpec {
    /// Operator diagonal plus the pointwise derivative of the nonlinearity.
    #[default]
    #[serde(alias = "exact")]
    Analytic,
    /// Directional differences of the residual map.
    FiniteDifference,
}

/// Starting state descriptor.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GuessSpec {
    /// Start from rest.
    #[default]
    Zero,
    /// One mode in the first component.
    SingleMode {
        /// Spatial wavenumber.
        j: u32,
        /// Temporal harmonic.
        k: i32,
        /// Mode amplitude.
        amplitude: f64,
    },
    /// Warm start from a coefficient file.
    FromFile {
        /// Path to the coefficient CSV.
        path: PathBuf,
    },
}

/// Newton and Krylov controls; every field has the library default.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    /// Convergence target for the dual residual norm.
    pub tol_residual: f64,
    /// Newton iteration budget.
    pub max_newton: usize,
    /// Step-length strategy.
    pub linesearch: LinesearchSpec,
    /// Jacobian realization.
    pub jacobian: JacobianSpec,
    /// Relative tolerance of the inner linear solves.
    pub krylov_tol: f64,
    /// Iteration cap of the inner linear solves.
    pub krylov_maxit: usize,
    /// Starting state.
    pub initial_guess: GuessSpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            tol_residual: 1e-9,
            max_newton: 50,
            linesearch: LinesearchSpec::default(),
            jacobian: JacobianSpec::default(),
            krylov_tol: 1e-6,
            krylov_maxit: 200,
            initial_guess: GuessSpec::default(),
        }
    }
}

/// Input selection and diagnostics for the represent command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentSpec {
    /// The field to invert.
    pub input: InputSpec,
    /// Shifts for the kernel-profile modulus table, each in `(0, 1/4)`.
    #[serde(default = "default_shifts")]
    pub shifts: Vec<f64>,
    /// Quadrature nodes per unit length for the representation integrals.
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
    /// Sample count for the solvability trace.
    #[serde(default = "default_nt_samples")]
    pub nt_samples: usize,
    /// Output grid for `w1`; defaults to 64 by 31.
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

fn default_shifts() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

fn default_quad_nodes() -> usize {
    64
}

fn default_nt_samples() -> usize {
    64
}

/// Uniform output grid sizes.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Time samples over one period.
    pub nt: usize,
    /// Interior space samples.
    pub nx: usize,
}

/// Which component of a coefficient file to use.
#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    /// First component.
    #[default]
    U,
    /// Second component.
    V,
}

/// Field source for the represent command.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    /// Sparse list of stored coefficients.
    Modes {
        /// Truncation to place the modes in; inferred from the entries
        /// when absent.
        #[serde(default)]
        truncation: Option<TruncationSpec>,
        /// The coefficients.
        entries: Vec<ModeEntry>,
    },
    /// One component of a coefficient file.
    File {
        /// Path to the coefficient CSV.
        path: PathBuf,
        /// Which column pair to read.
        #[serde(default)]
        component: Component,
    },
}

impl RunConfig {
    /// Reads and parses a configuration file.
    pub fn load(path: &Path) -> Result<RunConfig, Failure> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&raw)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// Coupling strength for single solves.
    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(0.0)
    }

    /// Checks the fields every command depends on.
    pub fn validate(&self) -> Result<(), Failure> {
        if !self.b.is_finite() || self.b <= 0.0 {
            return Err(Failure::Config(format!(
                "b: must be positive and finite, got {}",
                self.b
            )));
        }
        if spectrum_contains(self.b) {
            let gap = spectral_gap(self.b).map_err(classify)?;
            return Err(Failure::Config(format!(
                "b: -{} is the eigenvalue {} of the wave operator, the shifted problem is degenerate",
                self.b, gap.attained_at
            )));
        }
        if let Some(eps) = self.eps {
            if !eps.is_finite() {
                return Err(Failure::Config("eps: must be finite".into()));
            }
        }
        if let Some(list) = &self.eps_list {
            if list.is_empty() {
                return Err(Failure::Config("eps_list: must not be empty".into()));
            }
            if let Some(bad) = list.iter().find(|e| !e.is_finite()) {
                return Err(Failure::Config(format!("eps_list: entry {bad} is not finite")));
            }
        }
        if self.truncation.j_max == 0 {
            return Err(Failure::Config("truncation.j_max: must be at least 1".into()));
        }
        Ok(())
    }

    /// Builds the solver configuration together with the problem data.
    pub fn solve_inputs(
        &self,
        eps: f64,
    ) -> Result<(SolveConfig, Nonlinearity, Nonlinearity, Forcing), Failure> {
        let trunc = self.truncation.build();
        let f = self.f.build("f")?;
        let g = self.g.build("g")?;
        let forcing = self.build_forcing(trunc, eps, &f, &g)?;

        let mut cfg = SolveConfig::new(self.b, eps, trunc);
        cfg.tol_residual = self.solver.tol_residual;
        cfg.max_newton = self.solver.max_newton;
        cfg.linesearch = match self.solver.linesearch {
            LinesearchSpec::None => Linesearch::None,
            LinesearchSpec::Backtracking => Linesearch::Backtracking,
        };
        cfg.jacobian = match self.solver.jacobian {
            JacobianSpec::Analytic => JacobianMode::Analytic,
            JacobianSpec::FiniteDifference => JacobianMode::FiniteDifference,
        };
        cfg.krylov_tol = self.solver.krylov_tol;
        cfg.krylov_maxit = self.solver.krylov_maxit;
        cfg.initial_guess = match &self.solver.initial_guess {
            GuessSpec::Zero => InitialGuess::Zero,
            GuessSpec::SingleMode { j, k, amplitude } => InitialGuess::SingleMode {
                mode: ModeIndex::new(*j, *k),
                amplitude: *amplitude,
            },
            GuessSpec::FromFile { path } => {
                let file = io::read_coeffs(path)?;
                let pair = embed_into(file.pair, trunc, "solver.initial_guess")?;
                InitialGuess::Warm(pair)
            }
        };
        cfg.validate().map_err(classify)?;
        Ok((cfg, f, g, forcing))
    }

    fn build_forcing(
        &self,
        trunc: Truncation,
        eps: f64,
        f: &Nonlinearity,
        g: &Nonlinearity,
    ) -> Result<Forcing, Failure> {
        match &self.forcing {
            ForcingSpec::None => Ok(Forcing::zero(trunc)),
            ForcingSpec::Manufactured { target, decoupled } => {
                let u = build_field(trunc, &target.u, "forcing.target.u")?;
                let v = build_field(trunc, &target.v, "forcing.target.v")?;
                let pair = FieldPair::new(u, v).map_err(classify)?;
                let built = if *decoupled {
                    Forcing::manufactured_decoupled(&pair, self.b, f, g)
                } else {
                    Forcing::manufactured(&pair, self.b, eps, f, g)
                };
                built.map_err(classify)
            }
            ForcingSpec::File { path } => {
                let file = io::read_coeffs(path)?;
                let pair = embed_into(file.pair, trunc, "forcing")?;
                Forcing::new(pair.u, pair.v).map_err(classify)
            }
        }
    }

    /// The target state of a manufactured forcing, when one is configured.
    pub fn manufactured_target(&self) -> Result<Option<FieldPair>, Failure> {
        let trunc = self.truncation.build();
        match &self.forcing {
            ForcingSpec::Manufactured { target, .. } => {
                let u = build_field(trunc, &target.u, "forcing.target.u")?;
                let v = build_field(trunc, &target.v, "forcing.target.v")?;
                Ok(Some(FieldPair::new(u, v).map_err(classify)?))
            }
            _ => Ok(None),
        }
    }
}

/// Places a pair into `trunc`, enlarging but never cropping.
fn embed_into(pair: FieldPair, trunc: Truncation, label: &str) -> Result<FieldPair, Failure> {
    let have = pair.truncation();
    if have == trunc {
        return Ok(pair);
    }
    if !have.subset_of(&trunc) {
        return Err(Failure::Config(format!(
            "{label}: file truncation ({}, {}) exceeds configured ({}, {})",
            have.j_max, have.k_max, trunc.j_max, trunc.k_max
        )));
    }
    pair.embed(trunc).map_err(classify)
}

/// Assembles a field from sparse entries, validating each against `trunc`.
pub fn build_field(
    trunc: Truncation,
    entries: &[ModeEntry],
    label: &str,
) -> Result<SpectralField, Failure> {
    let mut field = SpectralField::zero(trunc);
    for (i, e) in entries.iter().enumerate() {
        if e.k < 0 {
            return Err(Failure::Config(format!(
                "{label}[{i}]: store k >= 0 only; negative harmonics are implied by conjugacy"
            )));
        }
        if e.j < 1 || !trunc.contains(ModeIndex::new(e.j, e.k)) {
            return Err(Failure::Config(format!(
                "{label}[{i}]: mode ({}, {}) outside truncation ({}, {})",
                e.j, e.k, trunc.j_max, trunc.k_max
            )));
        }
        if e.k == 0 && e.im != 0.0 {
            return Err(Failure::Config(format!(
                "{label}[{i}]: the k = 0 coefficient must be real"
            )));
        }
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(Failure::Config(format!("{label}[{i}]: coefficient must be finite")));
        }
        field.set(e.j, e.k, kgp_core::Complex64::new(e.re, e.im));
    }
    Ok(field)
}

/// Builds the represent input field and remembers where it came from.
pub fn build_represent_input(spec: &InputSpec) -> Result<SpectralField, Failure> {
    match spec {
        InputSpec::Modes { truncation, entries } => {
            let trunc = match truncation {
                Some(t) => {
                    if t.j_max == 0 {
                        return Err(Failure::Config(
                            "represent.input.truncation.j_max: must be at least 1".into(),
                        ));
                    }
                    t.build()
                }
                None => infer_truncation(entries)?,
            };
            build_field(trunc, entries, "represent.input.entries")
        }
        InputSpec::File { path, component } => {
            let file = io::read_coeffs(path)?;
            Ok(match component {
                Component::U => file.pair.u,
                Component::V => file.pair.v,
            })
        }
    }
}

fn infer_truncation(entries: &[ModeEntry]) -> Result<Truncation, Failure> {
    let mut j_max = 1u32;
    let mut k_max = 0u32;
    for e in entries {
        j_max = j_max.max(e.j);
        k_max = k_max.max(e.k.unsigned_abs());
    }
    Ok(Truncation::new(j_max, k_max))
}
