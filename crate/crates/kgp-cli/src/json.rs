//! JSON report shapes and a serializer that prints floats with 17
//! significant digits.
//!
//! The core library stays serialization-free; these mirrors fix the field
//! names of the on-disk reports independently of internal struct layout.

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use kgp_core::{
    CheckOutcome, DecompositionReport, HypothesisReport, ResidualNorms, SpectralGapInfo,
    SweepRecord, Truncation, Witness,
};

use crate::{io::write_text, Failure};

/// Pretty printer whose floats round-trip exactly.
struct SciFormatter {
    inner: PrettyFormatter<'static>,
}

impl SciFormatter {
    fn new() -> Self {
        SciFormatter {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes a report to pretty JSON with round-trip floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SciFormatter::new());
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serializer emits UTF-8")
}

/// Writes a report file atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    write_text(path, &to_json(value))
}

/// Truncation echo.
#[derive(Debug, Serialize)]
pub struct TruncationJson {
    /// Highest spatial wavenumber.
    pub j_max: u32,
    /// Highest temporal harmonic.
    pub k_max: u32,
}

impl From<Truncation> for TruncationJson {
    fn from(t: Truncation) -> Self {
        TruncationJson {
            j_max: t.j_max,
            k_max: t.k_max,
        }
    }
}

/// Worst violation point of a failed check.
#[derive(Debug, Serialize)]
pub struct WitnessJson {
    /// Time sample.
    pub t: f64,
    /// Space sample.
    pub x: f64,
    /// State sample.
    pub xi: f64,
    /// Partner state for pairwise checks.
    pub xi_other: Option<f64>,
    /// Violation size.
    pub magnitude: f64,
}

impl From<Witness> for WitnessJson {
    fn from(w: Witness) -> Self {
        WitnessJson {
            t: w.t,
            x: w.x,
            xi: w.xi,
            xi_other: w.xi_other,
            magnitude: w.magnitude,
        }
    }
}

/// One sampled hypothesis check.
#[derive(Debug, Serialize)]
pub struct OutcomeJson {
    /// Whether every sample satisfied the inequality.
    pub passed: bool,
    /// Samples inspected.
    pub samples: usize,
    /// Worst violation when failed.
    pub witness: Option<WitnessJson>,
}

impl From<CheckOutcome> for OutcomeJson {
    fn from(o: CheckOutcome) -> Self {
        OutcomeJson {
            passed: o.passed,
            samples: o.samples,
            witness: o.witness.map(Into::into),
        }
    }
}

/// The four structural hypothesis checks for one nonlinearity.
#[derive(Debug, Serialize)]
pub struct HypothesisJson {
    /// Polynomial growth bound.
    pub growth_bound: OutcomeJson,
    /// Superlinear vanishing at zero.
    pub flat_at_zero: OutcomeJson,
    /// Superquadratic primitive inequality.
    pub superquadratic: OutcomeJson,
    /// Monotonicity in the state.
    pub monotone: OutcomeJson,
    /// Conjunction of the four.
    pub all_pass: bool,
}

impl From<HypothesisReport> for HypothesisJson {
    fn from(r: HypothesisReport) -> Self {
        let all = r.all_pass();
        HypothesisJson {
            growth_bound: r.growth_bound.into(),
            flat_at_zero: r.flat_at_zero.into(),
            superquadratic: r.superquadratic.into(),
            monotone: r.monotone.into(),
            all_pass: all,
        }
    }
}

/// Spectrum location of the shift.
#[derive(Debug, Serialize)]
pub struct SpectrumJson {
    /// Mass shift.
    pub b: f64,
    /// Distance to the nearest eigenvalue.
    pub eta: f64,
    /// Conditioning constant.
    pub kappa: f64,
    /// Whether the shift collides with the spectrum.
    pub in_spectrum: bool,
    /// Eigenvalue attaining the distance.
    pub attained_at: i64,
}

impl From<SpectralGapInfo> for SpectrumJson {
    fn from(g: SpectralGapInfo) -> Self {
        SpectrumJson {
            b: g.b,
            eta: g.eta,
            kappa: g.kappa,
            in_spectrum: g.in_spectrum,
            attained_at: g.attained_at,
        }
    }
}

/// `check` command report.
#[derive(Debug, Serialize)]
pub struct CheckJson {
    /// Mass shift.
    pub b: f64,
    /// Coupling strength.
    pub eps: f64,
    /// Truncation echo.
    pub truncation: TruncationJson,
    /// Spectral placement of the shift.
    pub spectrum: SpectrumJson,
    /// Whether the coupling is large relative to the gap.
    pub coupling_warning: bool,
    /// Checks for the first nonlinearity.
    pub f: HypothesisJson,
    /// Checks for the second nonlinearity.
    pub g: HypothesisJson,
    /// Conjunction of all checks.
    pub pass: bool,
    /// Echoed sampling seed.
    pub seed: Option<u64>,
    /// Requested thread cap, 0 for auto.
    pub threads: u64,
}

/// Residual norms echo.
#[derive(Debug, Serialize)]
pub struct ResidualJson {
    /// Plain `L2` norm of the gradient.
    pub l2: f64,
    /// Dual norm of the gradient.
    pub dual: f64,
}

impl From<ResidualNorms> for ResidualJson {
    fn from(r: ResidualNorms) -> Self {
        ResidualJson {
            l2: r.l2,
            dual: r.dual,
        }
    }
}

/// Norm splitting echo.
#[derive(Debug, Serialize)]
pub struct DecompositionJson {
    /// Working-norm of the positive part of `u`.
    pub u_plus_h: f64,
    /// Working-norm of the negative part of `u`.
    pub u_minus_h: f64,
    /// `L2` norm of the kernel part of `u`.
    pub y_l2: f64,
    /// Working-norm of the positive part of `v`.
    pub v_plus_h: f64,
    /// Working-norm of the negative part of `v`.
    pub v_minus_h: f64,
    /// `L2` norm of the kernel part of `v`.
    pub z_l2: f64,
    /// Product-space norm.
    pub e_norm: f64,
    /// Disagreement of the two assembly routes.
    pub identity_gap: f64,
}

impl From<DecompositionReport> for DecompositionJson {
    fn from(d: DecompositionReport) -> Self {
        DecompositionJson {
            u_plus_h: d.u_plus_h,
            u_minus_h: d.u_minus_h,
            y_l2: d.y_l2,
            v_plus_h: d.v_plus_h,
            v_minus_h: d.v_minus_h,
            z_l2: d.z_l2,
            e_norm: d.e_norm,
            identity_gap: d.identity_gap,
        }
    }
}

/// `solve` command report.
#[derive(Debug, Serialize)]
pub struct SolveJson {
    /// Mass shift.
    pub b: f64,
    /// Coupling strength.
    pub eps: f64,
    /// Truncation echo.
    pub truncation: TruncationJson,
    /// Whether the residual target was met.
    pub converged: bool,
    /// Newton iterations taken.
    pub iterations: usize,
    /// Final residual norms.
    pub residual: ResidualJson,
    /// Dual residual after each iteration, starting with the initial state.
    pub residual_history: Vec<f64>,
    /// Functional value at the final state.
    pub energy: f64,
    /// Whether both components are away from zero.
    pub nontrivial: bool,
    /// Whether the coupling exceeded the perturbative threshold.
    pub eps_warning: bool,
    /// Inner linear iterations across the whole solve.
    pub krylov_iterations: usize,
    /// Norm splitting of the final state.
    pub decomposition: DecompositionJson,
    /// Distance to the manufactured target, when one was configured.
    pub recovered_error: Option<f64>,
    /// Echoed sampling seed.
    pub seed: Option<u64>,
    /// Requested thread cap, 0 for auto.
    pub threads: u64,
}

/// One sweep stage in the report.
#[derive(Debug, Serialize)]
pub struct StageJson {
    /// Coupling strength of the stage.
    pub eps: f64,
    /// `L2` distance of `u` to the reference.
    pub err_u_l2: f64,
    /// `L2` distance of `v` to the reference.
    pub err_v_l2: f64,
    /// Functional value.
    pub phi: f64,
    /// Dual residual.
    pub res_dual: f64,
    /// Whether the stage converged.
    pub converged: bool,
    /// Newton iterations of the stage.
    pub iterations: usize,
    /// Whether the coupling exceeded the perturbative threshold.
    pub eps_warning: bool,
}

impl From<&SweepRecord> for StageJson {
    fn from(r: &SweepRecord) -> Self {
        StageJson {
            eps: r.eps,
            err_u_l2: r.err_u_l2,
            err_v_l2: r.err_v_l2,
            phi: r.energy,
            res_dual: r.res_dual,
            converged: r.converged,
            iterations: r.iterations,
            eps_warning: r.eps_warning,
        }
    }
}

/// `sweep` command report.
#[derive(Debug, Serialize)]
pub struct SweepJson {
    /// Mass shift.
    pub b: f64,
    /// Truncation echo.
    pub truncation: TruncationJson,
    /// Per-stage outcomes in run order.
    pub stages: Vec<StageJson>,
    /// Whether the sweep stopped before the list was exhausted.
    pub truncated: bool,
    /// Residual norms of the reference state.
    pub reference_residual: ResidualJson,
    /// Echoed sampling seed.
    pub seed: Option<u64>,
    /// Requested thread cap, 0 for auto.
    pub threads: u64,
}

/// `represent` command report.
#[derive(Debug, Serialize)]
pub struct RepresentJson {
    /// Whether the input passed the solvability criterion.
    pub in_range: bool,
    /// Largest sampled violation of the criterion.
    pub sup_violation: f64,
    /// Kernel mass the raw double integral produced, when inverted.
    pub kernel_leak: Option<f64>,
    /// Truncation of the input field.
    pub input_truncation: TruncationJson,
    /// Highest harmonic of the kernel profile.
    pub profile_k_max: usize,
    /// Verdict of the modulus-of-continuity table.
    pub modulus_pass: bool,
    /// Echoed sampling seed.
    pub seed: Option<u64>,
    /// Requested thread cap, 0 for auto.
    pub threads: u64,
}
