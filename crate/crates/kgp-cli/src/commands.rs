//! The five subcommand implementations.
//!
//! Each returns the process exit code on the success path and a
//! [`Failure`] for hard errors; outputs that a failing run is specified to
//! leave behind, such as a partial sweep table, are written before the
//! nonzero code is returned.

use std::path::{Path, PathBuf};

use kgp_core::{
    continuation_in_epsilon, kernel_profile, kernel_range_split, newton_solve, range_condition,
    represent_w1, spectral_gap, EnergyModel, Error, Forcing, ModeClass, ModeIndex, SolveReport,
};

use crate::config::{GridSpec, RunConfig};
use crate::json::{CheckJson, RepresentJson, SolveJson, StageJson, SweepJson};
use crate::{classify, io, json, Failure};

/// Everything a command needs besides the configuration.
#[derive(Debug, Clone)]
pub struct Ctx {
    /// Directory output files go to.
    pub out_dir: PathBuf,
    /// Sampling seed, echoed into reports.
    pub seed: Option<u64>,
    /// Requested thread cap, 0 for auto.
    pub threads: u64,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Runs the hypothesis checkers and the spectral validations.
pub fn run_check(cfg: &RunConfig, ctx: &Ctx) -> Result<i32, Failure> {
    cfg.validate()?;
    let trunc = cfg.truncation.build();
    let f = cfg.f.build("f")?;
    let g = cfg.g.build("g")?;
    let gap = spectral_gap(cfg.b).map_err(classify)?;
    let model = EnergyModel::new(
        cfg.b,
        cfg.eps(),
        f.clone(),
        g.clone(),
        Forcing::zero(trunc),
        trunc,
    )
    .map_err(classify)?;
    let coupling_warning = model.coupling_warning().map_err(classify)?;

    let report_f = f.hypothesis_report();
    let report_g = g.hypothesis_report();
    let pass = report_f.all_pass() && report_g.all_pass();

    let out = CheckJson {
        b: cfg.b,
        eps: cfg.eps(),
        truncation: trunc.into(),
        spectrum: gap.into(),
        coupling_warning,
        f: report_f.into(),
        g: report_g.into(),
        pass,
        seed: ctx.seed,
        threads: ctx.threads,
    };
    json::write_json(&ctx.path("check.json"), &out)?;

    for (name, rep) in [("f", &report_f), ("g", &report_g)] {
        for (check, outcome) in [
            ("growth bound", rep.growth_bound),
            ("flat at zero", rep.flat_at_zero),
            ("superquadratic", rep.superquadratic),
            ("monotone", rep.monotone),
        ] {
            println!(
                "{name} {check}: {}",
                if outcome.passed { "pass" } else { "fail" }
            );
        }
    }
    if coupling_warning {
        println!("warning: coupling {} is large for the spectral gap {}", cfg.eps(), gap.eta);
    }
    println!("check: {}", if pass { "pass" } else { "fail" });
    Ok(if pass { 0 } else { 1 })
}

fn solve_report_json(
    cfg: &RunConfig,
    ctx: &Ctx,
    report: &SolveReport,
    recovered_error: Option<f64>,
) -> SolveJson {
    SolveJson {
        b: cfg.b,
        eps: cfg.eps(),
        truncation: cfg.truncation.build().into(),
        converged: report.converged,
        iterations: report.iterations,
        residual: report.residual.into(),
        residual_history: report.residual_history.clone(),
        energy: report.energy,
        nontrivial: report.nontrivial,
        eps_warning: report.eps_warning,
        krylov_iterations: report.krylov_iterations,
        decomposition: report.decomposition.into(),
        recovered_error,
        seed: ctx.seed,
        threads: ctx.threads,
    }
}

/// Runs one Newton solve and writes the state and its report.
pub fn run_solve(cfg: &RunConfig, ctx: &Ctx) -> Result<i32, Failure> {
    cfg.validate()?;
    let eps = cfg.eps();
    let (solve_cfg, f, g, forcing) = cfg.solve_inputs(eps)?;
    let report = newton_solve(&solve_cfg, &f, &g, &forcing).map_err(classify)?;

    let recovered_error = match cfg.manufactured_target()? {
        Some(target) => Some(report.state.l2_distance(&target).map_err(classify)?),
        None => None,
    };

    io::write_coeffs(&ctx.path("solution.csv"), &report.state, cfg.b, eps)?;
    let out = solve_report_json(cfg, ctx, &report, recovered_error);
    json::write_json(&ctx.path("report.json"), &out)?;

    println!(
        "solve: {} after {} iterations, dual residual {:.3e}",
        if report.converged { "converged" } else { "stalled" },
        report.iterations,
        report.residual.dual
    );
    if let Some(err) = recovered_error {
        println!("solve: distance to manufactured target {err:.3e}");
    }
    Ok(if report.converged { 0 } else { 1 })
}

/// Runs the coupling continuation and writes the sweep table.
pub fn run_sweep(cfg: &RunConfig, ctx: &Ctx) -> Result<i32, Failure> {
    cfg.validate()?;
    let eps_list = cfg
        .eps_list
        .clone()
        .ok_or_else(|| Failure::Config("eps_list: required by the sweep command".into()))?;
    let (solve_cfg, f, g, forcing) = cfg.solve_inputs(cfg.eps())?;
    let sweep =
        continuation_in_epsilon(&eps_list, &solve_cfg, &f, &g, &forcing).map_err(classify)?;

    io::write_text(&ctx.path("sweep.csv"), &io::sweep_to_string(&sweep.records))?;
    let out = SweepJson {
        b: cfg.b,
        truncation: cfg.truncation.build().into(),
        stages: sweep.records.iter().map(StageJson::from).collect(),
        truncated: sweep.truncated,
        reference_residual: sweep.reference_residual.into(),
        seed: ctx.seed,
        threads: ctx.threads,
    };
    json::write_json(&ctx.path("report.json"), &out)?;

    println!(
        "sweep: {} of {} stages converged{}",
        sweep.records.iter().filter(|r| r.converged).count(),
        eps_list.len(),
        if sweep.truncated { ", stopped early" } else { "" }
    );
    Ok(if sweep.truncated { 1 } else { 0 })
}

/// Runs the solvability trace and the range inversion with its
/// kernel-profile diagnostics.
pub fn run_represent(cfg: &RunConfig, ctx: &Ctx) -> Result<i32, Failure> {
    cfg.validate()?;
    let spec = cfg
        .represent
        .as_ref()
        .ok_or_else(|| Failure::Config("represent: section required by this command".into()))?;
    for (i, &h) in spec.shifts.iter().enumerate() {
        if !(h > 0.0 && h < 0.25) {
            return Err(Failure::Config(format!(
                "represent.shifts[{i}]: {h} outside (0, 1/4)"
            )));
        }
    }
    if spec.quad_nodes == 0 {
        return Err(Failure::Config("represent.quad_nodes: must be at least 1".into()));
    }

    let h = crate::config::build_represent_input(&spec.input)?;
    let trace = range_condition(&h, spec.nt_samples);
    io::write_text(&ctx.path("range_condition.csv"), &io::range_trace_to_string(&trace))?;

    let (kernel, _) = kernel_range_split(&h);
    let profile = kernel_profile(&kernel).map_err(classify)?;
    io::write_text(&ctx.path("profile_p.csv"), &io::profile_to_string(&profile))?;
    let modulus = kgp_core::continuity_report(&profile, &spec.shifts).map_err(classify)?;
    io::write_text(&ctx.path("modulus.csv"), &io::modulus_to_string(&modulus))?;

    let grid = spec.grid.unwrap_or(GridSpec { nt: 64, nx: 31 });
    let (in_range, sup, leak) = match represent_w1(&h, spec.quad_nodes) {
        Ok(sol) => {
            io::write_text(
                &ctx.path("w1.csv"),
                &io::field_grid_to_string(&sol.w1, grid.nt, grid.nx),
            )?;
            (true, trace.sup_violation, Some(sol.kernel_leak))
        }
        Err(Error::NotInRange { sup }) => (false, sup, None),
        Err(other) => return Err(classify(other)),
    };

    let out = RepresentJson {
        in_range,
        sup_violation: sup,
        kernel_leak: leak,
        input_truncation: h.truncation().into(),
        profile_k_max: profile.k_max(),
        modulus_pass: modulus.pass,
        seed: ctx.seed,
        threads: ctx.threads,
    };
    json::write_json(&ctx.path("represent.json"), &out)?;

    if in_range {
        println!(
            "represent: in range, sup violation {:.3e}, kernel leak {:.3e}",
            sup,
            leak.unwrap_or(0.0)
        );
        Ok(0)
    } else {
        println!("represent: not in range, sup violation {sup:.3e}");
        Ok(1)
    }
}

/// Writes the mode table and the gap summary.
pub fn run_spectrum(cfg: &RunConfig, ctx: &Ctx) -> Result<i32, Failure> {
    cfg.validate()?;
    let trunc = cfg.truncation.build();
    let gap = spectral_gap(cfg.b).map_err(classify)?;

    let mut kernel_rows = 0usize;
    for j in 1..=trunc.j_max {
        for k in -(trunc.k_max as i32)..=trunc.k_max as i32 {
            if ModeIndex::new(j, k).classify(cfg.b).map_err(classify)? == ModeClass::Kernel {
                kernel_rows += 1;
            }
        }
    }
    let table = io::spectrum_to_string(trunc, cfg.b, gap.eta, gap.kappa, kernel_rows);
    io::write_text(&ctx.path("spectrum.csv"), &table)?;

    println!(
        "spectrum: b={}, eta={}, kappa={}, kernel modes in table: {kernel_rows}",
        cfg.b, gap.eta, gap.kappa
    );
    Ok(0)
}

/// Loads the configuration and dispatches one subcommand.
pub fn dispatch(
    name: &str,
    config_path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<i32, Failure> {
    let cfg = RunConfig::load(config_path)?;
    let out_dir = out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let ctx = Ctx {
        out_dir,
        seed: seed.or(cfg.seed),
        threads: crate::thread_cap()?,
    };
    match name {
        "check" => run_check(&cfg, &ctx),
        "solve" => run_solve(&cfg, &ctx),
        "sweep" => run_sweep(&cfg, &ctx),
        "represent" => run_represent(&cfg, &ctx),
        "spectrum" => run_spectrum(&cfg, &ctx),
        other => Err(Failure::Config(format!("unknown command {other}"))),
    }
}
