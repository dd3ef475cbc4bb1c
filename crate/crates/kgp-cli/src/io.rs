//! File formats: the coefficient CSV, the diagnostic CSVs, and atomic
//! writes.
//!
//! Every float is printed as `{:.16e}`, 17 significant digits, so a file
//! read back reproduces the exact bit pattern and two runs of the same
//! configuration produce byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use kgp_core::{
    Complex64, ContinuityReport, FieldPair, KernelProfile, ModeIndex, RangeTrace, SpectralField,
    SweepRecord, Truncation,
};

use crate::Failure;

/// Formats a float with a full round-trip worth of digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes through a temporary file in the same directory, then renames,
/// so readers never observe a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// A parsed coefficient file.
#[derive(Debug, Clone)]
pub struct CoeffFile {
    /// The stored state.
    pub pair: FieldPair,
    /// Mass shift recorded in the header.
    pub b: f64,
    /// Coupling strength recorded in the header.
    pub eps: f64,
}

/// Serializes a state in the versioned coefficient format.
///
/// Line one carries the format tag and the problem scalars, line two the
/// column names, then one row per stored mode in `(j, k)` iteration order;
/// negative harmonics are implied by conjugacy.
pub fn coeffs_to_string(pair: &FieldPair, b: f64, eps: f64) -> String {
    let trunc = pair.truncation();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# kg-periodic coeffs v1, J={}, K={}, b={}, eps={}",
        trunc.j_max,
        trunc.k_max,
        fmt_f(b),
        fmt_f(eps)
    );
    out.push_str("j,k,re_u,im_u,re_v,im_v\n");
    for j in 1..=trunc.j_max {
        for k in 0..=trunc.k_max as i32 {
            let cu = pair.u.get(j, k);
            let cv = pair.v.get(j, k);
            let _ = writeln!(
                out,
                "{j},{k},{},{},{},{}",
                fmt_f(cu.re),
                fmt_f(cu.im),
                fmt_f(cv.re),
                fmt_f(cv.im)
            );
        }
    }
    out
}

/// Writes a state as a coefficient CSV.
pub fn write_coeffs(path: &Path, pair: &FieldPair, b: f64, eps: f64) -> Result<(), Failure> {
    atomic_write(path, coeffs_to_string(pair, b, eps).as_bytes())
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn parse_header_scalar(part: &str, key: &str, path: &Path) -> Result<f64, Failure> {
    let raw = part
        .trim()
        .strip_prefix(key)
        .ok_or_else(|| bad_header(path, part))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| bad_header(path, part))
}

fn parse_header_int(part: &str, key: &str, path: &Path) -> Result<u32, Failure> {
    let raw = part
        .trim()
        .strip_prefix(key)
        .ok_or_else(|| bad_header(path, part))?;
    raw.trim()
        .parse::<u32>()
        .map_err(|_| bad_header(path, part))
}

fn bad_header(path: &Path, part: &str) -> Failure {
    Failure::Config(format!(
        "{}: malformed coefficient header near {part:?}",
        path.display()
    ))
}

/// Reads a coefficient CSV back into a state.
///
/// The format is strict: exact header tag, exact column line, one row per
/// stored mode, real coefficients on the `k = 0` line.
pub fn read_coeffs(path: &Path) -> Result<CoeffFile, Failure> {
    let raw = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = raw.lines();

    let header = lines
        .next()
        .ok_or_else(|| Failure::Config(format!("{}: empty file", path.display())))?;
    let rest = header.strip_prefix("# kg-periodic coeffs v1,").ok_or_else(|| {
        Failure::Config(format!(
            "{}: not a kg-periodic coeffs v1 file",
            path.display()
        ))
    })?;
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 4 {
        return Err(bad_header(path, rest));
    }
    let j_max = parse_header_int(parts[0], "J=", path)?;
    let k_max = parse_header_int(parts[1], "K=", path)?;
    let b = parse_header_scalar(parts[2], "b=", path)?;
    let eps = parse_header_scalar(parts[3], "eps=", path)?;
    if j_max == 0 {
        return Err(Failure::Config(format!(
            "{}: header J must be at least 1",
            path.display()
        )));
    }

    let columns = lines
        .next()
        .ok_or_else(|| Failure::Config(format!("{}: missing column line", path.display())))?;
    if columns.trim() != "j,k,re_u,im_u,re_v,im_v" {
        return Err(Failure::Config(format!(
            "{}: unexpected column line {columns:?}",
            path.display()
        )));
    }

    let trunc = Truncation::new(j_max, k_max);
    let mut u = SpectralField::zero(trunc);
    let mut v = SpectralField::zero(trunc);
    let mut rows = 0usize;
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(row_error(path, lineno, "expected 6 comma-separated values"));
        }
        let j: u32 = fields[0]
            .trim()
            .parse()
            .map_err(|_| row_error(path, lineno, "bad j"))?;
        let k: i32 = fields[1]
            .trim()
            .parse()
            .map_err(|_| row_error(path, lineno, "bad k"))?;
        let mut vals = [0.0f64; 4];
        for (slot, raw) in vals.iter_mut().zip(&fields[2..]) {
            *slot = raw
                .trim()
                .parse()
                .map_err(|_| row_error(path, lineno, "bad coefficient"))?;
        }
        if j < 1 || j > j_max || k < 0 || k > k_max as i32 {
            return Err(row_error(path, lineno, "mode outside the header truncation"));
        }
        if k == 0 && (vals[1] != 0.0 || vals[3] != 0.0) {
            return Err(row_error(path, lineno, "k = 0 coefficients must be real"));
        }
        u.set(j, k, Complex64::new(vals[0], vals[1]));
        v.set(j, k, Complex64::new(vals[2], vals[3]));
        rows += 1;
    }
    let expected = (j_max as usize) * (k_max as usize + 1);
    if rows != expected {
        return Err(Failure::Config(format!(
            "{}: expected {expected} coefficient rows, found {rows}",
            path.display()
        )));
    }
    let pair = FieldPair::new(u, v)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(CoeffFile { pair, b, eps })
}

fn row_error(path: &Path, lineno: usize, what: &str) -> Failure {
    Failure::Config(format!(
        "{}: row {}: {what}",
        path.display(),
        lineno + 3
    ))
}

/// Serializes sweep records under the fixed five-column header.
pub fn sweep_to_string(records: &[SweepRecord]) -> String {
    let mut out = String::from("eps,err_u_l2,err_v_l2,phi,res_dual\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f(r.eps),
            fmt_f(r.err_u_l2),
            fmt_f(r.err_v_l2),
            fmt_f(r.energy),
            fmt_f(r.res_dual)
        );
    }
    out
}

/// Serializes the mode table, one row per harmonic including negative `k`,
/// with a trailing summary comment.
pub fn spectrum_to_string(
    trunc: Truncation,
    b: f64,
    eta: f64,
    kappa: f64,
    kernel_rows: usize,
) -> String {
    let mut out = String::from("j,k,lambda,class\n");
    for j in 1..=trunc.j_max {
        for k in -(trunc.k_max as i32)..=trunc.k_max as i32 {
            let m = ModeIndex::new(j, k);
            let class = m.classify(b).map(|c| c.name()).unwrap_or("collision");
            let _ = writeln!(out, "{j},{k},{},{class}", m.eigenvalue());
        }
    }
    let _ = writeln!(
        out,
        "# summary: b={}, eta={}, kappa={}, kernel_modes={kernel_rows}",
        fmt_f(b),
        fmt_f(eta),
        fmt_f(kappa)
    );
    out
}

/// Serializes the solvability trace as `t,v` rows.
pub fn range_trace_to_string(trace: &RangeTrace) -> String {
    let mut out = String::from("t,v\n");
    for (t, v) in &trace.samples {
        let _ = writeln!(out, "{},{}", fmt_f(*t), fmt_f(*v));
    }
    out
}

/// Serializes a field on a uniform grid as `t,x,w1` rows.
pub fn field_grid_to_string(field: &SpectralField, nt: usize, nx: usize) -> String {
    let mut out = String::from("t,x,w1\n");
    let pi = std::f64::consts::PI;
    for i in 0..nt {
        let t = 2.0 * pi * i as f64 / nt as f64;
        for m in 0..nx {
            let x = pi * (m + 1) as f64 / (nx + 1) as f64;
            let _ = writeln!(out, "{},{},{}", fmt_f(t), fmt_f(x), fmt_f(field.eval(t, x)));
        }
    }
    out
}

/// Serializes a kernel profile as `k,re_p,im_p` rows.
pub fn profile_to_string(profile: &KernelProfile) -> String {
    let mut out = String::from("k,re_p,im_p\n");
    for (i, c) in profile.coeffs().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, fmt_f(c.re), fmt_f(c.im));
    }
    out
}

/// Serializes a modulus-of-continuity table as `h,sup_diff` rows.
pub fn modulus_to_string(report: &ContinuityReport) -> String {
    let mut out = String::from("h,sup_diff\n");
    for row in &report.rows {
        let _ = writeln!(out, "{},{}", fmt_f(row.shift), fmt_f(row.sup_diff));
    }
    out
}

/// Writes a string artifact atomically.
pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    atomic_write(path, text.as_bytes())
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}
