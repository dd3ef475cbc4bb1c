//! End-to-end tests of the `kgp` binary: exit codes, file formats,
//! determinism, and warm restarts through the coefficient format.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("stale workdir removed");
    }
    fs::create_dir_all(&dir).expect("workdir created");
    dir
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).expect("config written");
    path
}

fn kgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgp"))
        .args(args)
        .env_remove("KGP_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn read_json(path: &Path) -> serde_json::Value {
    let raw = fs::read_to_string(path).expect("report exists");
    serde_json::from_str(&raw).expect("report parses")
}

const MANUFACTURED_SOLVE: &str = r#"{
  "b": 1.0,
  "eps": 0.05,
  "truncation": {"j_max": 6, "k_max": 6},
  "f": {"kind": "power_law", "p": 3.0, "amplitude": "const:1.0"},
  "g": {"kind": "power_law", "p": 3.0, "amplitude": "const:1.0"},
  "forcing": {"kind": "manufactured", "target": {
    "u": [{"j": 2, "k": 1, "re": 0.3}],
    "v": [{"j": 1, "k": 0, "re": 0.2}]
  }}
}"#;

#[test]
fn solve_writes_solution_and_report() {
    let dir = workdir("solve_basic");
    let cfg = write(&dir, "cfg.json", MANUFACTURED_SOLVE);
    let out_dir = dir.join("out");
    let out = kgp(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["converged"], serde_json::Value::Bool(true));
    let err = report["recovered_error"].as_f64().expect("recovered error present");
    assert!(err < 1e-9, "recovered error {err}");

    let coeffs = fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    let mut lines = coeffs.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# kg-periodic coeffs v1, J=6, K=6,"));
    assert_eq!(lines.next().unwrap(), "j,k,re_u,im_u,re_v,im_v");
    assert_eq!(lines.count(), 6 * 7);
}

#[test]
fn solution_file_warm_restart_converges_immediately() {
    let dir = workdir("solve_roundtrip");
    let cfg = write(&dir, "cfg.json", MANUFACTURED_SOLVE);
    let first = dir.join("first");
    let out = kgp(&["solve", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    let solution = first.join("solution.csv");
    let warm_cfg = MANUFACTURED_SOLVE.replace(
        "\"forcing\"",
        &format!(
            "\"solver\": {{\"initial_guess\": {{\"kind\": \"from_file\", \"path\": {}}}}},\n  \"forcing\"",
            serde_json::to_string(solution.to_str().unwrap()).unwrap()
        ),
    );
    let warm = write(&dir, "warm.json", &warm_cfg);
    let second = dir.join("second");
    let out = kgp(&["solve", "--config", warm.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let report = read_json(&second.join("report.json"));
    let iterations = report["iterations"].as_u64().unwrap();
    assert!(iterations <= 2, "warm restart took {iterations} iterations");
}

#[test]
fn identical_runs_produce_byte_identical_outputs() {
    let dir = workdir("determinism");
    let cfg = write(&dir, "cfg.json", MANUFACTURED_SOLVE);
    let a = dir.join("a");
    let b = dir.join("b");
    for out_dir in [&a, &b] {
        let out = kgp(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "42",
        ]);
        assert_eq!(code(&out), 0);
    }
    for name in ["solution.csv", "report.json"] {
        let left = fs::read(a.join(name)).unwrap();
        let right = fs::read(b.join(name)).unwrap();
        assert_eq!(left, right, "{name} differs between identical runs");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = workdir("config_errors");

    let collision = write(&dir, "collision.json", r#"{"b": 3.0, "truncation": {"j_max": 3, "k_max": 3}}"#);
    let out = kgp(&["spectrum", "--config", collision.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("eigenvalue"));

    let unknown = write(
        &dir,
        "unknown.json",
        r#"{"b": 1.0, "truncation": {"j_max": 3, "k_max": 3}, "typo_field": 1}"#,
    );
    let out = kgp(&["spectrum", "--config", unknown.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo_field"));

    let malformed = write(&dir, "malformed.json", "{this is not json");
    let out = kgp(&["check", "--config", malformed.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let out = kgp(&["solve", "--config", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let bad_p = write(
        &dir,
        "bad_p.json",
        r#"{"b": 1.0, "truncation": {"j_max": 3, "k_max": 3},
            "f": {"kind": "power_law", "p": 0.5, "amplitude": "const:1.0"}}"#,
    );
    let out = kgp(&["check", "--config", bad_p.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("f:"));
}

#[test]
fn starved_newton_budget_exits_one() {
    let dir = workdir("newton_budget");
    let cfg_text = MANUFACTURED_SOLVE.replace(
        "\"forcing\"",
        "\"solver\": {\"max_newton\": 1},\n  \"forcing\"",
    );
    let cfg = write(&dir, "cfg.json", &cfg_text);
    let out_dir = dir.join("out");
    let out = kgp(&["solve", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["converged"], serde_json::Value::Bool(false));
}

#[test]
fn trivial_zero_problem_solves_at_rest() {
    let dir = workdir("zero_problem");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{
            "b": 1.0,
            "eps": 0.05,
            "truncation": {"j_max": 4, "k_max": 4},
            "f": {"kind": "power_law", "p": 3.0, "amplitude": "const:1.0"},
            "g": {"kind": "power_law", "p": 3.0, "amplitude": "const:1.0"}
        }"#,
    );
    let out_dir = dir.join("out");
    let out = kgp(&["solve", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let coeffs = fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    for line in coeffs.lines().skip(2) {
        for v in line.split(',').skip(2) {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn check_passes_power_law_and_rejects_collision() {
    let dir = workdir("check_cmd");
    let good = write(
        &dir,
        "good.json",
        r#"{
            "b": 1.0,
            "truncation": {"j_max": 4, "k_max": 4},
            "f": {"kind": "power_law", "p": 3.0, "amplitude": "const:1.0"},
            "g": {"kind": "power_law", "p": 3.0, "amplitude": "cos_t:1.0,0.5"}
        }"#,
    );
    let out_dir = dir.join("out");
    let out = kgp(&["check", "--config", good.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = read_json(&out_dir.join("check.json"));
    assert_eq!(report["pass"], serde_json::Value::Bool(true));

    let linear = write(
        &dir,
        "linear.json",
        r#"{
            "b": 1.0,
            "truncation": {"j_max": 4, "k_max": 4},
            "f": {"kind": "linear", "slope": 1.0}
        }"#,
    );
    let out = kgp(&["check", "--config", linear.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let report = read_json(&out_dir.join("check.json"));
    assert_eq!(report["f"]["superquadratic"]["passed"], serde_json::Value::Bool(false));
    assert!(report["f"]["superquadratic"]["witness"].is_object());

    let collision = write(&dir, "collision.json", r#"{"b": 3.0, "truncation": {"j_max": 3, "k_max": 3}}"#);
    let out = kgp(&["check", "--config", collision.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn spectrum_lists_the_kernel_diagonal() {
    let dir = workdir("spectrum_cmd");
    let cfg = write(&dir, "cfg.json", r#"{"b": 1.0, "truncation": {"j_max": 3, "k_max": 3}}"#);
    let out_dir = dir.join("out");
    let out = kgp(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    let table = fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    let mut kernel_rows = Vec::new();
    for line in table.lines().skip(1) {
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4);
        let j: i32 = cols[0].parse().unwrap();
        let k: i32 = cols[1].parse().unwrap();
        let lambda: i64 = cols[2].parse().unwrap();
        assert_eq!(lambda, (j as i64) * (j as i64) - (k as i64) * (k as i64));
        if cols[3] == "kernel" {
            kernel_rows.push((j, k));
        }
    }
    kernel_rows.sort_unstable();
    assert_eq!(
        kernel_rows,
        vec![(1, -1), (1, 1), (2, -2), (2, 2), (3, -3), (3, 3)]
    );
    let summary = table.lines().last().unwrap();
    assert!(summary.contains("eta=1.0000000000000000e0"));
    assert!(summary.contains("kernel_modes=6"));
}

#[test]
fn represent_inverts_the_static_mode() {
    let dir = workdir("represent_static");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{
            "b": 1.0,
            "truncation": {"j_max": 2, "k_max": 1},
            "represent": {"input": {"kind": "modes", "entries": [{"j": 2, "k": 0, "re": 1.0}]}}
        }"#,
    );
    let out_dir = dir.join("out");
    let out = kgp(&["represent", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let grid = fs::read_to_string(out_dir.join("w1.csv")).unwrap();
    for line in grid.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let expected = (2.0 * cols[1]).sin() / 4.0;
        assert!(
            (cols[2] - expected).abs() < 1e-8,
            "w1({}, {}) = {}, expected {expected}",
            cols[0],
            cols[1],
            cols[2]
        );
    }
}

#[test]
fn represent_rejects_kernel_input_with_sup_pi() {
    let dir = workdir("represent_kernel");
    let cfg = write(
        &dir,
        "cfg.json",
        r#"{
            "b": 1.0,
            "truncation": {"j_max": 1, "k_max": 1},
            "represent": {"input": {"kind": "modes", "entries": [{"j": 1, "k": 1, "re": 0.5}]}}
        }"#,
    );
    let out_dir = dir.join("out");
    let out = kgp(&["represent", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    let report = read_json(&out_dir.join("represent.json"));
    assert_eq!(report["in_range"], serde_json::Value::Bool(false));
    let sup = report["sup_violation"].as_f64().unwrap();
    assert!((sup - std::f64::consts::PI).abs() < 1e-8, "sup {sup}");
    assert!(!out_dir.join("w1.csv").exists());
    assert!(out_dir.join("range_condition.csv").exists());
}

#[test]
fn sweep_single_zero_entry_and_warning_flag() {
    let dir = workdir("sweep_cmd");
    let single = write(
        &dir,
        "single.json",
        r#"{
            "b": 1.0,
            "eps_list": [0.0],
            "truncation": {"j_max": 4, "k_max": 4},
            "forcing": {"kind": "manufactured", "decoupled": true, "target": {
                "u": [{"j": 2, "k": 1, "re": 0.3}],
                "v": [{"j": 1, "k": 0, "re": 0.2}]
            }}
        }"#,
    );
    let out_dir = dir.join("single");
    let out = kgp(&["sweep", "--config", single.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let table = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cols: Vec<f64> = rows[0].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols[1], 0.0);
    assert_eq!(cols[2], 0.0);

    let warned = write(
        &dir,
        "warned.json",
        r#"{
            "b": 1.0,
            "eps_list": [0.5, 0.0],
            "truncation": {"j_max": 4, "k_max": 4},
            "forcing": {"kind": "manufactured", "decoupled": true, "target": {
                "u": [{"j": 2, "k": 1, "re": 0.3}],
                "v": [{"j": 1, "k": 0, "re": 0.2}]
            }}
        }"#,
    );
    let out_dir = dir.join("warned");
    let out = kgp(&["sweep", "--config", warned.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["stages"][0]["eps_warning"], serde_json::Value::Bool(true));
    assert_eq!(report["stages"][1]["eps_warning"], serde_json::Value::Bool(false));
}

#[test]
fn thread_cap_env_is_recorded_and_validated() {
    let dir = workdir("threads_env");
    let cfg = write(&dir, "cfg.json", r#"{"b": 1.0, "truncation": {"j_max": 2, "k_max": 2}}"#);
    let out_dir = dir.join("out");

    let out = Command::new(env!("CARGO_BIN_EXE_kgp"))
        .args(["spectrum", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .env("KGP_THREADS", "3")
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 0);

    let out = Command::new(env!("CARGO_BIN_EXE_kgp"))
        .args(["spectrum", "--config", cfg.to_str().unwrap()])
        .env("KGP_THREADS", "many")
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 2);
}
