use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_jcdyn");

/// A short sweep on a coarse grid.
const SMALL: &str = r#"{
  "sweep": {"t_min": 20, "t_max": 40, "steps": 5},
  "numerics": {"n_max": 4, "omega_grid": {"points": 201}}
}"#;

fn jcdyn(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).env_remove("JCDYN_OUT").args(args).output().unwrap()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), config).unwrap();
    dir
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn minimal_sweep_writes_spectra() {
    let dir = setup(r#"{"sweep": {"steps": 2}, "numerics": {"n_max": 4, "omega_grid": {"points": 101}}}"#);
    let out = jcdyn(dir.path(), &["--config", "c.json", "--out", "o", "spectra"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("o");
    for name in [
        "spectrum_T10.0000.csv",
        "spectrum_T50.0000.csv",
        "spectra_long.csv",
        "spectra_summary.csv",
        "resolved_config.json",
        "failures.csv",
    ] {
        assert!(o.join(name).exists(), "{name}");
    }
    let text = fs::read_to_string(o.join("spectrum_T10.0000.csv")).unwrap();
    assert!(text.starts_with("# config_sha256="));
    assert_eq!(csv_rows(&o.join("spectrum_T10.0000.csv")).len(), 101);
    assert_eq!(csv_rows(&o.join("spectra_long.csv")).len(), 202);
    assert!(csv_rows(&o.join("failures.csv")).is_empty());
}

#[test]
fn invalid_cutoff_exits_two_naming_field() {
    let dir = setup(r#"{"numerics": {"n_max": 0}}"#);
    let out = jcdyn(dir.path(), &["--config", "c.json", "spectra"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerics.n_max"));
}

#[test]
fn config_and_argument_errors_exit_two() {
    let dir = setup("{}");
    assert_eq!(jcdyn(dir.path(), &["spectra"]).status.code(), Some(2));
    assert_eq!(jcdyn(dir.path(), &["--config", "missing.json", "spectra"]).status.code(), Some(2));
    assert_eq!(jcdyn(dir.path(), &["--config", "c.json", "blocks", "--n", "0"]).status.code(), Some(2));
    assert_eq!(jcdyn(dir.path(), &["--config", "c.json", "--threads", "0", "ep-map"]).status.code(), Some(2));
    fs::write(dir.path().join("bad.json"), r#"{"sweep": {"stepz": 3}}"#).unwrap();
    let out = jcdyn(dir.path(), &["--config", "bad.json", "spectra"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stepz"));
}

#[test]
fn serial_and_parallel_runs_are_identical() {
    let dir = setup(SMALL);
    let commands: [&[&str]; 5] = [
        &["spectra"],
        &["peaks"],
        &["blocks", "--n", "1,2", "--source", "both"],
        &["ep-map", "--n", "1,2", "--delta-grid", "-0.3:0.3:3"],
        &["coefficients", "--n", "2,3", "--p-grid", "0:2:11"],
    ];
    for (threads, out) in [("1", "serial"), ("4", "parallel")] {
        for cmd in commands {
            let mut args = vec!["--config", "c.json", "--out", out, "--threads", threads];
            args.extend_from_slice(cmd);
            let o = jcdyn(dir.path(), &args);
            assert!(o.status.success(), "{cmd:?}: {}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let serial = dir.path().join("serial");
    let mut names: Vec<_> = fs::read_dir(&serial).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        let a = fs::read(serial.join(&name)).unwrap();
        let b = fs::read(dir.path().join("parallel").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs");
    }
}

#[test]
fn output_dir_from_environment() {
    let dir = setup(r#"{"outputs": {"dir": "from_config"}}"#);
    let out = Command::new(BIN)
        .current_dir(dir.path())
        .env("JCDYN_OUT", "from_env")
        .args(["--config", "c.json", "ep-map", "--toy-gamma", "0.4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from_env/ep_toy.csv").exists());
    let out = jcdyn(dir.path(), &["--config", "c.json", "ep-map", "--toy-gamma", "0.4"]);
    assert!(out.status.success());
    assert!(dir.path().join("from_config/ep_toy.csv").exists());
}

#[test]
fn toy_hook_recovers_analytic_point() {
    let dir = setup("{}");
    let out = jcdyn(dir.path(), &["--config", "c.json", "--out", "o", "ep-map", "--toy-gamma", "0.4"]);
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("o/ep_toy.csv"));
    let x: f64 = rows[0][1].parse().unwrap();
    assert!((x - 0.2).abs() < 1e-6, "{x}");
    assert_eq!(rows[0][4], "ep");
}

#[test]
fn ep_map_resonant_column_decreases() {
    let dir = setup("{}");
    let out = jcdyn(dir.path(), &["--config", "c.json", "--out", "o", "ep-map", "--delta-grid", "0:0:1"]);
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("o/ep_map.csv"));
    assert_eq!(rows.len(), 4);
    let p: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(rows.iter().all(|r| r[6] == "ep"));
    assert!(p.windows(2).all(|w| w[1] < w[0]), "{p:?}");
}

#[test]
fn unpumped_block_rows_are_jaynes_cummings_lines() {
    // zero phonon rate and no losses: transitions at ±g(√n ± √(n−1)) from the cavity
    let dir = setup(
        r#"{"thermal": {"p_tilde": 0, "a_idx": 0, "alpha_v": 0, "e_g0": 1043.27},
            "subspace": {"kappa_over_g": 0, "gamma_x_over_g": 0},
            "sweep": {"steps": 2}}"#,
    );
    let out = jcdyn(dir.path(), &["--config", "c.json", "--out", "o", "blocks", "--n", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/blocks.csv"));
    let g = 0.3_f64;
    let (r2, r1) = (2f64.sqrt() * g, g);
    let mut got: Vec<f64> = rows[..4].iter().map(|r| r[3].parse::<f64>().unwrap() - 1043.27).collect();
    got.sort_by(f64::total_cmp);
    let mut want = [-(r2 + r1), -(r2 - r1), r2 - r1, r2 + r1];
    want.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(want) {
        assert!((a - b).abs() < 1e-9, "{got:?}");
    }
    assert!(rows.iter().all(|r| r[6] == "I" && r[5] == "oracle"));
    assert!(dir.path().join("o/regions.csv").exists());
    let agg = csv_rows(&dir.path().join("o/blocks_resonance.csv"));
    assert_eq!(agg.len(), 2);
    assert_eq!(agg[0][3], "1");
}

#[test]
fn resolved_config_reproduces_hash() {
    let dir = setup(r#"{"system": {"g": 0.31}}"#);
    let out = jcdyn(dir.path(), &["--config", "c.json", "--out", "a", "ep-map", "--toy-gamma", "1"]);
    assert!(out.status.success());
    let out = jcdyn(dir.path(), &["--config", "a/resolved_config.json", "--out", "b", "ep-map", "--toy-gamma", "1"]);
    assert!(out.status.success());
    let a = fs::read(dir.path().join("a/ep_toy.csv")).unwrap();
    let b = fs::read(dir.path().join("b/ep_toy.csv")).unwrap();
    assert_eq!(a, b);
}
