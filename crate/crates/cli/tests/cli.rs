//! End-to-end checks of the `cplab` binary: exit codes, output atomicity,
//! byte-level determinism, the bundled golden fixture, and flag handling.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cplab")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cplab-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env("CPLAB_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let path = dir.join("config.cfg");
    fs::write(&path, body).unwrap();
    path
}

const SMALL_CONFIG: &str = "\
[domain]
k = 2
l = 2

[weight]
kind = power
a = 0.5

[inequality]
kind = asm
p = 1.5
r = 2.0

[search]
budget = 20
seed = 3
";

#[test]
fn unknown_verb_and_flags_exit_2() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out2 = run(&["verify", "--bogus", "x"]);
    assert_eq!(out2.status.code(), Some(2));
    let out3 = run(&["verify"]);
    assert_eq!(out3.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2_with_no_outputs() {
    let dir = tmp_dir("malformed");
    let cfg = write_config(&dir, "[domain]\nk = not-a-number\nl = 2\n");
    let out_dir = dir.join("out");
    let out = run(&[
        "check-weight",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    // machine-readable error record on stderr
    let stderr = String::from_utf8(out.stderr).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(parsed["exit"], 2);
    // atomicity: nothing was written
    assert!(!out_dir.exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tmp_dir("unknown-key");
    let cfg = write_config(&dir, "[domain]\nk = 2\nl = 2\nz = 3\n");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_log_level_is_rejected() {
    let dir = tmp_dir("log");
    let cfg = write_config(&dir, SMALL_CONFIG);
    let out = Command::new(bin())
        .args([
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .env("CPLAB_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_jobs() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, SMALL_CONFIG);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let out_c = dir.join("c");
    for (out_dir, jobs) in [(&out_a, "1"), (&out_b, "1"), (&out_c, "3")] {
        let out = run(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for rel in ["report.json", "tables/ratios.csv", "artifacts/weight.gridfn"] {
        let a = fs::read(out_a.join(rel)).unwrap();
        let b = fs::read(out_b.join(rel)).unwrap();
        let c = fs::read(out_c.join(rel)).unwrap();
        assert_eq!(a, b, "{rel} differs across runs");
        assert_eq!(a, c, "{rel} differs across --jobs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tmp_dir("seed");
    let cfg = write_config(&dir, SMALL_CONFIG);
    let out_dir = dir.join("out");
    let out = run(&[
        "hunt",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(out.status.success());
    let report = fs::read_to_string(out_dir.join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["state"]["seed"], 99);
}

#[test]
fn golden_fixture_matches() {
    let dir = tmp_dir("golden");
    fs::create_dir_all(&dir).unwrap();
    let cfg = fixtures().join("verify_asm.cfg");
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/verify_asm");
    let out = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
        "--golden",
        golden.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "golden comparison failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    // a perturbed golden must be detected
    let broken = dir.join("broken-golden");
    fs::create_dir_all(broken.join("tables")).unwrap();
    fs::copy(golden.join("report.json"), broken.join("report.json")).unwrap();
    let mut csv = fs::read_to_string(golden.join("tables/ratios.csv")).unwrap();
    csv.push_str("tampered\n");
    fs::write(broken.join("tables/ratios.csv"), csv).unwrap();
    let out2 = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out2").to_str().unwrap(),
        "--golden",
        broken.to_str().unwrap(),
    ]);
    assert_eq!(out2.status.code(), Some(1));
}

#[test]
fn report_verb_summarizes_and_requires_outputs() {
    let dir = tmp_dir("report");
    let cfg = write_config(&dir, SMALL_CONFIG);
    let out_dir = dir.join("out");
    assert!(run(&[
        "sparse-dominate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ])
    .status
    .success());
    let out = run(&["report", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("command: sparse-dominate"));
    assert!(stdout.contains("eta"));
    // missing report.json
    let out2 = run(&["report", "--out", dir.join("nowhere").to_str().unwrap()]);
    assert_eq!(out2.status.code(), Some(2));
}

#[test]
fn flat_weight_conditions_are_unital() {
    let dir = tmp_dir("flat");
    let cfg = write_config(
        &dir,
        "[domain]\nk = 2\nl = 2\n\n[weight]\nkind = power\na = 0.0\n\n[search]\nbudget = 20\n",
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "check-weight",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    for key in ["reverse_holder", "cp", "scp_lower"] {
        let c = v[key]["constant"].as_f64().unwrap();
        assert!((c - 1.0).abs() <= 1e-9, "{key} = {c}");
    }
}

#[test]
fn sweep_emits_required_csv_columns() {
    let dir = tmp_dir("sweep");
    let cfg = write_config(&dir, SMALL_CONFIG);
    let out_dir = dir.join("out");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(out_dir.join("tables/sweep.csv")).unwrap();
    assert!(csv.starts_with("experiment,K,L,p,r,constant,extremizer-id\n"));
    assert_eq!(csv.lines().count(), 7); // header + 2 K x 3 L
}
