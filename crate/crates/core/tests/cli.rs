use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn lhs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lhs")).args(args).output().expect("spawn lhs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Write `body` plus an `output_dir` inside `dir` and return the config path.
fn config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let out = dir.path().join("out");
    let path = dir.path().join(name);
    fs::write(&path, format!("{body}output_dir = {:?}\n", out.display().to_string())).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

const IDENTICAL: &str = "d = 2\nN = 50\nkappa0 = 1.0\nt_final = 10.0\nseed = 1\n";

#[test]
fn version_prints_the_package_version() {
    let out = lhs(&["version"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), format!("lhs {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn simulate_writes_one_row_per_step_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "run.toml", IDENTICAL);
    let out = lhs(&["simulate", "--config", arg(&cfg), "--strict"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = dir.path().join("out").join("run_1_1.csv");
    let first = fs::read(&csv).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,J_M,theta_M,diameter,norm_drift,cross_ratio_drift"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 501);
    let j_m_final: f64 = rows[500].split(',').nth(1).unwrap().parse().unwrap();
    assert!(j_m_final < 1e-3, "J_M(10) = {j_m_final}");
    let summary = fs::read_to_string(dir.path().join("out").join("summary.txt")).unwrap();
    assert!(summary.starts_with("config.d=2\nconfig.N=50\nconfig.dt=0.02\n"));
    assert!(summary.contains("verdict=pass"));

    let again = lhs(&["simulate", "--config", arg(&cfg)]);
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read(&csv).unwrap(), first);
}

#[test]
fn strict_mode_turns_a_violated_envelope_into_exit_one() {
    let dir = TempDir::new().unwrap();
    // a coarse step loses enough accuracy to break the exponential envelope
    let body = "d = 2\nN = 20\nkappa0 = 1.0\nt_final = 10.0\ndt = 0.1\nseed = 3\n";
    let cfg = config(&dir, "coarse.toml", body);
    let lenient = lhs(&["simulate", "--config", arg(&cfg)]);
    assert_eq!(code(&lenient), 0);
    assert!(stdout(&lenient).contains("envelope=fail"));
    let strict = lhs(&["simulate", "--config", arg(&cfg), "--strict"]);
    assert_eq!(code(&strict), 1);
    assert!(stderr(&strict).contains("envelope violated"));
}

#[test]
fn runaway_drift_is_a_runtime_failure() {
    let dir = TempDir::new().unwrap();
    let body = "d = 2\nN = 20\nkappa0 = 5.0\nt_final = 10.0\ndt = 0.1\nseed = 3\n";
    let out = lhs(&["simulate", "--config", arg(&config(&dir, "drift.toml", body))]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("abort threshold"));
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let typo = config(&dir, "typo.toml", "d = 2\nN = 50\nkapa0 = 1.0\nt_final = 10.0\nseed = 1\n");
    let out = lhs(&["simulate", "--config", arg(&typo)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("kapa0"));

    let missing = dir.path().join("absent.toml");
    assert_eq!(code(&lhs(&["check", "--config", arg(&missing)])), 2);

    let sweep = config(&dir, "sweep.toml", "d = 2\nN = 10\nkappa0_values = [1.0, 5.0]\nt_final = 1.0\nseed = 1\n");
    assert_eq!(code(&lhs(&["simulate", "--config", arg(&sweep)])), 2);
    let run = config(&dir, "run.toml", IDENTICAL);
    assert_eq!(code(&lhs(&["sweep", "--config", arg(&run)])), 2);

    let negative = config(&dir, "neg.toml", "d = 2\nN = 10\nkappa0 = -1.0\nt_final = 1.0\nseed = 1\n");
    assert_eq!(code(&lhs(&["check", "--config", arg(&negative)])), 2);
}

#[test]
fn check_reports_thresholds_without_integrating() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "run.toml", IDENTICAL);
    let out = lhs(&["check", "--config", arg(&cfg)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("init_threshold="));
    assert!(text.contains("kappa0=1 complex_complete.hypothesis_satisfied=true"), "{text}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn sweep_writes_a_summary() {
    let dir = TempDir::new().unwrap();
    let body = "d = 2\nN = 10\nkappa0_values = [1.0, 5.0]\nreplicates = 2\nt_final = 2.0\nseed = 4\nomega_mode = \"heterogeneous\"\n";
    let out = lhs(&["sweep", "--config", arg(&config(&dir, "sweep.toml", body))]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("decreasing: "));
    assert!(dir.path().join("out").join("summary.txt").exists());
}

#[test]
fn verify_meanfield_suite_passes() {
    let out = lhs(&["verify", "--suite", "meanfield"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).starts_with("PASS meanfield."));
}
