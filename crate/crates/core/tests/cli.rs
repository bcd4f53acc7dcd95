//! End-to-end runs of the `orlicz-max` binary: exit codes, report files,
//! config validation and reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orlicz-max"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run_config(command: &str, cfg: &Path, out: &Path, extra: &[&str], env: &[(&str, &str)]) -> Output {
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args, env)
}

fn body(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(json["timing"]["wall_seconds"].is_number());
    json["body"].take()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, text).unwrap();
    path
}

const SMALL: &str = r#"
seed = 3
[phi]
family = "power_law"
p = 2.0
[grid]
lo = [-2.0]
hi = [2.0]
h = 0.0625
[fields.bump]
kind = "smooth_bump"
center = [0.0]
radius = 1.0
"#;

#[test]
fn verify_default_corpus_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("verify", &config("verify_power_law.toml"), dir.path(), &[], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,value,tolerance,passed,iters"));
    // Names may contain commas, so read the passed column from the right.
    assert!(lines.all(|l| l.rsplit(',').nth(1) == Some("true")), "{csv}");
    let b = body(dir.path());
    assert_eq!(b["passed"], true);
    assert_eq!(b["command"], "verify");
    assert_eq!(b["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_is_reproducible_for_a_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = config("verify_power_law.toml");
    assert_eq!(run_config("verify", &cfg, a.path(), &["--seed", "11"], &[]).status.code(), Some(0));
    assert_eq!(run_config("verify", &cfg, b.path(), &["--seed", "11", "--threads", "2"], &[]).status.code(), Some(0));
    run_config("verify", &cfg, c.path(), &["--seed", "12"], &[]);
    let (ba, bb, bc) = (body(a.path()), body(b.path()), body(c.path()));
    assert_eq!(serde_json::to_string(&ba).unwrap(), serde_json::to_string(&bb).unwrap());
    assert_ne!(ba["config_hash"], bc["config_hash"]);
    assert_eq!(
        std::fs::read(a.path().join("report.csv")).unwrap(),
        std::fs::read(b.path().join("report.csv")).unwrap()
    );
}

#[test]
fn maximal_and_norm_commands_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("max");
    assert_eq!(run_config("maximal", &cfg, &out, &[], &[]).status.code(), Some(0));
    let field = orlicz_max::grid::read_field(out.join("maximal_bump.field")).unwrap();
    assert_eq!(field.len(), 65);
    assert!(std::fs::read_to_string(out.join("maximal_bump.csv")).unwrap().starts_with("x,Mf,radii\n"));

    let out = dir.path().join("norm");
    assert_eq!(run_config("norm", &cfg, &out, &[], &[]).status.code(), Some(0));
    let b = body(&out);
    let n = b["norms"][0]["report"]["norm"].as_f64().unwrap();
    assert!(n > 0.0 && n < 1.0);
}

#[test]
fn invalid_config_lists_every_problem_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("h = 0.0625", "h = 0").replace("family = \"power_law\"", "family = \"double_phase\"");
    let cfg = write_config(dir.path(), &text);
    let out = run_config("norm", &cfg, dir.path(), &[], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("grid.h"), "{err}");
    assert!(err.contains("phi.q"), "{err}");
    assert!(err.contains("phi.a.kind"), "{err}");
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn environment_override_is_validated_too() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = run_config("norm", &cfg, dir.path(), &[], &[("OMAX__GRID__H", "-1")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.h"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate", "--config", "x.toml"], &[]).status.code(), Some(2));
    assert_eq!(run(&["norm"], &[]).status.code(), Some(2));
    assert_eq!(run(&["norm", "--config", "/nonexistent/cfg.toml"], &[]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("variable_exponent.toml");
    let out = run_config("conditions", &cfg, dir.path(), &[], &[("OMAX__CONDITIONS__CAP", "0.01")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(body(dir.path())["passed"], false);
}

#[test]
fn numerical_failure_exits_3() {
    // t^1 has an unbounded conjugate, so the Hölder check cannot finish.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("p = 2.0", "p = 1.0"));
    let out = run_config("verify", &cfg, dir.path(), &[], &[]);
    assert_eq!(out.status.code(), Some(3));
    let b = body(dir.path());
    assert!(b["errors"].as_array().unwrap().iter().any(|e| e["numerical"] == true));
}
