use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn stableopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stableopt"))
        .args(args)
        .env("STABLEOPT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn small_config(dir: &Path) -> PathBuf {
    let text = fs::read_to_string(config_path("running1d.toml"))
        .unwrap()
        .replace("repetitions = 50", "repetitions = 3")
        .replace(
            "algorithms = [\"stableopt\"]",
            "algorithms = [\"stableopt\", \"gp-ucb\"]",
        );
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn selfcheck_passes() {
    let out = stableopt(&["selfcheck"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = stableopt(&["run", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["results.csv", "summary.csv", "config.toml", "regret.svg"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let results = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 3 * 15);
}

#[test]
fn trace_reaches_optimum_on_running_example() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("trace");
    let out = stableopt(&[
        "trace",
        config_path("running1d.toml").to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--expect-optimum",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("round_015.csv").exists());
}

#[test]
fn oracle_dumps_robust_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let out = stableopt(&[
        "oracle",
        config_path("running1d.toml").to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next(), Some("index,x0,value,robust_value"));
    assert_eq!(text.lines().count(), 52);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "objective = \"poly\"\nrounds = 0\n").unwrap();
    assert!(!stableopt(&["run", bad.to_str().unwrap()]).status.success());
    assert!(!stableopt(&["run", "/nonexistent/config.toml"]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_stableopt"))
        .args(["selfcheck"])
        .env("STABLEOPT_THREADS", "many")
        .output()
        .unwrap();
    assert!(!out.status.success());
}
