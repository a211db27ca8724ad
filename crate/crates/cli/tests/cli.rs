use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mobgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mobgraph"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("MOBGRAPH_OUT")
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "replicas = 3\nlambda = 1.0\n[domain]\nvolume = 64.0\n";

#[test]
fn help_lists_exit_codes_and_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_mobgraph")).arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Exit codes"));
    assert!(text.contains("seed = 1"));
    for sub in ["sample", "evolve", "broadcast-scaling", "perc-tail", "diagnose", "convergence"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn sample_writes_stamped_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), SMALL);
    let out = mobgraph(tmp.path(), &["sample", "--config", &cfg, "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    let csv = fs::read_to_string(dir.join("samples.csv")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with("# config_sha256="), "{first}");
    assert!(first.ends_with("seed=5"), "{first}");
    assert_eq!(csv.lines().count(), 2 + 3);
    let echoed = fs::read_to_string(dir.join("config.toml")).unwrap();
    assert!(echoed.contains("seed = 5"));
    for r in 0..3 {
        assert!(dir.join(format!("samples/replica_{r:05}.jsonl")).exists());
    }
}

#[test]
fn reruns_are_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), SMALL);
    let read = |name: &str| {
        let out = mobgraph(tmp.path(), &["evolve", "--config", &cfg, "--workers", "2"]);
        assert!(out.status.success());
        let dir = tmp.path().join("out");
        let text = fs::read(dir.join("components.csv")).unwrap();
        fs::rename(&dir, tmp.path().join(name)).unwrap();
        text
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn bad_configs_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    for body in ["lambda = -1.0\n", "no_such_key = 3\n", "lambda = \"four\"\n", "dt_obs = 0.0\n"] {
        let cfg = config(tmp.path(), body);
        let out = mobgraph(tmp.path(), &["sample", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{body}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn wrong_domain_kind_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), SMALL);
    let out = mobgraph(tmp.path(), &["perc-tail", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_runs_exit_with_three() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "max_vertices = 10\n");
    let out = mobgraph(tmp.path(), &["sample", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_vertices"));
}

#[test]
fn zero_workers_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let out = mobgraph(tmp.path(), &["sample", "--workers", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
