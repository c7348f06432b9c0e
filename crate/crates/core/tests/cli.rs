//! End-to-end runs of the `qomc` binary: exit codes, seed precedence, output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qomc(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qomc"));
    cmd.args(args).env_remove("QOMC_SEED");
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("binary runs");
    (
        status.code().expect("exit code"),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const SUBSTITUTION: &str =
    "n = 3\nepsilon = 0.01\ntrials = 400\nseed = 1\n[attack]\nkind = \"substitute_codeword\"\n";

#[test]
fn simulate_writes_both_formats() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SUBSTITUTION);
    let out = dir.path().join("out");
    let (code, _, _) = run(qomc(&["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out));
    assert_eq!(code, 0);

    let json: Value =
        serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(json["aggregate"]["trials"], 400);
    assert_eq!(json["analytic"]["k"], 7);

    let csv = fs::read_to_string(out.join("rates.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "metric,hits,samples,rate,std_error,analytic");
    assert!(csv.lines().any(|l| l.starts_with("buggy,")));
}

#[test]
fn simulate_prints_to_stdout_without_out_dir() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SUBSTITUTION);
    let (code, stdout, _) = run(qomc(&["simulate", "--config"]).arg(&cfg));
    assert_eq!(code, 0);
    let json: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["config"]["seed"], 1);

    let (code, stdout, _) = run(qomc(&["simulate", "--format", "csv", "--config"]).arg(&cfg));
    assert_eq!(code, 0);
    assert!(stdout.starts_with("metric,"));
}

#[test]
fn seed_flag_overrides_env_which_overrides_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SUBSTITUTION);
    let seed_of = |cmd: &mut Command| {
        let (code, stdout, _) = run(cmd);
        assert_eq!(code, 0);
        serde_json::from_str::<Value>(&stdout).unwrap()["config"]["seed"].clone()
    };
    assert_eq!(seed_of(qomc(&["simulate", "--config"]).arg(&cfg)), 1);
    assert_eq!(
        seed_of(
            qomc(&["simulate", "--config"])
                .arg(&cfg)
                .env("QOMC_SEED", "5")
        ),
        5
    );
    assert_eq!(
        seed_of(
            qomc(&["simulate", "--seed", "9", "--config"])
                .arg(&cfg)
                .env("QOMC_SEED", "5")
        ),
        9
    );
}

#[test]
fn repeated_runs_give_identical_aggregates() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SUBSTITUTION);
    let aggregate = |sub: &str| {
        let out = dir.path().join(sub);
        let (code, _, _) = run(qomc(&["simulate", "--format", "json", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out));
        assert_eq!(code, 0);
        let json: Value =
            serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
        assert!(!out.join("rates.csv").exists());
        serde_json::to_string(&json["aggregate"]).unwrap()
    };
    assert_eq!(aggregate("a"), aggregate("b"));
}

#[test]
fn invalid_config_exits_1_naming_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &SUBSTITUTION.replace("0.01", "0.7"));
    let (code, _, stderr) = run(qomc(&["simulate", "--config"]).arg(&cfg));
    assert_eq!(code, 1);
    assert!(stderr.contains("epsilon"), "{stderr}");

    let cfg = write_config(dir.path(), "syntax.toml", "n = [\n");
    assert_eq!(run(qomc(&["simulate", "--config"]).arg(&cfg)).0, 1);
}

#[test]
fn io_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(run(qomc(&["simulate", "--config"]).arg(&missing)).0, 3);

    let cfg = write_config(dir.path(), "c.toml", SUBSTITUTION);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let (code, _, _) = run(qomc(&["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub")));
    assert_eq!(code, 3);
}

#[test]
fn failed_check_exits_2_only_with_check_flag() {
    // A single trial cannot land within 4σ (σ = 0) of a 0.39 acceptance rate.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "n = 4\nepsilon = 0.01\nk = 1\ntrials = 1\nseed = 0\n[attack]\nkind = \"incremental\"\ndeltas = [0.25, 0.25]\n",
    );
    let (code, _, stderr) = run(qomc(&["simulate", "--check", "--config"]).arg(&cfg));
    assert_eq!(code, 2);
    assert!(stderr.contains("FAIL all_accept_rate"), "{stderr}");
    assert_eq!(run(qomc(&["simulate", "--config"]).arg(&cfg)).0, 0);
}

#[test]
fn bounds_reports_required_k_and_multi_step_acceptance() {
    let (code, stdout, _) = run(&mut qomc(&[
        "bounds",
        "--epsilon",
        "0.01",
        "--deltas",
        "0.25,0.25",
        "--format",
        "json",
    ]));
    assert_eq!(code, 0);
    let json: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["required_k"], 7);
    assert_eq!(json["lemma1_bound"], 0.0078125);
    assert_eq!(json["p_multi"], 0.390625);
    assert_eq!(json["p_single_of_sum"], 0.5);

    assert_eq!(run(&mut qomc(&["bounds", "--epsilon", "0.7"])).0, 1);
    assert_eq!(
        run(&mut qomc(&["bounds", "--epsilon", "0.01", "--delta", "1"])).0,
        1
    );
}

#[test]
fn grid_check_and_oracle_check_pass() {
    let (code, stdout, _) = run(&mut qomc(&[
        "verify-lemma2",
        "--grid",
        "10",
        "--t-max",
        "3",
    ]));
    assert_eq!(code, 0);
    assert!(stdout.trim_end().ends_with("PASS"));

    let (code, stdout, _) = run(&mut qomc(&[
        "oracle-check",
        "--pairs",
        "20",
        "--max-m",
        "16",
        "--format",
        "json",
    ]));
    assert_eq!(code, 0);
    let reports: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);

    assert_eq!(run(&mut qomc(&["oracle-check", "--max-m", "12"])).0, 1);
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(run(&mut qomc(&["frobnicate"])).0, 1);
    assert_eq!(run(&mut qomc(&["simulate"])).0, 1);
    assert_eq!(run(&mut qomc(&["--help"])).0, 0);
}
