//! Command-level behavior: exit codes, fault injection, config handling
//! and output shape.

use std::process::{Command, Output};

fn bcrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcrt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 output")
}

#[test]
fn selftest_passes_and_is_reproducible() {
    let a = bcrt(&["selftest", "--seed", "7"]);
    assert!(a.status.success(), "selftest failed:\n{}", stdout(&a));
    let b = bcrt(&["selftest", "--seed", "7"]);
    assert_eq!(
        a.stdout, b.stdout,
        "same seed must give byte-identical output"
    );
    assert!(stdout(&a).lines().filter(|l| l.ends_with(",pass")).count() >= 9);
}

#[test]
fn selftest_catches_injected_fault() {
    let out = bcrt(&["selftest", "--seed", "7", "--inject-w1-fault", "1e-3"]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "perturbed W1 must fail the gate"
    );
    assert!(stdout(&out).contains("oracle_equivalence"));
    assert!(stdout(&out).lines().any(|l| l.ends_with(",fail")));
}

#[test]
fn analysis_reports_the_exact_limit() {
    let out = bcrt(&["analysis"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("f_at_zero,0.1484375,pass"), "{text}");
    assert!(text.lines().last().unwrap().starts_with("# seed="));
}

#[test]
fn config_errors_exit_with_two() {
    // delta above the bin: rejected before any work happens
    let out = bcrt(&[
        "curvature",
        "--delta",
        "0.5",
        "--ell-lo",
        "0.45",
        "--ell-hi",
        "0.55",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = bcrt(&["volume", "--eps", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bcrt(&["volume", "--grid-n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = std::env::temp_dir().join(format!("bcrt-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("config.json");
    std::fs::write(
        &config_path,
        r#"{"seed": 99, "grid_n": 512, "replicas": 20, "eps": [0.2]}"#,
    )
    .unwrap();
    let from_file = bcrt(&["volume", "--config", config_path.to_str().unwrap()]);
    let text = stdout(&from_file);
    assert!(text.contains("# seed=99 grid_n=512 replicas=20"), "{text}");

    // a flag beats the file
    let overridden = bcrt(&[
        "volume",
        "--config",
        config_path.to_str().unwrap(),
        "--seed",
        "123",
    ]);
    assert!(stdout(&overridden).contains("# seed=123 grid_n=512 replicas=20"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_mirror_carries_rows_and_meta() {
    let out = bcrt(&[
        "volume",
        "--grid-n",
        "512",
        "--replicas",
        "10",
        "--eps",
        "0.3",
        "--seed",
        "5",
        "--format",
        "json",
    ]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(value["meta"]["seed"], 5);
    assert_eq!(value["rows"].as_array().unwrap().len(), 1);
    assert!(value["rows"][0]["mc_mean"].is_f64());
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("bcrt-out-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.csv");
    let out = bcrt(&["analysis", "--eps", "0.1", "--out", path.to_str().unwrap()]);
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file, stdout(&out));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn transport_bench_reports_deterministic_columns() {
    let out = bcrt(&[
        "transport-bench",
        "--grid-n",
        "1024",
        "--replicas",
        "50",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("n,queries,mean_cost,cost_checksum"));
    let out2 = bcrt(&[
        "transport-bench",
        "--grid-n",
        "1024",
        "--replicas",
        "50",
        "--seed",
        "3",
    ]);
    assert_eq!(
        out.stdout, out2.stdout,
        "stdout is timing-free and deterministic"
    );
}
