use std::process::{Command, Output};

fn qwn(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qwn"));
    cmd.args(args).env_remove("QWN_SEED");
    if let Some(s) = seed_env {
        cmd.env("QWN_SEED", s);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn nogo_example_from_the_command_line() {
    let out = qwn(&["verify", "nogo", "--gamma0", "1", "--l", "0.5", "--output", "-"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let min = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "nogo.min_value").unwrap();
    assert_eq!(min["measured"], -1.0);
    assert_eq!(min["status"], "pass");
}

#[test]
fn bosonic_example_reports_kappa() {
    let out = qwn(&["verify", "bosonic", "--gamma0", "1", "--dim", "2", "--truncation", "3", "--seed", "7"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    for c in r["checks"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let expect = if name.starts_with("bosonic.kappa") { "reported" } else { "pass" };
        assert_eq!(c["status"], expect, "{name}");
        assert!(!c["paper_location"].as_str().unwrap().is_empty());
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qwn(&["verify"], None).status.code(), Some(2));
    assert_eq!(qwn(&["verify", "everything"], None).status.code(), Some(2));
    assert_eq!(qwn(&["verify", "nogo", "--tol", "0"], None).status.code(), Some(2));
    assert_eq!(qwn(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(qwn(&["verify", "diagonal", "--algebra", "matrices"], None).status.code(), Some(2));
}

#[test]
fn failing_check_exits_with_one() {
    // no residual carrying rounding error survives a tolerance of 1e-300
    let out = qwn(&["verify", "free", "--tol", "1e-300", "--trials", "2"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["summary"]["fail"].as_u64().unwrap() > 0);
}

#[test]
fn config_file_with_flag_override_and_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"suite": "free", "gamma": 2.0, "trials": 2, "seed": 5}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let r = json(&qwn(&["verify", "--config", cfg, "--gamma", "0.5"], None));
    assert_eq!(r["config"]["gamma"], 0.5);
    assert_eq!(r["config"]["seed"], 5);

    // flag > config > QWN_SEED
    let r = json(&qwn(&["verify", "--config", cfg, "--seed", "9"], Some("11")));
    assert_eq!(r["config"]["seed"], 9);
    let r = json(&qwn(&["verify", "nogo"], Some("11")));
    assert_eq!(r["config"]["seed"], 11);

    std::fs::write(dir.path().join("bad.json"), r#"{"sweet": 1}"#).unwrap();
    let bad = dir.path().join("bad.json");
    assert_eq!(qwn(&["verify", "nogo", "--config", bad.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let to_file = qwn(&["verify", "qdeform", "--trials", "2", "--output", path.to_str().unwrap()], None);
    assert!(to_file.stdout.is_empty());
    let to_stdout = qwn(&["verify", "qdeform", "--trials", "2", "--output", "-"], None);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn timing_only_on_request() {
    let plain = qwn(&["verify", "nogo"], None);
    assert!(!String::from_utf8_lossy(&plain.stdout).contains("wall_clock"));
    let timed = json(&qwn(&["verify", "nogo", "--include-timing"], None));
    assert!(timed["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

fn rewrite_tau(kappa: &str) -> f64 {
    let out = qwn(
        &[
            "rewrite",
            "--word",
            r#"[{"kind":"b","symbol":"phi"},{"kind":"n","symbol":"one"},{"kind":"b*","symbol":"phi"}]"#,
            "--symbols",
            r#"{"phi": [1.0, 0.0]}"#,
            "--kappa",
            kappa,
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let tau = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "rewrite.vacuum_moment").unwrap().clone();
    tau["measured"].as_f64().unwrap()
}

#[test]
fn rewrite_subcommand() {
    // n b* = b* n + kappa b*, so tau(b n b*) is linear in kappa
    let (one, two) = (rewrite_tau("1"), rewrite_tau("2"));
    assert!(one > 0.0);
    assert!((two - 2.0 * one).abs() < 1e-12 * one);
    assert_eq!(qwn(&["rewrite", "--word", "not json"], None).status.code(), Some(2));
}

#[test]
fn combinatorics_selftest_passes() {
    let out = qwn(&["combinatorics", "selftest"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["summary"]["fail"], 0);
}
