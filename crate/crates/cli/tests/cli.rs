//! End-to-end tests of the `ruin` binary: output formats, exit codes, and
//! byte stability.

use std::path::Path;
use std::process::{Command, Output};

fn ruin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruin"))
        .args(args)
        .output()
        .expect("spawn ruin")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn eval_prints_ten_significant_digits() {
    let out = ruin(&[
        "eval", "--rho", "1", "--mu-bar", "1", "--x", "1", "--y", "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.6321205588\n");

    let out = ruin(&[
        "eval", "--rho", "0", "--mu1", "0.5", "--mu2", "0.5", "--x", "1", "--y", "2",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.7650905800\n");
}

#[test]
fn eval_axis_point_is_zero() {
    let out = ruin(&[
        "eval", "--rho", "1", "--mu-bar", "1", "--x", "1", "--y", "0",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0\n");
}

#[test]
fn eval_unsupported_rho_exits_3_without_simulate() {
    let out = ruin(&[
        "eval", "--rho", "0.5", "--mu-bar", "1", "--x", "1", "--y", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let out = ruin(&[
        "eval",
        "--rho",
        "0.5",
        "--mu-bar",
        "1",
        "--x",
        "1",
        "--y",
        "1",
        "--simulate",
        "--paths",
        "500",
        "--dt",
        "0.01",
        "--horizon",
        "5",
    ]);
    assert!(out.status.success(), "simulate fallback failed: {out:?}");
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((0.0..=1.0).contains(&v));
}

#[test]
fn invalid_params_exit_2() {
    // delta at or below the admissible bound
    let out = ruin(&[
        "eval", "--rho", "0", "--mu1", "0.5", "--mu2", "0.5", "--delta", "-0.6", "--x", "1", "--y",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // no way to determine mu_bar
    let out = ruin(&["eval", "--rho", "0", "--x", "1", "--y", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn params_file_with_unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.json");
    std::fs::write(
        &path,
        r#"{"mu_bar":1.0,"sigma1":1.0,"sigma2":1.0,"rho":1.0,"delta":0.0,"extra":1}"#,
    )
    .unwrap();
    let out = ruin(&[
        "eval",
        "--params",
        path.to_str().unwrap(),
        "--x",
        "1",
        "--y",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn params_file_resolves_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.json");
    std::fs::write(
        &path,
        r#"{"mu1":0.5,"mu2":0.5,"mu_bar":1.0,"sigma1":1.0,"sigma2":1.0,"rho":0.0,"delta":0.0}"#,
    )
    .unwrap();
    let out = ruin(&[
        "eval",
        "--params",
        path.to_str().unwrap(),
        "--x",
        "1",
        "--y",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.5939941503\n");

    // flag overrides rho from the file
    let out = ruin(&[
        "eval",
        "--params",
        path.to_str().unwrap(),
        "--rho",
        "1",
        "--x",
        "1",
        "--y",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.6321205588\n");
}

#[test]
fn grid_output_is_byte_stable_with_zero_boundary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = ruin(&[
            "grid",
            "--rho",
            "1",
            "--mu-bar",
            "1",
            "--x-min",
            "0",
            "--x-max",
            "2",
            "--y-min",
            "0",
            "--y-max",
            "2",
            "--nx",
            "3",
            "--ny",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let text_a = std::fs::read(&a).unwrap();
    let text_b = std::fs::read(&b).unwrap();
    assert_eq!(text_a, text_b, "grid output not byte-stable");

    let text = String::from_utf8(text_a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,value");
    assert_eq!(lines.len(), 1 + 9);
    // row-major with y fastest
    assert!(lines[1].starts_with("0,0,"));
    assert!(lines[2].starts_with("0,1,"));
    assert!(lines[4].starts_with("1,0,"));
    // axis rows are exactly zero
    for line in &lines[1..] {
        let mut parts = line.split(',');
        let x: f64 = parts.next().unwrap().parse().unwrap();
        let y: f64 = parts.next().unwrap().parse().unwrap();
        let v = parts.next().unwrap();
        if x == 0.0 || y == 0.0 {
            assert_eq!(v, "0", "axis row {line} not exactly zero");
        }
    }
    assert!(text.contains("1,1,0.6321205588285577"));
}

#[test]
fn grid_unsupported_combination_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.csv");
    let out = ruin(&[
        "grid",
        "--rho",
        "0.25",
        "--mu-bar",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!Path::new(&path).exists(), "partial output left behind");
}

#[test]
fn simulate_emits_documented_json_schema() {
    let out = ruin(&[
        "simulate",
        "--rho",
        "1",
        "--mu-bar",
        "1",
        "--x",
        "1",
        "--y",
        "1",
        "--paths",
        "500",
        "--dt",
        "0.01",
        "--horizon",
        "5",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "p_hat", "std_err", "ci_low", "ci_high", "n_paths", "seed", "horizon", "dt", "note",
    ] {
        assert!(v.get(key).is_some(), "missing key {key} in {text}");
    }
    assert_eq!(v["n_paths"], 500);
    assert_eq!(v["seed"], 7);
    // keys appear in the documented order
    let order = [
        "p_hat", "std_err", "ci_low", "ci_high", "n_paths", "seed", "horizon", "dt", "note",
    ];
    let mut last = 0;
    for key in order {
        let pos = text.find(&format!("\"{key}\"")).unwrap();
        assert!(pos >= last);
        last = pos;
    }
}

#[test]
fn simulate_degenerate_single_path() {
    let out = ruin(&[
        "simulate",
        "--rho",
        "0",
        "--mu-bar",
        "1",
        "--x",
        "1e-9",
        "--y",
        "1",
        "--paths",
        "1",
        "--dt",
        "0.001",
        "--horizon",
        "2",
        "--bridge",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let p = v["p_hat"].as_f64().unwrap();
    assert!(p == 0.0 || p == 1.0);
    assert_eq!(v["std_err"].as_f64().unwrap(), 0.0);
}

#[test]
fn simulate_rejects_bad_configs() {
    // dt exceeding horizon
    let out = ruin(&[
        "simulate",
        "--rho",
        "0",
        "--mu-bar",
        "1",
        "--x",
        "1",
        "--y",
        "1",
        "--dt",
        "10",
        "--horizon",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // reflected engine needs rho = -1
    let out = ruin(&[
        "simulate",
        "--rho",
        "0",
        "--mu-bar",
        "1",
        "--x",
        "1",
        "--y",
        "1",
        "--reflected",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // reflected simulates the optimal policy only
    let out = ruin(&[
        "simulate",
        "--rho",
        "-1",
        "--mu-bar",
        "1",
        "--x",
        "1",
        "--y",
        "1",
        "--reflected",
        "--policy",
        "none",
        "--mu1",
        "0.5",
        "--mu2",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gain_subcommand_matches_eval_gain() {
    let args_tail = [
        "--rho", "1", "--mu1", "0.25", "--mu2", "0.75", "--delta", "-0.45", "--x", "4.875", "--y",
        "0.625",
    ];
    let mut gain_args = vec!["gain"];
    gain_args.extend_from_slice(&args_tail);
    let gain_out = ruin(&gain_args);
    assert!(gain_out.status.success());

    let mut eval_args = vec!["eval", "--quantity", "gain"];
    eval_args.extend_from_slice(&args_tail);
    let eval_out = ruin(&eval_args);
    assert!(eval_out.status.success());

    assert_eq!(stdout(&gain_out), stdout(&eval_out));
    assert!(stdout(&gain_out).starts_with("-0.0848"));
}

#[test]
fn check_hjb_passes_and_perturbation_fails() {
    let out = ruin(&["check", "--rho", "1", "--mu-bar", "1", "--suite", "hjb"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("PASS"));

    let out = ruin(&[
        "check",
        "--rho",
        "1",
        "--mu-bar",
        "1",
        "--suite",
        "hjb",
        "--perturb",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL,hjb,"));

    let out = ruin(&[
        "check", "--rho", "1", "--mu-bar", "1", "--suite", "boundary",
    ]);
    assert!(out.status.success());
}

#[test]
fn check_unsupported_params_exit_3() {
    let out = ruin(&["check", "--rho", "0.7", "--mu-bar", "1", "--suite", "hjb"]);
    assert_eq!(out.status.code(), Some(3));
}
