use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn maharam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maharam"))
        .args(args)
        .env_remove("MAHARAM_OUT_DIR")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn stat_on_cyclic_rotation() {
    let out = maharam(&[
        "stat",
        "--action",
        "zoo:cyclic",
        "--params",
        "N=4",
        "--g",
        "atom:0",
        "--n",
        "4,8,16",
        "--window",
        "corner",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "n,window,a_n,support,ms\n4,corner,1.0,4,0\n8,corner,0.5,4,0\n16,corner,0.25,4,0\n"
    );
}

#[test]
fn stat_centered_window_and_scaled_sum() {
    let out = maharam(&[
        "stat",
        "--action",
        "TR1",
        "--g",
        "2*atom:0 + atom:5",
        "--n",
        "1,2,50",
        "--window",
        "centered",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("50,centered,"), "{}", rows[2]);
    let a: f64 = rows[2].split(',').nth(2).unwrap().parse().unwrap();
    assert!(a > 2.0 && a < 3.0, "{a}");
}

#[test]
fn stat_rejects_bad_window_lists() {
    for n in ["0", "4,4", "8,4", "x"] {
        let out = maharam(&["stat", "--action", "C4", "--n", n]);
        assert_eq!(code(&out), 2, "n={n}");
    }
    assert_eq!(code(&maharam(&["stat", "--n", "0"])), 2);
    assert_eq!(code(&maharam(&["stat", "--action", "C4", "--window", "diagonal"])), 2);
    assert_eq!(code(&maharam(&["stat", "--action", "TR1", "--g", "all"])), 2);
    assert_eq!(code(&maharam(&["stat", "--action", "C4", "--g", "atom:9"])), 2);
    assert_eq!(code(&maharam(&["stat"])), 2);
}

#[test]
fn timing_fills_the_ms_column() {
    let out = maharam(&["stat", "--action", "C4", "--n", "4", "--timing"]);
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    assert!(row.split(',').nth(4).unwrap().contains('.'), "{row}");
}

#[test]
fn maharam_verify_on_odometer() {
    let out = maharam(&[
        "maharam-verify",
        "--action",
        "zoo:odometer",
        "--params",
        "K=3,p=0.4",
        "--t",
        "1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["pass"], true);
    assert_eq!(report["measure"].as_array().unwrap().len(), 1);
    assert_eq!(report["extension"].as_array().unwrap().len(), 14);
    // On the cycle of 8 atoms the window n = 8 covers every atom, so the
    // identity reads ∫ max_t φ̂_t I_S = 8 · 0.6³ = 1.728 per unit of n.
    let row = report["extension"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["m"] == 1 && r["n"] == 8)
        .unwrap();
    assert!((row["lhs"].as_f64().unwrap() - 0.216).abs() < 1e-12);
}

#[test]
fn maharam_verify_with_rect_file_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let rects = write(
        dir.path(),
        "rects.json",
        r#"[{"atom": 0, "a": 0.0, "b": 1.5}, {"atom": 0, "a": 1.5, "b": 4.0}, {"atom": 1, "a": 0.25, "b": 0.5}]"#,
    );
    let out = maharam(&[
        "maharam-verify",
        "--action",
        "E2",
        "--rects",
        rects.to_str().unwrap(),
        "--radius",
        "3",
        "--n",
        "2,4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["measure"].as_array().unwrap().len(), 7);
    let overlapping = write(
        dir.path(),
        "overlap.json",
        r#"[{"atom": 0, "a": 0, "b": 2}, {"atom": 0, "a": 1, "b": 3}]"#,
    );
    assert_eq!(
        code(&maharam(&[
            "maharam-verify",
            "--action",
            "E2",
            "--rects",
            overlapping.to_str().unwrap()
        ])),
        2
    );
    let empty = write(dir.path(), "empty.json", r#"[{"atom": 0, "a": 1, "b": 1}]"#);
    assert_eq!(
        code(&maharam(&[
            "maharam-verify",
            "--action",
            "E2",
            "--rects",
            empty.to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn cocycle_check_reports_and_fails_on_noncommuting_generators() {
    let out = maharam(&["cocycle-check", "--action", "MIX", "--radius", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["cocycle"]["pass"], true);
    let bad = r#"{"atoms": [0, 1, 2], "weights": [1, 2, 3], "generators": [[1, 2, 0], [1, 0, 2]]}"#;
    let out = maharam(&["cocycle-check", "--action", bad]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["pass"], false);
    assert!(!report["commutativity_failures"].as_array().unwrap().is_empty());
}

#[test]
fn duality_check_default_sweep() {
    let out = maharam(&[
        "duality-check",
        "--action",
        "ST2",
        "--g",
        "atom:1 + 3*atom:-2",
        "--set",
        "exhaustion:2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["entries"].as_array().unwrap().len(), 49);
    let out = maharam(&["duality-check", "--action", "ST2", "--t", "2,-1"]);
    assert_eq!(json(&out)["entries"][0]["t"], serde_json::json!([2, -1]));
    assert_eq!(code(&maharam(&["duality-check", "--action", "ST2", "--t", "2"])), 2);
}

#[test]
fn verdict_labels_and_expectation() {
    let out = maharam(&["verdict", "--action", "OD3", "--expect", "conservative-consistent"]);
    assert_eq!(code(&out), 0);
    let out = maharam(&["verdict", "--action", "TR1", "--g", "atom:0", "--g", "exhaustion:1"]);
    let report = json(&out);
    assert_eq!(report["verdict"]["label"], "dissipative-consistent");
    assert_eq!(report["verdict"]["level"], 1.0);
    assert_eq!(
        code(&maharam(&[
            "verdict",
            "--action",
            "TR1",
            "--g",
            "exhaustion:1",
            "--g",
            "atom:0"
        ])),
        2
    );
    assert_eq!(code(&maharam(&["verdict", "--action", "TR1", "--expect", "maybe"])), 2);
    assert_eq!(code(&maharam(&["verdict", "--action", "TR1", "--theta-dec", "-1"])), 2);
}

#[test]
fn hopf_counts_on_mixed_fixture() {
    let out = maharam(&["hopf", "--action", "MIX", "--radius", "2"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["counts"]["conservative"], 4);
    assert_eq!(report["counts"]["dissipative"], 5);
    assert_eq!(report["truth_checked"], 9);
    assert_eq!(report["hopf"]["labels"][0]["label"], "conservative");
}

#[test]
fn krengel_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = maharam(&[
        "krengel",
        "--action",
        "zoo:translation",
        "--params",
        "tau=1:2.5",
        "--radius",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["form"]["representatives"].as_array().unwrap().len(), 2);
    let form = write(dir.path(), "form.json", &report["form"].to_string());
    let again = maharam(&[
        "krengel",
        "--action",
        "zoo:translation",
        "--params",
        "tau=1:2.5",
        "--form",
        form.to_str().unwrap(),
    ]);
    assert_eq!(code(&again), 0);
    assert_eq!(json(&again)["form"], report["form"]);
    assert_eq!(code(&maharam(&["krengel", "--action", "ST2"])), 2);
}

#[test]
fn zoo_list_names_all_fixtures() {
    let out = maharam(&["zoo", "list"]);
    assert_eq!(code(&out), 0);
    let listing = json(&out);
    let names: Vec<&str> = listing["fixtures"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["E2", "C4", "TR1", "ST2", "OD3", "MIX"]);
    assert_eq!(listing["builders"].as_array().unwrap().len(), 5);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "run.json",
        r#"{"command": "stat", "action": {"atoms": [0, 1], "weights": [1, 2], "generators": [[1, 0]]},
            "g": "atom:0", "n": [1, 2, 4], "window": "corner"}"#,
    );
    let c = config.to_str().unwrap();
    let out = maharam(&["stat", "--config", c]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 4);
    // Flags override the file.
    let out = maharam(&["stat", "--config", c, "--n", "8"]);
    assert_eq!(stdout(&out).lines().count(), 2);
    // The file's command must match.
    assert_eq!(code(&maharam(&["hopf", "--config", c])), 2);
}

#[test]
fn malformed_config_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(
        dir.path(),
        "typo.json",
        "{\n  \"action\": \"C4\",\n  \"radius\": 2,\n  \"windw\": \"corner\"\n}\n",
    );
    let out = maharam(&["stat", "--config", typo.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("typo.json:4:"), "{err}");
    assert!(err.contains("windw"), "{err}");
    let wrong_type = write(
        dir.path(),
        "type.json",
        "{\n  \"action\": \"C4\",\n  \"tol\": \"small\"\n}\n",
    );
    let err = stderr(&maharam(&["cocycle-check", "--config", wrong_type.to_str().unwrap()]));
    assert!(err.contains("type.json:3:") && err.contains("field `tol`"), "{err}");
    assert_eq!(code(&maharam(&["stat", "--config", "/nonexistent/run.json"])), 2);
}

#[test]
fn output_goes_to_file_or_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("sub").join("c4.csv");
    let out = maharam(&["stat", "--action", "C4", "--n", "4", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&target)
        .unwrap()
        .starts_with("n,window,a_n,support,ms\n"));

    let out = Command::new(env!("CARGO_BIN_EXE_maharam"))
        .args(["hopf", "--action", "C4"])
        .env("MAHARAM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("hopf.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn parameter_errors_exit_with_usage_code() {
    for args in [
        vec!["hopf", "--action", "zoo:odometer", "--params", "K=3,p=0.5"],
        vec!["hopf", "--action", "zoo:odometer", "--params", "K=3"],
        vec!["hopf", "--action", "zoo:cyclic", "--params", "N=4,q=1"],
        vec!["hopf", "--action", "C4", "--params", "N=4"],
        vec!["hopf", "--action", "zoo:nothing"],
        vec!["hopf", "--action", "{\"atoms\": [0], \"weights\": [1]}"],
        vec!["hopf", "--action", "missing.json"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&maharam(&args)), 2, "{args:?}");
    }
}
