use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("assoc-walk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assoc-walk")).args(args).output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn two_state() -> String {
    config("two_state.json").display().to_string()
}

#[test]
fn markov_solve_benchmark() {
    let doc = json_ok(&["markov", "solve", "--config", &two_state(), "--seed", "1"]);
    let r = &doc["result"];
    assert!((f(&r["theta"]) - std::f64::consts::LN_2).abs() < 1e-10);
    assert!((f(&r["q"]) - 0.84375).abs() < 1e-10);
    assert_eq!(doc["command"], "markov solve");
    assert_eq!(doc["config"]["seed"], 1);
}

#[test]
fn markov_failures_map_to_exit_codes() {
    let (code, err) = exit_code(&["markov", "solve", "--config", config("no_tilt.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("NoTilt"), "{err}");

    let bad = scratch("bad.json", "{\"states\": [1, -1], \"P\": ");
    assert_eq!(exit_code(&["markov", "solve", "--config", bad.to_str().unwrap()]).0, 1);

    let unknown = scratch("unknown.json", r#"{"states":[1,-1],"P":[[0.8,0.2],[0.6,0.4]],"colour":"red"}"#);
    assert_eq!(exit_code(&["markov", "solve", "--config", unknown.to_str().unwrap()]).0, 1);

    let not_stochastic = scratch("rows.json", r#"{"states":[1,-1],"P":[[0.8,0.3],[0.6,0.4]]}"#);
    let (code, err) = exit_code(&["markov", "solve", "--config", not_stochastic.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("row 0"), "{err}");

    let negative_tol = scratch(
        "tol.json",
        r#"{"model":{"states":[1,-1],"P":[[0.8,0.2],[0.6,0.4]]},"eigen_tol":-1}"#,
    );
    assert_eq!(exit_code(&["markov", "solve", "--config", negative_tol.to_str().unwrap()]).0, 1);
    assert_eq!(exit_code(&["markov", "solve"]).0, 1);
    assert_eq!(exit_code(&["markov", "frobnicate"]).0, 1);
    assert_eq!(exit_code(&["markov", "solve", "--config", &two_state(), "--threads", "0"]).0, 1);
}

#[test]
fn markov_associate_and_round_trip() {
    let doc = json_ok(&["markov", "associate", "--config", &two_state(), "--seed", "1"]);
    let r = &doc["result"];
    let expected = [[0.4, 0.6], [0.2, 0.8]];
    for (i, row) in expected.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            assert!((f(&r["P*"][i][j]) - want).abs() < 1e-10);
        }
    }
    assert!((f(&r["pi*"][0]) - 0.25).abs() < 1e-10);
    assert!(f(&r["duality_error"]) < 1e-10);

    // re-feed the associated model: θ ↦ -θ and the original chain comes back
    let assoc = scratch("assoc.json", &r["associated_model"].to_string());
    let back = json_ok(&["markov", "associate", "--config", assoc.to_str().unwrap(), "--seed", "1"]);
    let b = &back["result"];
    assert!((f(&b["theta"]) + std::f64::consts::LN_2).abs() < 1e-10);
    let original = [[0.8, 0.2], [0.6, 0.4]];
    for (i, row) in original.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            assert!((f(&b["P*"][i][j]) - want).abs() < 1e-10);
        }
    }
}

#[test]
fn iid_rows_chain_gives_product_tilt() {
    let doc = json_ok(&["markov", "associate", "--config", config("iid_rows.json").to_str().unwrap()]);
    let r = &doc["result"];
    // i.i.d. ±1 with P(+1) = 3/4: e^{-θ} = 1/3, tilted law (1/4, 3/4)
    assert!((f(&r["theta"]) - 3f64.ln()).abs() < 1e-10);
    for i in 0..2 {
        assert!((f(&r["P*"][i][0]) - 0.25).abs() < 1e-10);
        assert!((f(&r["P*"][i][1]) - 0.75).abs() < 1e-10);
    }
}

#[test]
fn gauss_solve_examples() {
    let iid = json_ok(&["gauss", "solve", "--config", config("iid.json").to_str().unwrap()]);
    assert_eq!(iid["result"], serde_json::json!({"theta": 2.0, "R": 0.0, "S": 0.0, "q": 1.0}));
    let ar1 = json_ok(&["gauss", "solve", "--config", config("ar1.json").to_str().unwrap()]);
    let r = &ar1["result"];
    assert!((f(&r["theta"]) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!((f(&r["R"]), f(&r["S"])), (1.0, 2.0));
    assert!((f(&r["q"]) - (-8.0f64 / 9.0).exp()).abs() < 1e-15);
    let (code, err) = exit_code(&["gauss", "solve", "--config", config("ma_degenerate.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("DegenerateCase"), "{err}");
}

#[test]
fn queue_run_examples() {
    let csv = std::env::temp_dir().join(format!("assoc-walk-cli-{}-tail.csv", std::process::id()));
    let mm1 = json_ok(&[
        "queue",
        "run",
        "--config",
        config("mm1.json").to_str().unwrap(),
        "--seed",
        "11",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let r = &mm1["result"];
    assert_eq!(f(&r["theta_analytic"]), 1.0);
    assert!((0.9..=1.1).contains(&f(&r["theta_hat"])));
    assert_eq!(r["comparison"], Value::Null);
    assert_eq!(mm1["config"]["burn_in"], 10_000);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,log_survival\n"));
    assert!(text.lines().count() > 1000);

    let appt = json_ok(&["queue", "run", "--config", config("appointments.json").to_str().unwrap()]);
    let r = &appt["result"];
    assert!((f(&r["theta_analytic"]) - 1.5936242600400405).abs() < 1e-10);
    assert!((f(&r["comparison"]["factor"]) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);

    assert_eq!(exit_code(&["queue", "run", "--config", config("mm1_unstable.json").to_str().unwrap()]).0, 1);
}

#[test]
fn verify_suites() {
    let doc = json_ok(&["verify", "run"]);
    assert_eq!(doc["result"]["passed"], true);
    assert!(doc["config"]["seed"].is_u64(), "seed is generated and echoed");

    let (code, err) = exit_code(&["markov", "verify", "--config", config("sweep_mismatch.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("expected flat, observed increasing"), "{err}");

    let gauss = json_ok(&["gauss", "verify", "--config", config("ar1.json").to_str().unwrap(), "--seed", "4"]);
    let checks = &gauss["result"]["checks"];
    for name in ["scan", "sweep", "martingale", "normalization"] {
        assert_eq!(checks[name]["passed"], true, "{name}");
    }
}

#[test]
fn embedded_config_must_match_command() {
    let out = scratch("solve-out.json", "");
    let status = Command::new(env!("CARGO_BIN_EXE_assoc-walk"))
        .args(["markov", "solve", "--config", &two_state(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let (code, err) = exit_code(&["markov", "verify", "--config", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("markov solve"), "{err}");
}
