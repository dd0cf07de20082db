use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data/specs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renyi-bet"))
        .args(args)
        .env_remove("RENYI_BET_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn diagnostic(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("diagnostic on stderr");
    serde_json::from_str(line).expect("diagnostic is JSON")
}

#[test]
fn div_three_pmfs() {
    let p = spec("pmfs.json");
    let v = json(&[
        "div",
        "--alphas",
        "0.5,0.25,0.25",
        "--pmfs",
        p.to_str().unwrap(),
    ]);
    assert!((num(&v, "divergence") - 0.069336).abs() < 5e-7);
    assert_eq!(v["case"], "I");
    assert_eq!(v["pivot"], 0);
    assert_eq!(v["units"], "nats");
}

#[test]
fn div_accepts_negative_orders() {
    let p = spec("pmfs.json");
    let v = json(&[
        "div",
        "--alphas",
        "2,-0.5,-0.5",
        "--pmfs",
        p.to_str().unwrap(),
    ]);
    assert_eq!(v["case"], "II");
}

#[test]
fn bits_rescales_log_quantities_only() {
    let p = spec("two_lotteries.json");
    let p = p.to_str().unwrap();
    let nats = json(&["optimize", "--spec", p]);
    let bits = json(&["optimize", "--spec", p, "--bits"]);
    let ratio = num(&nats, "log_ice") / num(&bits, "log_ice");
    assert!((ratio - std::f64::consts::LN_2).abs() < 1e-9);
    assert_eq!(nats["ice"], bits["ice"]);
    assert_eq!(nats["optimal_bets"], bits["optimal_bets"]);
    assert_eq!(nats["orders"], bits["orders"]);
    assert_eq!(bits["units"], "bits");
}

#[test]
fn ice_constant_wealth() {
    let v = json(&[
        "ice",
        "--spec",
        spec("constant_wealth.json").to_str().unwrap(),
    ]);
    assert_eq!(num(&v, "ice"), 1.0);
    assert_eq!(num(&v, "log_ice"), 0.0);
}

#[test]
fn decompose_recomposes() {
    let v = json(&[
        "decompose",
        "--spec",
        spec("two_lotteries.json").to_str().unwrap(),
    ]);
    assert_eq!(v["holds"], true);
    assert!((num(&v, "recomposed") - num(&v, "log_ice")).abs() < 1e-9);
    assert_eq!(v["penalty_terms"].as_array().unwrap().len(), 2);
}

#[test]
fn decompose_csv_has_one_row_per_lottery() {
    let out = run(&[
        "decompose",
        "--spec",
        spec("two_lotteries.json").to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "lottery,order,coefficient,penalty,fairness");
    assert_eq!(lines.len(), 3);
}

#[test]
fn side_info_gain_is_positive() {
    let v = json(&[
        "side-info",
        "--spec",
        spec("side_info.json").to_str().unwrap(),
    ]);
    assert!(num(&v, "gain") > 0.1);
    assert_eq!(v["holds"], true);
}

#[test]
fn sweep_writes_csv() {
    let out = run(&["sweep", "--spec", spec("sweep.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rows.headers().unwrap(),
        vec!["lambda", "divergence", "kl_limit", "tropical_limit"]
    );
    let values: Vec<f64> = rows
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(values.len(), 6);
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn qubit_game() {
    let q = spec("qubit.json");
    let q = q.to_str().unwrap();
    let v = json(&["gpt-bet", "--spec", q]);
    assert!((num(&v, "sd_success") - 0.75).abs() < 1e-12);
    assert!((num(&v, "advantage_ratio") - 1.171572875254).abs() < 1e-9);
    let sd = json(&["sd", "--spec", q]);
    assert_eq!(sd["guesses"], serde_json::json!([0, 1]));
    let m = json(&["monotone", "--spec", q]);
    assert!((num(&m, "monotone") - num(&v, "optimal_log_ice")).abs() < 1e-9);
}

#[test]
fn oracle_agrees_on_specs() {
    for name in ["two_lotteries.json", "side_info.json", "qubit.json"] {
        let v = json(&["oracle", "--spec", spec(name).to_str().unwrap()]);
        assert_eq!(v["agrees"], true, "{name}: {v}");
    }
}

#[test]
fn oracle_random_instances_follow_the_seed() {
    let a = json(&["oracle", "--random", "pmf", "--dims", "4", "--seed", "7"]);
    let b = json(&["oracle", "--random", "pmf", "--dims", "4", "--seed", "7"]);
    let c = json(&["oracle", "--random", "pmf", "--dims", "4", "--seed", "8"]);
    assert_eq!(a, b);
    assert_ne!(a["instance"], c["instance"]);
    assert_eq!(a["instance"]["mass"].as_array().unwrap().len(), 4);
}

#[test]
fn seed_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_renyi-bet"))
        .args(["oracle", "--random", "risk", "--dims", "2"])
        .env("RENYI_BET_SEED", "99")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 99);
}

#[test]
fn out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "ice",
        "--spec",
        spec("constant_wealth.json").to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["ice"], 1.0);
}

#[test]
fn verify_all_passes() {
    let v = json(&["verify-all", "--seed", "42"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["failures"], 0);
    assert!(v["checks"].as_u64().unwrap() > 10_000);
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"p0\": ").unwrap();
    let out = run(&["ice", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(diagnostic(&out)["exit_code"], 2);
}

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extra.json");
    fs::write(
        &path,
        r#"{"p0": {"mass": [0.5, 0.5]}, "odds": [[2, 2]], "risk": [2], "stake": 1}"#,
    )
    .unwrap();
    let out = run(&["optimize", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let d = diagnostic(&out);
    assert!(d["message"].as_str().unwrap().contains("stake"), "{d}");
}

#[test]
fn inadmissible_risk_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("risk.json");
    fs::write(
        &path,
        r#"{"p0": {"mass": [0.5, 0.5]}, "odds": [[2, 2], [2, 2]], "risk": [0.2, 0.2]}"#,
    )
    .unwrap();
    let out = run(&["optimize", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_search_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    fs::write(
        &path,
        r#"{"p0": {"mass": [0.2, 0.2, 0.2, 0.2, 0.2]}, "odds": [[5, 5, 5, 5, 5]], "risk": [2]}"#,
    )
    .unwrap();
    let out = run(&["oracle", "--spec", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn singular_input_exits_4() {
    let p = spec("pmfs.json");
    let out = run(&["div", "--alphas", "1,0,0", "--pmfs", p.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(diagnostic(&out)["exit_code"], 4);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log_utility.json");
    fs::write(
        &path,
        r#"{"p0": {"mass": [0.5, 0.5]}, "odds": [[2, 2]], "risk": [1], "bets": [{"mass": [0.5, 0.5]}]}"#,
    )
    .unwrap();
    let out = run(&["ice", "--spec", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn starved_oracle_exits_3_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("oracle.json");
    let mut c: Value = serde_json::from_str(
        &fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/oracle.json"))
            .unwrap(),
    )
    .unwrap();
    c["grid_resolution"] = 0.45.into();
    c["grid_budget"] = 1.into();
    c["dirichlet_samples"] = 1.into();
    c["concentrations"] = serde_json::json!([1.0]);
    fs::write(&cfg, c.to_string()).unwrap();
    let out = run(&[
        "oracle",
        "--spec",
        spec("two_lotteries.json").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["agrees"], false);
    assert_eq!(v["search"]["complete"], false);
    assert_eq!(diagnostic(&out)["error"], "property-violation");
}

#[test]
fn negative_tolerance_exits_2() {
    let out = run(&[
        "ice",
        "--spec",
        spec("constant_wealth.json").to_str().unwrap(),
        "--tolerance",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_2() {
    assert_eq!(run(&["bet-everything"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
