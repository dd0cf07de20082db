use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use renyi_bet::io::{self, GameSpecFile};
use renyi_bet::oracles::OracleConfig;
use serde_json::{json, Value};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn schema(name: &str) -> Value {
    read(&repo().join("schemas").join(name))
}

/// The named definition of `doc`, with the other definitions in scope.
fn definition(doc: &Value, name: &str) -> Value {
    json!({ "$ref": format!("#/$defs/{name}"), "$defs": doc["$defs"] })
}

fn assert_valid(schema: &Value, instance: &Value, what: &str) {
    let v = jsonschema::validator_for(schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{what}: {errors:?}");
}

fn specs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/specs");
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "pmfs.json")
        .collect();
    v.sort();
    v
}

#[test]
fn checked_in_oracle_config_is_the_default() {
    let path = repo().join("config/oracle.json");
    let cfg: OracleConfig = io::load(&path).unwrap();
    assert_eq!(cfg, OracleConfig::default());
    assert_valid(
        &schema("oracle-config.schema.json"),
        &read(&path),
        "config/oracle.json",
    );
    let default = serde_json::to_value(OracleConfig::default()).unwrap();
    assert_valid(&schema("oracle-config.schema.json"), &default, "default");
}

#[test]
fn sample_specs_match_the_schema() {
    let s = schema("game-spec.schema.json");
    for p in specs() {
        assert_valid(&s, &read(&p), &p.display().to_string());
    }
}

#[test]
fn parsed_specs_reserialize_under_the_schema() {
    let s = schema("game-spec.schema.json");
    for p in specs() {
        let file = io::load_spec(&p, io::bare_any_spec).unwrap();
        let back = serde_json::to_value(&file).unwrap();
        assert_valid(&s, &back, &p.display().to_string());
        let again: GameSpecFile = serde_json::from_value(back).unwrap();
        assert_eq!(again, file);
    }
}

#[test]
fn schema_rejects_unknown_fields() {
    let s = schema("game-spec.schema.json");
    let v = jsonschema::validator_for(&s).unwrap();
    let bad = json!({
        "version": 1,
        "spec": {"kind": "betting", "p0": {"mass": [1.0]}, "odds": [[1.0]], "risk": [2.0], "stake": 3}
    });
    assert!(!v.is_valid(&bad));
    let bad_version = json!({
        "version": 2,
        "spec": {"kind": "betting", "p0": {"mass": [1.0]}, "odds": [[1.0]], "risk": [2.0]}
    });
    assert!(!v.is_valid(&bad_version));
}

fn emitted(args: &[&str]) -> Value {
    let out = Command::new(env!("CARGO_BIN_EXE_renyi-bet"))
        .args(args)
        .env_remove("RENYI_BET_SEED")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn every_report_matches_its_schema() {
    let reports = schema("reports.schema.json");
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/specs");
    let cases = [
        ("divergence", "div --alphas 0.5,0.25,0.25 --pmfs @pmfs.json"),
        ("divergence", "cond-div --spec @cond_div.json"),
        ("dpi_check", "dpi-check --spec @dpi_plain.json"),
        ("sweep", "sweep --spec @sweep.json --format json"),
        ("ice", "ice --spec @constant_wealth.json"),
        ("optimize", "optimize --spec @side_info.json"),
        ("optimize", "optimize --spec @two_lotteries.json --bits"),
        ("decompose", "decompose --spec @two_lotteries.json"),
        ("side_info", "side-info --spec @side_info.json"),
        ("gpt_bet", "gpt-bet --spec @qubit.json"),
        ("sd", "sd --spec @qubit.json"),
        ("monotone", "monotone --spec @qubit.json"),
        ("oracle", "oracle --spec @side_info.json"),
        ("oracle", "oracle --random kernel --dims 3,2"),
    ];
    for (def, line) in cases {
        let args: Vec<String> = line
            .split(' ')
            .map(|a| match a.strip_prefix('@') {
                Some(name) => dir.join(name).to_str().unwrap().to_string(),
                None => a.to_string(),
            })
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let report = emitted(&args);
        assert_valid(&definition(&reports, def), &report, line);
        assert_valid(&reports, &report, line);
    }
}

#[test]
fn verify_report_matches_its_schema() {
    let reports = schema("reports.schema.json");
    let report = emitted(&["verify-all", "--mc-samples", "20000"]);
    assert_valid(&definition(&reports, "verify"), &report, "verify-all");
}
