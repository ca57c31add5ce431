use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use conecrit::edge::PolyhedronDocument;
use conecrit::exponents::ExponentTable;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_conecrit"));
    c.env_remove("CONECRIT_MESH");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn conecrit")
}

fn samples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/samples")
}

fn sample(name: &str) -> String {
    samples().join(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exponents_quarter_arc() {
    let v = json(&run(&["exponents", "--N", "3", "--k", "2", "--arc", "pi/2"]));
    assert!((v["q_c"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-10);
    assert!((v["q_c_star"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert!((v["gamma"].as_f64().unwrap() - 4.0).abs() < 1e-10);

    // eight significant digits of π/2 pin q_c only to about 1e-8
    let v = json(&run(&["exponents", "--N", "3", "--k", "2", "--arc", "1.5707963"]));
    assert!((v["q_c"].as_f64().unwrap() - 5.0 / 3.0).abs() < 1e-7);
}

#[test]
fn exponents_json_round_trips() {
    let out = run(&["exponents", "--N", "4", "--k", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let table: ExponentTable = serde_json::from_str(&text).unwrap();
    assert!(table.q_c_star.is_infinite());
    let again: ExponentTable = serde_json::from_str(&serde_json::to_string(&table).unwrap()).unwrap();
    assert_eq!(table, again);
    assert!(text.contains("\"q_c_star\": \"inf\""));
}

#[test]
fn exponents_at_q_and_table_format() {
    let v = json(&run(&["exponents", "--N", "3", "--k", "2", "--gamma", "4", "--q", "1.8"]));
    assert!((v["at_q"]["d_crit"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["at_q"]["regime"], "Capacity");

    let out = run(&["exponents", "--N", "3", "--k", "3", "--gamma", "12", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("q_c ") && l.contains("1.500000000000")));
}

#[test]
fn mesh_flag_and_env_agree() {
    let args = ["exponents", "--N", "3", "--k", "3", "--cap", "pi/3"];
    let a = bin().args(args).env("CONECRIT_MESH", "512").output().unwrap();
    let mut with_flag = vec!["--mesh", "512"];
    with_flag.extend_from_slice(&args);
    let b = run(&with_flag);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&args);
    assert_ne!(a.stdout, c.stdout, "default mesh should differ from 512");
}

#[test]
fn report_is_deterministic_and_matches_cube() {
    let a = run(&["report"]);
    let b = run(&["report"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let overall: Vec<&str> = v["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["classification"]["overall"].as_str().unwrap())
        .collect();
    assert_eq!(overall, ["good", "bad", "bad"]);
    let removable: Vec<&str> = v["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["removability"]["overall"].as_str().unwrap())
        .collect();
    assert_eq!(removable, ["not_removable", "not_removable", "removable"]);
}

#[test]
fn classify_sample_and_override() {
    let v = json(&run(&["classify", &sample("cube.json")]));
    assert_eq!(v["classification"]["q"], 1.9);
    let v = json(&run(&["classify", &sample("cube.json"), "--q", "1.4"]));
    assert_eq!(v["classification"]["overall"], "good");
    let out = run(&["classify", &sample("cube.json"), "--format", "table"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("overall: Bad"));
}

#[test]
fn sample_document_matches_builtin_cube() {
    let text = std::fs::read_to_string(samples().join("cube.json")).unwrap();
    let mut doc: PolyhedronDocument = serde_json::from_str(&text).unwrap();
    doc.q = None;
    let mut builtin = PolyhedronDocument::unit_cube();
    builtin.q = None;
    assert_eq!(serde_json::to_value(&doc).unwrap(), serde_json::to_value(&builtin).unwrap());
}

#[test]
fn admissibility_samples() {
    let v = json(&run(&["admissibility", &sample("edge_dirac.json")]));
    assert_eq!(v["admissibility"]["status"], "convergent");
    assert_eq!(v["lifted"]["status"], "convergent");
    let e = v["admissibility"]["exponent"].as_f64().unwrap();
    assert!((e - (4.0 - 3.0 * 1.5)).abs() < 1e-3);

    let v = json(&run(&["admissibility", &sample("edge_dirac.json"), "--q", "1.7"]));
    assert_eq!(v["admissibility"]["status"], "divergent");
    assert_eq!(v["admissible"], false);
}

#[test]
fn profile_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("omega.csv");
    let v = json(&run(&["profile", "--N", "2", "--q", "2", "--arc", "pi", "--output", csv.to_str().unwrap()]));
    assert_eq!(v["status"], "profile");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("theta,omega"));
    assert_eq!(text.lines().count(), 1 + v["nodes"].as_u64().unwrap() as usize);

    let v = json(&run(&["profile", "--N", "2", "--q", "3.5", "--arc", "pi"]));
    assert_eq!(v["status"], "nonexistence");
    assert_eq!(v["certificate"]["decay_verified"], true);
}

#[test]
fn simulate_samples() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("u.csv");
    let v = json(&run(&["simulate", &sample("solve.json"), "--field", field.to_str().unwrap()]));
    assert_eq!(v["report"]["fit"]["classification"], "Weak");
    assert!(std::fs::metadata(&field).unwrap().len() > 0);

    let v = json(&run(&["simulate", &sample("weak.json")]));
    assert!((v["report"]["amplitude_ratio"].as_f64().unwrap() - 2.0).abs() < 1e-3);
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["exponents", "--N", "3"])), 1);
    assert_eq!(code(&run(&["exponents", "--N", "3", "--k", "2", "--arc", "sideways"])), 1);
    assert_eq!(code(&run(&["exponents", "--N", "3", "--k", "5", "--gamma", "1"])), 1);
    assert_eq!(code(&run(&["exponents", "--N", "3", "--k", "2"])), 1);
    assert_eq!(code(&run(&["classify", "/nonexistent/doc.json"])), 3);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&run(&["classify", bad.to_str().unwrap()])), 3);

    assert_eq!(code(&run(&["classify", &sample("cube.json"), "--q", "0.5"])), 1);

    let wide = dir.path().join("wide.json");
    std::fs::write(
        &wide,
        r#"{"alpha":"pi","q":1.3,"domain":{"r_min":1e-3,"r_max":1,"per_decade":8,"n_theta":4},
            "experiment":{"kind":"weak","k":50,"window":[1.05,999]}}"#,
    )
    .unwrap();
    let out = run(&["simulate", wide.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}
