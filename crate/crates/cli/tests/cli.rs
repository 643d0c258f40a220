//! Runs the `taut` binary on small inputs and checks its JSON output and
//! exit status.

use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::{Command, Output};

fn taut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taut")).args(args).env_remove("TAUT_CACHE_DIR").output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = taut(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn code(args: &[&str]) -> i32 {
    taut(args).status.code().expect("exit code")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name).to_string_lossy().into_owned()
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("taut-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

const LOOP_G2: &str = r#"{"genera":[2],"edges":[[{"id":0,"vertex":0},{"id":1,"vertex":0}]]}"#;

#[test]
fn degree_of_the_hyperelliptic_target_map() {
    let v = ok_json(&["deg-delta", "--group", "cyclic:2", "--gprime", "0", "--xi", "1,1,1,1,1,1"]);
    assert_eq!(v, json!({ "degree": "1/2" }));
    let b = ok_json(&["deg-delta", "--group", "Z2", "--gprime", "0", "--xi", "1^6", "--bruteforce"]);
    assert_eq!(b, v);
}

#[test]
fn hyperelliptic_locus_against_the_faber_basis() {
    let v = ok_json(&["pair", "--cycle", "H:3:Z2:1^8", "--strata", &data("faber_basis.json")]);
    assert_eq!(v, json!({ "values": ["-1/8", "3/16", "0"] }));
}

#[test]
fn weierstrass_divisor_is_solved() {
    let v = ok_json(&["--normalized", "solve-cycle", "--cycle", "Wp:2:Z2:1^6:keep=1", "--degree", "1"]);
    assert_eq!(v["unique"], json!(true));
    let mut coeffs: Vec<String> =
        v["class"]["terms"].as_array().unwrap().iter().map(|t| t["coeff"].as_str().unwrap().to_string()).collect();
    coeffs.sort();
    assert_eq!(coeffs, vec!["-1/10", "-6/5", "3"]);
}

#[test]
fn solved_class_round_trips_through_validate_and_integral() {
    let v = ok_json(&["solve-cycle", "--cycle", "Wp:2:Z2:1^6:keep=1", "--degree", "1"]);
    let class = v["class"].to_string();
    assert_eq!(ok_json(&["validate", "--class", &class])["valid"], json!(true));
    let psi = r#"{"g":2,"n":1,"terms":[{"coeff":"1","graph":{"genera":[2],"legs":[{"label":1,"vertex":0}]},"psi":[["L1",3]]}]}"#;
    let prod = ok_json(&["product", "--a", &class, "--b", psi]);
    let direct = ok_json(&["integral", "--class", &prod.to_string()]);
    let paired = ok_json(&["pair", "--cycle", "Wp:2:Z2:1^6:keep=1", "--strata", &format!("[{psi}]")]);
    assert_eq!(direct["value"], paired["values"][0]);
}

#[test]
fn output_is_reproducible() {
    let args = ["enum-gstructures", "--cycle", "H:3:Z2:1^8", "--graph", LOOP_G2];
    let a = taut(&args);
    let b = taut(&["--jobs", "3", "enum-gstructures", "--cycle", "H:3:Z2:1^8", "--graph", LOOP_G2]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["count"], json!("126"));
}

#[test]
fn emitted_graphs_parse_back() {
    let v = ok_json(&["enum-graphs", "--g", "1", "--n", "2"]);
    assert_eq!(v["count"], json!(5));
    for g in v["graphs"].as_array().unwrap() {
        assert_eq!(ok_json(&["validate", "--graph", &g.to_string()])["valid"], json!(true));
    }
}

#[test]
fn diagonal_of_m04_parses_back() {
    let k = ok_json(&["diagonal", "--g", "0", "--n", "4"]);
    assert_eq!(k["terms"].as_array().unwrap().len(), 2);
    assert_eq!(ok_json(&["validate", "--kunneth", &k.to_string()])["valid"], json!(true));
}

#[test]
fn cycle_pulled_back_to_a_boundary_graph_pushes_forward() {
    let tail = r#"{"genera":[1,2],"edges":[[{"id":0,"vertex":0},{"id":1,"vertex":1}]]}"#;
    let k = ok_json(&["pullback", "--cycle", "H:3:Z2:1^8", "--graph", tail]);
    assert_eq!(ok_json(&["validate", "--kunneth", &k.to_string()])["valid"], json!(true));
    let pushed = ok_json(&["pushforward", "--kunneth", &k.to_string()]);
    assert_eq!(pushed["g"], json!(3));
}

#[test]
fn forgetful_pullback_then_pushforward_vanishes() {
    let psi = r#"{"g":1,"n":1,"terms":[{"coeff":"1","graph":{"genera":[1],"legs":[{"label":1,"vertex":0}]},"psi":[["L1",1]]}]}"#;
    let up = ok_json(&["pullback", "--class", psi, "--forget", "2"]);
    let down = ok_json(&["pushforward", "--class", &up.to_string(), "--forget", "2"]);
    assert!(down["terms"].as_array().unwrap().is_empty());
}

#[test]
fn database_export_and_import() {
    let dir = scratch_dir("db");
    let listed = ok_json(&["db", "list"]);
    let n = listed["records"].as_array().unwrap().len();
    let exported = ok_json(&["db", "export", "--out", dir.to_str().unwrap()]);
    assert_eq!(exported["written"].as_u64().unwrap() as usize, n);
    let shown = ok_json(&["db", "show", "--cycle", "Wp:2:Z2:1^6:keep=1"]);
    assert_eq!(ok_json(&["validate", "--record", &shown.to_string()])["valid"], json!(true));
    let again = ok_json(&["--db", dir.to_str().unwrap(), "db", "list"]);
    assert_eq!(again, listed);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn cache_directory_is_written() {
    let dir = scratch_dir("cache");
    ok_json(&["--cache-dir", dir.to_str().unwrap(), "pair", "--cycle", "H:3:Z2:1^8", "--strata", &data("faber_basis.json")]);
    assert!(dir.join("witten.json").exists());
    let v = ok_json(&["--cache-dir", dir.to_str().unwrap(), "pair", "--cycle", "H:3:Z2:1^8", "--strata", &data("faber_basis.json")]);
    assert_eq!(v["values"][0], json!("-1/8"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["no-such-command"]), 1);
    assert_eq!(code(&["integral", "--class", "[1"]), 1);
    assert_eq!(code(&["deg-delta", "--group", "cyclic:2", "--gprime", "0", "--xi", "1,x"]), 1);
    assert_eq!(code(&["--budget", "3", "deg-delta", "--group", "cyclic:6", "--gprime", "2", "--xi", "1,2,3", "--bruteforce"]), 2);
    assert_eq!(code(&["--timeout", "1", "enum-graphs", "--g", "4", "--n", "3"]), 2);
    assert_eq!(code(&["validate", "--graph", r#"{"genera":[0],"legs":[{"label":1,"vertex":0}]}"#]), 3);
    assert_eq!(code(&["enum-gstructures", "--cycle", "H:3:Z2:1^8", "--graph", r#"{"genera":[1],"edges":[[{"id":0,"vertex":0},{"id":1,"vertex":0}]]}"#]), 3);
    assert_eq!(code(&["db", "show", "--cycle", "X:2:Z3:1,2"]), 3);
    assert_eq!(code(&["pullback", "--cycle", "H:3:Z2:1^8", "--graph", LOOP_G2]), 3);
}

#[test]
fn validate_reports_the_violated_invariant() {
    let out = taut(&["validate", "--graph", r#"{"genera":[0],"legs":[{"label":1,"vertex":0}]}"#]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], json!(false));
    assert!(v["violations"][0].as_str().unwrap().contains("unstable"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unstable"));
}
