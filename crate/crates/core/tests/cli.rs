use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const QUBIT: &str = r#"{
  "dim": 2,
  "observables": [
    {"name": "sz", "diag": [1, -1]},
    {"name": "sx", "real": [[0, 1], [1, 0]]}
  ],
  "states": [{"name": "up", "vector": [1, 0]}]
}"#;

const QUTRIT: &str = r#"{
  "dim": 3,
  "observables": [{"name": "a", "diag": [0.5, 1.5, 2.5]}],
  "states": [{"name": "e1", "vector": [0, 1, 0]}]
}"#;

fn bohr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bohr")).args(args).env_remove("BOHR_SEED").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn poset_node_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (QUBIT, 3),
        (r#"{"dim": 2, "observables": [{"name": "a", "diag": [1, 2]}]}"#, 2),
        (r#"{"dim": 2, "observables": [{"name": "a", "diag": [2, 2]}]}"#, 1),
        (
            r#"{"dim": 2, "contexts": [{"label": "one", "atoms": [{"dim": 2, "entries": [[[1,0],[0,0]],[[0,0],[1,0]]]}]}]}"#,
            1,
        ),
    ];
    for (i, (sys, n)) in cases.iter().enumerate() {
        let s = write(dir.path(), &format!("s{i}.json"), sys);
        let dot = dir.path().join(format!("s{i}.dot"));
        let out = bohr(&["poset", "--system", s.to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
        assert!(out.status.success());
        assert_eq!(json(&out)["result"]["contexts"].as_array().unwrap().len(), *n);
        let dot = std::fs::read_to_string(dot).unwrap();
        assert_eq!(dot.matches("[label=").count(), *n, "{dot}");
    }
}

#[test]
fn daseinise_matches_eigenvalue_filter() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "q.json", QUTRIT);
    let out = bohr(&["daseinise", "--system", s.to_str().unwrap(), "--observable", "a", "--interval", "1,3"]);
    assert!(out.status.success());
    let v = json(&out);
    // a is diagonal, so each atom's profile is its eigenvalue; 1.5 and 2.5 lie in (1, 3)
    let prof = v["result"]["profiles"].as_array().unwrap().iter().find(|p| p["context"] == "a").unwrap().clone();
    let eig: Vec<f64> = prof["lower"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(eig, prof["upper"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect::<Vec<_>>());
    let expected: Vec<usize> = (0..3).filter(|&i| eig[i] > 1.0 && eig[i] < 3.0).collect();
    assert_eq!(expected.len(), 2);
    assert_eq!(v["result"]["values"]["a"], serde_json::json!(expected));
    assert_eq!(v["metadata"]["inputs"]["interval"], serde_json::json!([1.0, 3.0]));
}

#[test]
fn pair_eigenstate() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "q.json", QUBIT);
    let dot = dir.path().join("pair.dot");
    let out = bohr(&[
        "pair", "--system", s.to_str().unwrap(), "--observable", "sz", "--interval", "0,2", "--state", "up", "--dot",
        dot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["result"]["members"], serde_json::json!(["sz"]));
    assert_eq!(v["result"]["base"], "sz∧sx");
    let out = bohr(&[
        "pair", "--system", s.to_str().unwrap(), "--observable", "sz", "--interval", "0,2", "--state", "up", "--base",
        "sx",
    ]);
    assert_eq!(json(&out)["result"]["members"], serde_json::json!([]));
}

#[test]
fn ks_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "chain.json", r#"{"dim": 2, "bases": [[[1, 0], [0, 1]]]}"#);
    let out = bohr(&["ks", "--config", chain.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["verdict"], "point_found");
    let out = bohr(&["ks", "--config", &data("cabello18.json")]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "no_point");
    assert_eq!(v["result"]["stats"]["exhaustive"], true);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dim": 2, "observables": [{"name": "a", "real": [[0, 1], [2, 0]]}]}"#);
    let good = write(dir.path(), "q.json", QUBIT);
    let cases: Vec<Vec<&str>> = vec![
        vec!["poset", "--system", bad.to_str().unwrap()],
        vec!["poset", "--system", "/nonexistent/system.json"],
        vec!["daseinise", "--system", good.to_str().unwrap(), "--observable", "nope", "--interval", "0,1"],
        vec!["daseinise", "--system", good.to_str().unwrap(), "--observable", "sz", "--interval", "2,1"],
        vec!["daseinise", "--system", good.to_str().unwrap(), "--observable", "sz"],
        vec!["pair", "--system", good.to_str().unwrap(), "--observable", "sz", "--interval", "0,1", "--state", "x"],
        vec!["poset"],
    ];
    for c in cases {
        assert_eq!(bohr(&c).status.code(), Some(2), "{c:?}");
    }
}

#[test]
fn strict_escalates_boundary_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "q.json", QUBIT);
    let base = ["daseinise", "--system", s.to_str().unwrap(), "--observable", "sz", "--interval", "-inf,1"];
    assert_eq!(bohr(&base).status.code(), Some(0));
    let mut strict = base.to_vec();
    strict.push("--strict");
    let out = bohr(&strict);
    assert_eq!(out.status.code(), Some(4));
    assert!(!json(&out)["result"]["warnings"].as_array().unwrap().is_empty());
    let mut wide = strict.clone();
    wide[6] = "-inf,1.5";
    let out = bohr(&wide);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn tolerance_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "q.json", QUBIT);
    let out = bohr(&[
        "daseinise", "--system", s.to_str().unwrap(), "--observable", "sz", "--interval", "-inf,1.01", "--tolerance",
        "strict=0.1",
    ]);
    let v = json(&out);
    assert_eq!(v["metadata"]["tolerances"]["strict"], 0.1);
    // μ = 1 now counts as a tie with 1.01
    assert_eq!(v["result"]["values"]["sz"], serde_json::json!([0]));
    assert_eq!(bohr(&["poset", "--system", s.to_str().unwrap(), "--tolerance", "bogus=1"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "q.json", QUBIT);
    for cmd in [
        vec!["poset", "--system", s.to_str().unwrap()],
        vec!["spectrum", "--system", s.to_str().unwrap(), "--observable", "sx", "--list"],
        vec!["daseinise", "--system", s.to_str().unwrap(), "--observable", "sx", "--interval", "-0.5,inf"],
        vec!["frame", "--system", s.to_str().unwrap()],
    ] {
        let a = bohr(&cmd);
        let b = bohr(&cmd);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
        let v = json(&a);
        let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
        assert_eq!(again.as_bytes(), &a.stdout[..]);
    }
}

#[test]
fn out_flag_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "q.json", QUBIT);
    let out_path = dir.path().join("o.json");
    let out = Command::new(env!("CARGO_BIN_EXE_bohr"))
        .args(["poset", "--system", s.to_str().unwrap(), "--out", out_path.to_str().unwrap()])
        .env("BOHR_SEED", "42")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v["metadata"]["seed"], 42);
    assert_eq!(v["result"]["contexts"].as_array().unwrap().len(), 3);
}

#[test]
fn frame_of_sites() {
    let dir = tempfile::tempdir().unwrap();
    let site = write(dir.path(), "iv.json", r#"{"grid": [0, 1, 2]}"#);
    let dot = dir.path().join("f.dot");
    let out = bohr(&["frame", "--site", site.to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["result"]["lattice"]["distributive"], true);
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
    let chain = write(
        dir.path(),
        "chain.json",
        r#"{"elements": ["0", "a", "1"], "leq": [[0, 1], [1, 2]], "cover": "down-set"}"#,
    );
    let v = json(&bohr(&["frame", "--site", chain.to_str().unwrap()]));
    // down-sets of a three-element chain
    assert_eq!(v["result"]["frame"]["opens"].as_array().unwrap().len(), 4);

    let s = write(dir.path(), "q.json", QUBIT);
    let v = json(&bohr(&["frame", "--system", s.to_str().unwrap()]));
    assert_eq!(v["result"]["opens"].as_array().unwrap().len(), 17);
    assert_eq!(v["result"]["lattice"]["distributive"], true);
}
