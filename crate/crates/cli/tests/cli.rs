use std::path::Path;
use std::process::{Command, Output};

use balance_core::objective::exact_value;
use balance_core::{load_instance, solve_correlated, ObjectiveId, SolutionProfile, SolverOptions};
use serde_json::Value;

const STAR: &str = r#"{"n":3,"mu":2,"nu":2,"k":2,"setting":"cor","seeds":[[1],[]],
"arcs":[{"u":0,"v":1,"p":[1.0,1.0]},{"u":0,"v":2,"p":[1.0,1.0]}]}"#;

const STAR_REORDERED: &str = r#"{"arcs":[{"p":[1.0,1.0],"v":1,"u":0},{"v":2,"u":0,"p":[1.0,1.0]}],
  "seeds":[[1],[]], "setting":"cor", "k":2, "nu":2, "mu":2, "n":3}"#;

const FRACTIONAL: &str = r#"{"n":3,"mu":2,"nu":2,"k":2,"setting":"het","seeds":[[0],[1]],
"arcs":[{"u":0,"v":1,"p":[0.5,0.3]},{"u":1,"v":2,"p":[0.7,0.4]}]}"#;

fn balance(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balance")).args(args).current_dir(dir).output().unwrap()
}

fn record(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("star.json"), STAR).unwrap();
    std::fs::write(dir.path().join("star2.json"), STAR_REORDERED).unwrap();
    std::fs::write(dir.path().join("frac.json"), FRACTIONAL).unwrap();
    std::fs::write(dir.path().join("tri.txt"), "3 2\n0 1\n1 2\n0 2\n").unwrap();
    dir
}

#[test]
fn solve_cor_matches_library() {
    let dir = setup();
    let rec = record(&balance(dir.path(), &["solve", "--algo", "cor", "--epsilon", "0.2", "--delta", "0.1", "--seed", "7", "star.json"]));
    let lib = solve_correlated(&load_instance(STAR.as_bytes()).unwrap(), &SolverOptions::new(0.2, 0.1, 7)).unwrap();
    assert_eq!(rec["result"], serde_json::to_value(&lib).unwrap());
    assert_eq!(rec["result"]["estimated_value"], 3.0);
    assert_eq!(rec["command"], "solve");
    assert!(rec.get("wall_ms").is_none());
}

#[test]
fn solve_setting_checks() {
    let dir = setup();
    assert_eq!(balance(dir.path(), &["solve", "--algo", "het", "star.json"]).status.code(), Some(0));
    let out = balance(dir.path(), &["solve", "--algo", "cor", "frac.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("correlated"));
}

#[test]
fn solve_every_algorithm_respects_budget() {
    let dir = setup();
    for algo in ["greedy", "tuple", "iter", "het"] {
        let rec = record(&balance(dir.path(), &["solve", "--algo", algo, "--samples-cap", "500", "frac.json"]));
        assert!(rec["result"]["chosen"].as_array().unwrap().len() <= 2, "{algo}");
    }
    let rec = record(&balance(dir.path(), &["solve", "--algo", "greedy", "--objective", "psi", "star.json"]));
    assert_eq!(rec["result"]["objective"], "psi");
}

#[test]
fn solve_tuple_limit_exits_three() {
    let dir = setup();
    let out = balance(dir.path(), &["solve", "--algo", "tuple", "--tuple-limit", "2", "frac.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn out_flag_writes_the_record() {
    let dir = setup();
    let out = balance(dir.path(), &["solve", "--algo", "greedy", "star.json", "--out", "rec.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let rec: Value = serde_json::from_slice(&std::fs::read(dir.path().join("rec.json")).unwrap()).unwrap();
    assert_eq!(rec["command"], "solve");
}

#[test]
fn estimate_examples() {
    let dir = setup();
    let rec = record(&balance(dir.path(), &["estimate", "star.json", "--pairs", "0:1,0:2"]));
    assert_eq!(rec["result"]["estimate"]["samples_used"], 1);
    assert_eq!(rec["result"]["estimate"]["value"], 3.0);

    let rec = record(&balance(dir.path(), &["estimate", "frac.json", "--samples-cap", "100", "--exact"]));
    let est = &rec["result"]["estimate"];
    assert_eq!(est["samples_used"], 100);
    assert!(est["samples_requested"].as_u64().unwrap() > 100);
    assert_eq!(est["capped"], true);
    let exact = exact_value(ObjectiveId::Phi, &SolutionProfile::new(), &load_instance(FRACTIONAL.as_bytes()).unwrap()).unwrap();
    assert_eq!(rec["result"]["exact_value"], exact);

    let a = balance(dir.path(), &["estimate", "frac.json", "--seed", "3", "--sampling", "forward"]);
    let b = balance(dir.path(), &["estimate", "frac.json", "--seed", "3", "--sampling", "forward"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn estimate_rejects_bad_pairs_and_objectives() {
    let dir = setup();
    assert_eq!(balance(dir.path(), &["estimate", "star.json", "--pairs", "0:9"]).status.code(), Some(2));
    assert_eq!(balance(dir.path(), &["estimate", "star.json", "--pairs", "x"]).status.code(), Some(2));
    assert_eq!(balance(dir.path(), &["estimate", "frac.json", "--objective", "psi"]).status.code(), Some(2));
    assert_eq!(balance(dir.path(), &["estimate", "missing.json"]).status.code(), Some(2));
}

#[test]
fn digest_ignores_field_order() {
    let dir = setup();
    let a = record(&balance(dir.path(), &["estimate", "star.json"]));
    let b = record(&balance(dir.path(), &["estimate", "star2.json"]));
    assert_eq!(a["input_digest"], b["input_digest"]);
    assert_eq!(a, b);
}

#[test]
fn reduce_examples() {
    let dir = setup();
    let rec = record(&balance(dir.path(), &["reduce", "tri.txt", "--mu", "3", "--nu", "3", "--k", "2", "--out", "tri.json"]));
    // |V| + λ·l·|E| with λ = 2, l = 4.
    assert_eq!(rec["result"]["summary"]["nodes"], 27);
    let inst: Value = serde_json::from_slice(&std::fs::read(dir.path().join("tri.json")).unwrap()).unwrap();
    assert_eq!(inst["n"], 27);
    assert!(dir.path().join("tri.gadget.json").exists());
    // k = 2 < ν = 3 is rejected on load unless the budget is overridden.
    assert_eq!(balance(dir.path(), &["estimate", "tri.json"]).status.code(), Some(2));
    let rec = record(&balance(dir.path(), &["solve", "tri.json", "--algo", "greedy", "--k", "3"]));
    assert_eq!(rec["result"]["chosen"].as_array().unwrap().len(), 3);

    let out = balance(dir.path(), &["reduce", "tri.txt", "--mu", "3", "--nu", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ν ≥ d+1 required"));

    std::fs::write(dir.path().join("bad.txt"), "3 2\n0 1\n1 1\n").unwrap();
    let out = balance(dir.path(), &["reduce", "bad.txt", "--mu", "3", "--nu", "3", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn reduce_four_node_example_has_34_nodes() {
    let dir = setup();
    std::fs::write(dir.path().join("g.txt"), "4 2\n0 1\n1 2\n2 3\n").unwrap();
    let rec = record(&balance(dir.path(), &["reduce", "g.txt", "--mu", "3", "--nu", "3", "--k", "2"]));
    assert_eq!(rec["result"]["summary"]["nodes"], 34);
    assert_eq!(rec["result"]["summary"]["arcs"], 36);
    assert_eq!(rec["result"]["instance"]["n"], 34);
}

#[test]
fn oracle_examples() {
    let dir = setup();
    let rec = record(&balance(dir.path(), &["oracle", "star.json", "--table", "t.csv"]));
    assert_eq!(rec["result"]["value"], 3.0);
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + rec["result"]["rows"].as_u64().unwrap() as usize);
    assert!(csv.starts_with("size,solution,value\n0,\"\",2\n"));

    let rec = record(&balance(dir.path(), &["oracle", "star.json", "--k", "0"]));
    assert_eq!(rec["result"]["value"], 2.0);
    assert_eq!(rec["result"]["optimum"], Value::Array(vec![]));

    assert_eq!(balance(dir.path(), &["oracle", "star.json", "--ceiling", "5"]).status.code(), Some(3));
}

#[test]
fn corpus_is_reproducible() {
    let dir = setup();
    let args = ["corpus", "--n", "4", "--mu", "2", "--nu", "2", "--k", "2", "--count", "3", "--seed", "4"];
    let a = record(&balance(dir.path(), &args));
    let b = record(&balance(dir.path(), &args));
    assert_eq!(a, b);
    let list = a["result"].as_array().unwrap();
    assert_eq!(list.len(), 3);
    let inst = serde_json::to_vec(&list[0]["instance"]).unwrap();
    assert_eq!(load_instance(&inst).unwrap().n(), 4);
    let bad = ["corpus", "--n", "4", "--mu", "2", "--nu", "3", "--k", "2"];
    assert_eq!(balance(dir.path(), &bad).status.code(), Some(2));
}

#[test]
fn timing_flag_adds_wall_time() {
    let dir = setup();
    let rec = record(&balance(dir.path(), &["estimate", "star.json", "--timing"]));
    assert!(rec["wall_ms"].is_u64());
}
