mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use fetree::classic::{self, TypedTree};
use fetree::free_energy::TrajectoryUtilities;
use fetree::DecisionTree;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn fetree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fetree"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_depth_one_max() {
    let doc = json(&fetree(&["solve", &fixture("depth1_max.json")]));
    assert_eq!(doc["root_value"], 1.0);
    let root = &doc["nodes"][0];
    assert_eq!(root["value"], 1.0);
    assert_eq!(root["policy"][1]["p"], 1.0);
}

#[test]
fn solve_expectiminimax_fixture() {
    let typed = TypedTree::from_json(include_str!("fixtures/layered_typed.json")).unwrap();
    let expected = classic::expectiminimax(&typed).unwrap();
    let doc = json(&fetree(&["solve", &fixture("layered.json")]));
    assert_eq!(doc["root_value"].as_f64().unwrap(), expected);
}

#[test]
fn solve_csv_has_one_row_per_edge() {
    let out = fetree(&[
        "--format",
        "csv",
        "solve",
        &fixture("two_step_uniform.json"),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "node,depth,beta,value,log_partition,label,child,policy"
    );
    // 3 internal nodes with 2 edges each, 4 leaves with one row each
    assert_eq!(lines.count(), 10);
}

#[test]
fn malformed_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ \"horizon\": 1, ").unwrap();
    let out = fetree(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value =
        serde_json::from_slice(out.stderr.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(err["error"], "parse");

    let out = fetree(&["solve", "/nonexistent/tree.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_tree_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"horizon":1,"root":"s","nodes":{"s":{"beta":1,"edges":[
            {"label":"a","q":0.5,"r":0,"child":"x"},
            {"label":"b","q":0.6,"r":0,"child":"y"}]},
            "x":{"leaf_value":0},"y":{"leaf_value":0}}}"#,
    )
    .unwrap();
    let out = fetree(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transform_output_solves_to_same_policy() {
    let dir = tempfile::tempdir().unwrap();
    let transformed = dir.path().join("t.json");
    let out = fetree(&[
        "--out",
        transformed.to_str().unwrap(),
        "transform",
        &fixture("two_step_uniform.json"),
        "--alpha",
        "1",
        "--betas",
        &fixture("two_step_betas.json"),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());

    let tree = DecisionTree::from_json(include_str!("fixtures/two_step_uniform.json")).unwrap();
    let u = TrajectoryUtilities::from_rewards(&tree);
    let oracle = common::global_boltzmann(&tree, &u, 1.0);
    let w = common::global_log_partition_value(&tree, &u, 1.0);

    let re = DecisionTree::from_json(&std::fs::read_to_string(&transformed).unwrap()).unwrap();
    assert_eq!(re.node(re.find("0").unwrap()).beta.as_f64(), 3.0);
    let doc = json(&fetree(&["solve", transformed.to_str().unwrap()]));
    assert!((doc["root_value"].as_f64().unwrap() - w).abs() < 1e-10);

    let result = fetree::solver::solve(&re);
    let chained: Vec<f64> = fetree::solver::equilibrium_trajectory_distribution(&re, &result)
        .unwrap()
        .iter()
        .map(|t| t.probability)
        .collect();
    assert!(common::total_variation(&chained, &oracle) < 1e-10);
}

#[test]
fn transform_rejects_zero_target() {
    let out = fetree(&[
        "transform",
        &fixture("two_step_uniform.json"),
        "--alpha",
        "1",
        "--betas",
        &fixture("two_step_betas_zero.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn limits_check_passes() {
    let doc = json(&fetree(&["limits-check", "--num-trees", "50"]));
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["rules"].as_array().unwrap().len(), 5);
    let out = fetree(&["limits-check", "--num-trees", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_bound_sweep() {
    let out = fetree(&[
        "sample-bound",
        &fixture("uniform3_model.json"),
        "--trials",
        "0",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 65);
    assert!(rows[0].starts_with("alpha,sup_gap,delta,xi,stated_bound,bound_satisfied"));
    let last: Vec<&str> = rows[64].split(',').collect();
    assert_eq!(last[0], "64");
    assert!(last[1].parse::<f64>().unwrap() < 1e-6);
    assert_eq!(*last.last().unwrap(), "");

    let doc = json(&fetree(&[
        "--format",
        "json",
        "sample-bound",
        &fixture("uniform3_model.json"),
        "--alpha-max",
        "4",
        "--trials",
        "2000",
    ]));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0]["mc_total_variation"].as_f64().unwrap() < 0.1);
}

#[test]
fn reruns_are_byte_identical() {
    let runs: [&[&str]; 3] = [
        &["solve", &fixture("layered.json")],
        &["limits-check", "--num-trees", "20", "--seed", "7"],
        &[
            "sample-bound",
            &fixture("uniform3_model.json"),
            "--alpha-max",
            "8",
            "--trials",
            "3000",
        ],
    ];
    for args in runs {
        let a = fetree(args);
        let b = fetree(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
