mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use serde_json::Value;
use tangle_forge::io::{parse_edge_list, tree_from_json, TreeJson};
use tangle_forge::{graph_system, ForbiddenFamily};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tangle-forge"));
    cmd.args(args).env_remove("TANGLE_FORGE_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).expect("JSON output")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_on_k4_reports_one_tangle() {
    let r = run(&["build", "--graph", path(&fixture("k4.edges")), "--family", "blocks:3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = json(&r);
    assert_eq!(report["schema"], "report/v1");
    assert_eq!(report["tangles"].as_array().unwrap().len(), 1);
    assert_eq!(report["tangles"][0]["block"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(report["f_tree"], false);
}

#[test]
fn build_on_p5_reports_an_f_tree() {
    let r = run(&["build", "--graph", path(&fixture("p5.edges")), "--family", "blocks:3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = json(&r);
    assert_eq!(report["f_tree"], true);
    assert!(!report["certificates"].as_array().unwrap().is_empty());
}

#[test]
fn build_on_two_clusters_finds_two_tangles() {
    let r = run(&["build", "--similarity", path(&fixture("six.csv")), "--family", "cluster:3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = json(&r);
    let counts: Vec<usize> = report["per_k"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["tangles"].as_array().unwrap().len())
        .collect();
    assert!(counts.contains(&2), "{counts:?}");
}

#[test]
fn certify_exit_codes() {
    let k4 = run(&["certify", "--graph", path(&fixture("k4.edges")), "--family", "blocks:3"]);
    assert_eq!(k4.code, 0, "{}", k4.stderr);
    assert_eq!(json(&k4)["outcome"], "tangles");
    let p5 = run(&["certify", "--graph", path(&fixture("p5.edges")), "--family", "blocks:3"]);
    assert_eq!(p5.code, 1, "{}", p5.stderr);
    let cert = json(&p5);
    assert_eq!(cert["outcome"], "f-tree");
    assert!(cert["tangles"].as_array().unwrap().is_empty());
    let dot = run(&["certify", "--graph", path(&fixture("p5.edges")), "--family", "blocks:3", "--format", "dot"]);
    assert_eq!(dot.code, 1);
    assert!(dot.stdout.starts_with("digraph"));
    assert!(dot.stdout.contains("forbidden"));
}

#[test]
fn certify_with_the_empty_family_finds_tangles_on_generated_systems() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = common::rng(41);
    for i in 0..12 {
        let sys = common::random_poset(&mut r, 1 + i % 4, false);
        if sys.trivial_elements().next().is_some() {
            continue;
        }
        let file = dir.path().join(format!("sys{i}.json"));
        std::fs::write(&file, tangle_forge::io::to_json_string(&tangle_forge::io::system_to_json(&sys)).unwrap())
            .unwrap();
        let out = run(&["certify", "--system", path(&file)]);
        assert_eq!(out.code, 0, "{}", out.stderr);
    }
}

#[test]
fn validate_names_the_failed_axiom() {
    let r = run(&["validate", "--system", path(&fixture("malformed.json"))]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("antisymmetry"), "{}", r.stderr);
    let ok = run(&["validate", "--system", path(&fixture("nested_pair.json"))]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert_eq!(json(&ok)["valid"], true);
}

#[test]
fn reduce_and_restrict_work_on_build_output() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let k4 = fixture("k4.edges");
    let b = run(&["build", "--graph", path(&k4), "--family", "blocks:3", "--out", path(&report)]);
    assert_eq!(b.code, 0, "{}", b.stderr);

    let r = run(&["reduce", "--graph", path(&k4), "--family", "blocks:3", "--tree", path(&report)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let reduced = json(&r);
    assert_eq!(reduced["schema"], "reduction/v1");

    let full = dir.path().join("full.json");
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    std::fs::write(&full, serde_json::to_string(&value["tree_full"]).unwrap()).unwrap();
    let r = run(&["restrict", "--graph", path(&k4), "--family", "blocks:3", "--tree", path(&full), "--k", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let restricted = json(&r);
    assert_eq!(restricted["schema"], "tree/v1");
    assert_eq!(restricted["system_ref"]["below"], 2.0);
    let missing = run(&["restrict", "--graph", path(&k4), "--family", "blocks:3", "--tree", path(&full)]);
    assert_eq!(missing.code, 2);
}

#[test]
fn emitted_trees_reload_and_pass_the_predicates() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let k4 = fixture("two_k4.edges");
    let b = run(&["build", "--graph", path(&k4), "--family", "blocks:3", "--out", path(&report)]);
    assert_eq!(b.code, 0, "{}", b.stderr);
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let graph = parse_edge_list(&std::fs::read_to_string(&k4).unwrap()).unwrap();
    let sys = Arc::new(graph_system::<f64>(&graph, 3).unwrap());
    let family = ForbiddenFamily::make_blocks(&sys, 3).unwrap();
    for key in ["tree_full", "tree_reduced"] {
        let json: TreeJson<f64> = serde_json::from_value(value[key].clone()).unwrap();
        let tree = tree_from_json(&json, &sys).unwrap();
        assert!(tree.is_structure_tree(&family), "{key}");
        assert!(tree.is_efficient(), "{key}");
        assert!(tree.is_ordered(), "{key}");
        assert_eq!(tree.tangles(&family).unwrap().len(), 2);
    }
    for level in value["per_k"].as_array().unwrap() {
        let json: TreeJson<f64> = serde_json::from_value(level["tree"].clone()).unwrap();
        let tree = tree_from_json(&json, &sys).unwrap();
        let fam = family.restrict_to(tree.system()).unwrap();
        assert!(tree.is_structure_tree(&fam));
        assert!(tree.is_thoroughly_ordered());
    }
}

#[test]
fn oracle_respects_the_budget() {
    let k4 = fixture("k4.edges");
    let ok = run(&["oracle", "--graph", path(&k4), "--family", "blocks:3"]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert_eq!(json(&ok)["tangles"].as_array().unwrap().len(), 1);
    let flag = run(&["oracle", "--graph", path(&k4), "--family", "blocks:3", "--budget", "2"]);
    assert_eq!(flag.code, 3);
    let env = run_env(&["oracle", "--graph", path(&k4), "--family", "blocks:3"], &[("TANGLE_FORGE_BUDGET", "2")]);
    assert_eq!(env.code, 3);
}

#[test]
fn tangles_and_dot_export() {
    let answers = fixture("mindsets.csv");
    let r = run(&["tangles", "--answers", path(&answers), "--family", "cluster:3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let levels = json(&r)["levels"].as_array().unwrap().clone();
    assert_eq!(levels.last().unwrap()["tangles"].as_array().unwrap().len(), 2);
    let dot = run(&["export-dot", "--graph", path(&fixture("two_k4.edges")), "--family", "blocks:3"]);
    assert_eq!(dot.code, 0, "{}", dot.stderr);
    assert!(dot.stdout.contains("palegreen"));
}

#[test]
fn bad_input_exits_two() {
    let missing = run(&["build", "--graph", "/nonexistent/graph.edges", "--family", "blocks:3"]);
    assert_eq!(missing.code, 2);
    let no_k = run(&["build", "--graph", path(&fixture("k4.edges"))]);
    assert_eq!(no_k.code, 2);
    let family = run(&["build", "--graph", path(&fixture("k4.edges")), "--family", "blocks"]);
    assert_eq!(family.code, 2);
    let non_rich = run(&[
        "tangles",
        "--system",
        path(&fixture("nested_pair.json")),
        "--family",
        &format!("explicit:{}", path(&fixture("non_rich_family.json"))),
    ]);
    assert_eq!(non_rich.code, 2);
    assert!(non_rich.stderr.contains("not rich"), "{}", non_rich.stderr);
}
