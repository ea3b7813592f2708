use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn skein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skein"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, v.to_string()).unwrap();
    p
}

fn resolve(v: &Value) -> Value {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "graph.json", v);
    let o = skein(&["resolve", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn theta() -> Value {
    json!({
        "n": 2,
        "vertices": [{"id": "a", "kind": "source"}, {"id": "b", "kind": "sink"}],
        "edges": [
            {"from": ["a", 1], "to": ["b", 1], "label": "g1"},
            {"from": ["a", 2], "to": ["b", 2], "label": "g2"}
        ]
    })
}

#[test]
fn resolve_trivial_loop_is_dimension() {
    let v = resolve(&json!({"n": 3, "loops": [""]}));
    assert_eq!(v["terms"], json!([{"coeff": "3", "monomial": []}]));
}

#[test]
fn resolve_theta_graph() {
    let v = resolve(&theta());
    assert_eq!(
        v["terms"],
        json!([
            {"coeff": "1", "monomial": [["g1", 1], ["g2", 1]]},
            {"coeff": "-1", "monomial": [["g1 g2", 1]]}
        ])
    );
}

#[test]
fn resolve_relative_edge() {
    let v = resolve(&json!({"n": 2, "relative": {"in_label": "g1"}}));
    assert_eq!(
        v["terms"],
        json!([{"word": "g1", "coeff": [{"coeff": "1", "monomial": []}]}])
    );
}

#[test]
fn resolve_in_prime_field() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "graph.json", &theta());
    let o = skein(&["resolve", p.to_str().unwrap(), "--field", "Fp:101"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["field"], json!({"p": 101}));
    assert_eq!(v["terms"][1]["coeff"], json!("100"));
}

#[test]
fn malformed_graph_names_the_field() {
    let dir = TempDir::new().unwrap();
    let mut g = theta();
    g["edges"][1]["to"] = json!(["b", 7]);
    let p = write(&dir, "graph.json", &g);
    let o = skein(&["resolve", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("$.edges[1].to[1]"), "{}", stderr(&o));

    let p = dir.path().join("broken.json");
    fs::write(&p, "{\"n\": 2,").unwrap();
    assert_eq!(
        skein(&["resolve", p.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn check_cor45_passes() {
    let o = skein(&["check", "cor45", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["counterexamples"], json!([]));
    assert_eq!(v["outcome"], json!("pass"));
}

#[test]
fn check_fricke_klein_in_both_directions() {
    let o = skein(&["check", "fricke-klein", "--n", "2", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0));

    let o = skein(&["check", "fricke-klein", "--n", "3", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let first = &v["counterexamples"][0];
    assert_eq!(first["representation"]["n"], json!(3));
    assert!(first["representation"]["images"]["1"].is_array());

    let o = skein(&[
        "check",
        "fricke-klein",
        "--n",
        "3",
        "--samples",
        "10",
        "--expect-fail",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = skein(&[
        "check",
        "fricke-klein",
        "--n",
        "2",
        "--samples",
        "10",
        "--expect-fail",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_wrong_dimension_controls() {
    let o = skein(&[
        "check",
        "fundamental-F",
        "--n",
        "2",
        "--dim",
        "3",
        "--samples",
        "10",
        "--expect-fail",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = skein(&[
        "check",
        "slide",
        "--samples",
        "20",
        "--non-unimodular",
        "--expect-fail",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unknown_check_is_usage_error() {
    let o = skein(&["check", "no-such-identity"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no-such-identity"));
    assert_eq!(
        skein(&["check", "cor45", "--field", "Fp:100"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(skein(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn necklace_count() {
    let o = skein(&["necklaces", "--k", "2", "--max-len", "7", "--count"]);
    assert_eq!(stdout(&o), "57\n");
    let o = skein(&["necklaces", "--k", "2", "--max-len", "2"]);
    assert_eq!(stdout(&o), "g1\ng2\ng1^2\ng1 g2\ng2^2\n");
}

#[test]
fn fit_reports_validated_expression() {
    let o = skein(&["fit", "--target", "g1 g2 g1 g2", "--degree", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], json!(1));
    let t = &v["targets"][0];
    assert_eq!(t["status"], json!("validated"));
    assert!(t["held_out_per_prime"].as_u64().unwrap() >= 50);
    assert!(v["header"]
        .as_str()
        .unwrap()
        .starts_with("Validated evidence, not proof"));
}

#[test]
fn fit_below_needed_degree_is_reported() {
    let o = skein(&["fit", "--target", "g1 g2 g1 g2", "--degree", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["targets"][0]["status"], json!("no-fit-at-degree"));
    assert_eq!(skein(&["fit", "--target", "g1 h2"]).status.code(), Some(2));
}

#[test]
fn outputs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "graph.json", &theta());
    let runs: Vec<String> = (0..2)
        .map(|_| stdout(&skein(&["eval", g.to_str().unwrap(), "--seed", "7"])))
        .collect();
    assert_eq!(runs[0], runs[1]);
    let v: Value = serde_json::from_str(&runs[0]).unwrap();
    assert_eq!(v["seed"], json!(7));

    let args = [
        "check",
        "oracle-equivalence",
        "--samples",
        "20",
        "--seed",
        "3",
    ];
    assert_eq!(stdout(&skein(&args)), stdout(&skein(&args)));
}

#[test]
fn eval_resolved_polynomial_matches_graph() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "graph.json", &theta());
    let poly = dir.path().join("poly.json");
    let o = skein(&[
        "resolve",
        g.to_str().unwrap(),
        "--out",
        poly.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let on_graph: Value =
        serde_json::from_str(&stdout(&skein(&["eval", g.to_str().unwrap()]))).unwrap();
    let on_poly: Value =
        serde_json::from_str(&stdout(&skein(&["eval", poly.to_str().unwrap()]))).unwrap();
    assert_eq!(on_graph, on_poly);

    let rep = write(
        &dir,
        "rep.json",
        &json!({"n": 2, "field": "Q", "images": {"1": [["1", "1"], ["0", "1"]], "2": [["1", "0"], ["1", "1"]]}}),
    );
    let o = skein(&[
        "eval",
        poly.to_str().unwrap(),
        "--rep",
        rep.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // tr(A)tr(B) − tr(AB) = 2·2 − 3
    assert_eq!(v["value"], json!("1"));

    let bad = write(
        &dir,
        "bad.json",
        &json!({"n": 2, "field": "Q", "images": {"1": [["2", "0"], ["0", "1"]]}}),
    );
    assert_eq!(
        skein(&[
            "eval",
            poly.to_str().unwrap(),
            "--rep",
            bad.to_str().unwrap()
        ])
        .status
        .code(),
        Some(2)
    );
}
