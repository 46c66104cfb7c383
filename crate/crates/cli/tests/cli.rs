use monomialize_core::doc;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_monomialize"));
    c.env_remove("MONOMIALIZE_BASIS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("monomialize-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn certificate(problem: &str, out: &PathBuf) {
    let o = run(&["run", &path(problem), "--out", &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn validate_minimal_document() {
    let o = run(&["validate", &path("minimal.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(1,1,1)");
}

#[test]
fn validate_rejects_rank_deficient_c() {
    let o = run(&["validate", &path("rank_deficient.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rank"), "{}", stderr(&o));
}

#[test]
fn validate_rejects_missing_weights() {
    let o = run(&["validate", &path("missing_weights.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("weights"), "{}", stderr(&o));
}

#[test]
fn validate_rejects_dependent_weights() {
    let o = run(&["validate", &path("dependent_weights.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("independent"), "{}", stderr(&o));
}

#[test]
fn run_then_verify() {
    let out = tmp("germ1.cert.json");
    certificate("germ1.json", &out);
    let o = run(&["verify", &path("germ1.json"), &out.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("(1,1,1)"));
}

#[test]
fn certificate_round_trips_byte_for_byte() {
    let out = tmp("germ1.rt.json");
    certificate("germ1.json", &out);
    let text = std::fs::read_to_string(&out).unwrap();
    let cert = doc::certificate_of(&doc::parse_certificate(&text).unwrap()).unwrap();
    assert_eq!(doc::to_json(&doc::certificate_doc(&cert.problem, &cert.entries)), text);
}

#[test]
fn problem_round_trips_byte_for_byte() {
    for name in ["germ1.json", "germ2.json", "minimal.json"] {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let d = doc::parse_problem(&text).unwrap();
        let p = doc::problem_of(&d).unwrap();
        assert_eq!(doc::to_json(&doc::problem_doc(&p, d.options.clone())), text, "{name}");
    }
}

#[test]
fn text_mode_prints_one_line_per_transformation() {
    let o = run(&["run", &path("germ1.json"), "--emit", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines, vec!["1 type 10 (1,1,0)", "2 type 6 (1,1,0)", "3 type 9 (1,1,1)"]);
}

#[test]
fn dot_mode_emits_blowup_tree() {
    let o = run(&["run", &path("germ1.json"), "--emit", "dot"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("digraph"));
    assert!(s.contains("label=\"(1,2)\""));
    assert!(s.contains("label=\"(1,1,1)\""));
    let nodes = s.lines().filter(|l| l.contains("[label=\"(")).filter(|l| !l.contains("->")).count();
    let edges = s.lines().filter(|l| l.contains("->")).count();
    assert_eq!(nodes, edges + 1);
}

#[test]
fn monomial_document_gives_empty_certificate() {
    let o = run(&["run", &path("minimal.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 0);
}

#[test]
fn low_truncation_exits_with_truncation_code() {
    let o = run(&["run", &path("germ1.json"), "--trunc", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn non_quasi_regular_germ_is_refused() {
    let o = run(&["run", &path("germ2.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("quasi-regular"));
}

fn corrupt(src: &PathBuf, dst: &PathBuf, f: impl FnOnce(&mut Value)) {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
    f(&mut v);
    std::fs::write(dst, serde_json::to_string_pretty(&v).unwrap()).unwrap();
}

fn stage_of(o: &Output) -> usize {
    let e = stderr(o);
    let rest = e.split("stage ").nth(1).unwrap_or_else(|| panic!("no stage in {e}"));
    rest.split(':').next().unwrap().trim().parse().unwrap()
}

#[test]
fn corrupted_certificate_fails_at_its_stage() {
    let good = tmp("germ1.good.json");
    certificate("germ1.json", &good);
    let bad = tmp("germ1.bad.json");
    corrupt(&good, &bad, |v| {
        v["entries"][1]["post"]["pair"]["xseries"][0]["terms"][0]["coefficient"][0] = Value::from("2/1");
    });
    let o = run(&["verify", &path("germ1.json"), &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(6));
    assert_eq!(stage_of(&o), 1);
    corrupt(&good, &bad, |v| v["entries"][2]["kind"][2] = Value::from(0));
    let o = run(&["verify", &path("germ1.json"), &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(6));
    assert_eq!(stage_of(&o), 2);
}

#[test]
fn certificate_for_another_problem_fails_at_stage_zero() {
    let good = tmp("germ1.other.json");
    certificate("germ1.json", &good);
    let o = run(&["verify", &path("minimal.json"), &good.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(6));
    assert_eq!(stage_of(&o), 0);
}

#[test]
fn decompose_reports_classes() {
    let o = run(&["decompose", &path("ops.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["algebraic"], Value::Bool(false));
    let classes = v[0]["classes"].as_array().unwrap();
    let terms: usize = classes.iter().map(|c| c["part"]["terms"].as_array().unwrap().len()).sum();
    assert_eq!(terms, 2);
}

#[test]
fn perron_reduces_dependent_weight() {
    let o = run(&["perron", &path("germ1.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["var"], Value::from(2));
    let last = v[0]["values"].as_array().unwrap().last().unwrap().clone();
    let zero = last[0].as_array().unwrap().iter().all(|c| c == "0/1");
    assert!(zero, "{last}");
}

#[test]
fn principalize_uses_option_generators() {
    let o = run(&["principalize", &path("ops.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let gen: Vec<i64> = serde_json::from_value(v["generator"].clone()).unwrap();
    let images: Vec<Vec<i64>> = serde_json::from_value(v["images"].clone()).unwrap();
    for im in images {
        assert!(im.iter().zip(&gen).all(|(a, b)| a >= b));
    }
}

#[test]
fn tschirnhaus_kills_next_to_leading_coefficient() {
    let o = run(&["tschirnhaus", &path("tschirnhaus.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for t in v["transformed"]["terms"].as_array().unwrap() {
        assert_ne!(t["exponent"][1], Value::from("1/1"), "{t}");
    }
}

#[test]
fn basis_override_is_read_from_the_environment() {
    let o = bin().env("MONOMIALIZE_BASIS", "2,4").args(["validate", &path("minimal.json")]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().env("MONOMIALIZE_BASIS", "2,3").args(["validate", &path("minimal.json")]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unreadable_file_is_an_io_error() {
    let o = run(&["validate", "/nonexistent/problem.json"]);
    assert_eq!(o.status.code(), Some(1));
}
