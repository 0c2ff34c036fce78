use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pgmkit::{fixtures, io, Network};
use serde_json::Value;
use tempfile::TempDir;

fn pgmkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgmkit")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_net(dir: &TempDir, name: &str, net: &Network) -> String {
    let p = dir.path().join(name);
    fs::write(&p, io::write_bif(net)).unwrap();
    s(&p)
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn file(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn infer_two_node_ve_and_jt() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "ab.bif", &fixtures::two_node());
    let run = |engine: &str| {
        stdout_json(&pgmkit(&["infer", "--model", &model, "--engine", engine, "--evidence", "B=true", "--query", "A"]))
    };
    let ve = run("ve");
    let a = &ve["marginals"]["A"];
    assert!((a["false"].as_f64().unwrap() - 0.3415).abs() < 1e-4);
    assert!((a["true"].as_f64().unwrap() - 0.6585).abs() < 1e-4);
    let jt = run("jt");
    for state in ["false", "true"] {
        let (x, y) = (a[state].as_f64().unwrap(), jt["marginals"]["A"][state].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn infer_errors() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "det.bif", &fixtures::deterministic_pair());
    for engine in ["ve", "jt", "lbp"] {
        let out = pgmkit(&["infer", "--model", &model, "--engine", engine, "--evidence", "A=false,B=true"]);
        assert_eq!(out.status.code(), Some(1), "{engine}");
        assert!(stderr(&out).contains("impossible evidence"), "{engine}: {}", stderr(&out));
    }

    let out = pgmkit(&["infer", "--model", &model, "--engine", "jt", "--evidence", "B=maybe"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("valid states: false, true"), "{}", stderr(&out));

    let out = pgmkit(&["infer", "--model", &model, "--engine", "magic"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sampler_output_ignores_worker_count() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "asia.bif", &fixtures::asia_like());
    let run = |w: &str| {
        pgmkit(&["infer", "--model", &model, "--engine", "ais", "--evidence", "Xray=true", "--n", "20000", "--seed", "3", "--workers", w])
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("4").stdout);
}

#[test]
fn learn_structure_on_chain() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "chain.bif", &fixtures::chain());
    let data = s(&file(&dir, "chain.csv"));
    stdout_json(&pgmkit(&["generate", "--model", &model, "--n", "10000", "--seed", "0", "--out", &data]));
    let prefix = s(&file(&dir, "learned"));
    let summary = stdout_json(&pgmkit(&["learn-structure", "--data", &data, "--out", &prefix]));
    assert_eq!(summary["edges"], 2);
    assert!(summary["ci_tests"].as_u64().unwrap() > 0);
    let cpdag: Value = serde_json::from_str(&fs::read_to_string(format!("{prefix}.cpdag.json")).unwrap()).unwrap();
    assert_eq!(cpdag["edges"].as_array().unwrap().len(), 2);
    assert!(Path::new(&format!("{prefix}.dag.bif-structure.json")).exists());

    let cpdag_path = format!("{prefix}.cpdag.json");
    let shd = stdout_json(&pgmkit(&["eval", "shd", "--learned", &cpdag_path, "--truth", &model]));
    assert_eq!(shd, serde_json::json!({"shd": 0}));
}

#[test]
fn learn_structure_usage_errors() {
    let out = pgmkit(&["learn-structure", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"));

    let dir = TempDir::new().unwrap();
    let data = file(&dir, "d.csv");
    fs::write(&data, "a,b\n0,1\n1,0\n").unwrap();
    let out = pgmkit(&["learn-structure", "--data", &s(&data), "--alpha", "1.5", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpha must be in (0,1)"));
}

#[test]
fn generate_then_fit_recovers_cpts() {
    let dir = TempDir::new().unwrap();
    let truth = fixtures::two_node();
    let model = write_net(&dir, "ab.bif", &truth);
    let data = s(&file(&dir, "ab.csv"));
    stdout_json(&pgmkit(&["generate", "--model", &model, "--n", "1000000", "--seed", "0", "--out", &data]));
    let fitted = s(&file(&dir, "fitted.bif"));
    stdout_json(&pgmkit(&["learn-params", "--data", &data, "--structure", &model, "--out", &fitted]));
    let net = io::parse_bif(&fs::read_to_string(&fitted).unwrap()).unwrap();
    for v in 0..truth.n() {
        for (a, b) in net.cpt_rows(v).iter().zip(truth.cpt_rows(v)) {
            assert!((a - b).abs() <= 0.01, "{a} vs {b}");
        }
    }
}

#[test]
fn learn_params_errors() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "ab.bif", &fixtures::two_node());
    let data = file(&dir, "d.csv");
    fs::write(&data, "A,C\nfalse,x\ntrue,y\n").unwrap();
    let out_path = s(&file(&dir, "o.bif"));
    let out = pgmkit(&["learn-params", "--data", &s(&data), "--structure", &model, "--pseudocount", "-1", "--out", &out_path]);
    assert_eq!(out.status.code(), Some(2));

    let out = pgmkit(&["learn-params", "--data", &s(&data), "--structure", &model, "--out", &out_path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains('B'), "{}", stderr(&out));
}

#[test]
fn generate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "asia.bif", &fixtures::asia_like());
    let (a, b) = (s(&file(&dir, "a.csv")), s(&file(&dir, "b.csv")));
    stdout_json(&pgmkit(&["generate", "--model", &model, "--n", "5000", "--seed", "11", "--out", &a, "--workers", "1"]));
    stdout_json(&pgmkit(&["generate", "--model", &model, "--n", "5000", "--seed", "11", "--out", &b, "--workers", "3"]));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn eval_shd_on_identical_files() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "asia.bif", &fixtures::asia_like());
    let out = pgmkit(&["eval", "shd", "--learned", &model, "--truth", &model]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), r#"{"shd":0}"#);
}

#[test]
fn eval_hellinger_between_engines() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "ab.bif", &fixtures::two_node());
    let a = file(&dir, "a.json");
    let b = file(&dir, "b.json");
    fs::write(&a, pgmkit(&["infer", "--model", &model, "--engine", "ve"]).stdout).unwrap();
    fs::write(&b, pgmkit(&["infer", "--model", &model, "--engine", "jt"]).stdout).unwrap();
    let h = stdout_json(&pgmkit(&["eval", "hellinger", "--a", &s(&a), "--b", &s(&b)]));
    assert!(h["hellinger"].as_f64().unwrap() < 1e-7);
}

#[test]
fn convert_round_trips() {
    let dir = TempDir::new().unwrap();
    let net = fixtures::asia_like();
    let model = write_net(&dir, "asia.bif", &net);
    let json = s(&file(&dir, "asia.json"));
    let back = s(&file(&dir, "back.bif"));
    let dot = s(&file(&dir, "asia.dot"));
    stdout_json(&pgmkit(&["convert", "--in", &model, "--to", "json", "--out", &json]));
    stdout_json(&pgmkit(&["convert", "--in", &json, "--to", "bif", "--out", &back]));
    stdout_json(&pgmkit(&["convert", "--in", &model, "--to", "dot", "--out", &dot]));
    assert_eq!(io::parse_bif(&fs::read_to_string(&back).unwrap()).unwrap(), net);
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn classify_jt_matches_ve() {
    let dir = TempDir::new().unwrap();
    let model = write_net(&dir, "asia.bif", &fixtures::asia_like());
    let data = s(&file(&dir, "asia.csv"));
    stdout_json(&pgmkit(&["generate", "--model", &model, "--n", "500", "--seed", "2", "--out", &data]));
    let run = |engine: &str| {
        stdout_json(&pgmkit(&["classify", "--model", &model, "--data", &data, "--class-var", "Lung", "--engine", engine]))
    };
    let (jt, ve) = (run("jt"), run("ve"));
    assert_eq!(jt["accuracy"], ve["accuracy"]);
    assert!(jt["accuracy"].as_f64().unwrap() >= jt["majority_baseline"].as_f64().unwrap());
}
