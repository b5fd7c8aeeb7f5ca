//! The `namewise` binary end to end: exit codes, files written, pipeline.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;

const BIN: &str = env!("CARGO_BIN_EXE_namewise");
const ECHO: &str = env!("CARGO_BIN_EXE_echo-backend");

fn namewise(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_exits_zero_and_bad_usage_exits_one() {
    assert_eq!(namewise(&["--help"]).status.code(), Some(0));
    assert_eq!(namewise(&["check", "--help"]).status.code(), Some(0));
    assert_eq!(namewise(&[]).status.code(), Some(1));
    assert_eq!(namewise(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(namewise(&["split", "--corpus", "x.jsonl", "--out-dir", "o", "--ratios", "0.5,0.5"]).status.code(), Some(1));
}

#[test]
fn extract_writes_the_sample_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sample.jsonl");
    let o = namewise(&["extract", s(&fixture("sample")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("9 records from 1 project(s)"));
    let records = namewise::corpus::read_corpus(&out).unwrap();
    assert_eq!(records.len(), 9);
    assert!(records.iter().all(|r| r.project == "sample"));
    let first = std::fs::read(&out).unwrap();
    assert!(namewise(&["extract", s(&fixture("sample")), "--out", s(&out)]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn extract_of_missing_root_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("none.jsonl");
    let o = namewise(&["extract", "/nonexistent/root", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn fit_on_single_class_data_fails() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let dataset = dir.path().join("d.jsonl");
    let model = dir.path().join("m.txt");
    assert!(namewise(&["extract", s(&fixture("sample")), "--out", s(&corpus)]).status.success());
    // A dataset holding only the original, consistent names.
    let examples: Vec<_> =
        namewise::corpus::read_corpus(&corpus).unwrap().into_iter().map(namewise::negsample::LabeledExample::consistent).collect();
    namewise::negsample::write_dataset(&dataset, &examples).unwrap();
    let o = namewise(&["fit", "--dataset", s(&dataset), "--out", s(&model)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("single"), "{}", stderr(&o));
    assert!(!model.exists());
}

#[test]
fn check_with_unreadable_root_writes_no_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = namewise(&["check", "/nonexistent/root", "--strategy", "gtc", "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!report.exists());
}

#[test]
fn check_flag_misuse_is_a_usage_error() {
    let root = fixture("sample");
    assert_eq!(namewise(&["check", s(&root)]).status.code(), Some(1), "classification without --model");
    assert_eq!(namewise(&["check", s(&root), "--strategy", "gtc", "--k", "0"]).status.code(), Some(1));
    assert_eq!(namewise(&["check", s(&root), "--strategy", "gtc", "--threshold", "1.5"]).status.code(), Some(1));
    assert_eq!(namewise(&["check", s(&root), "--strategy", "gtc", "--index", "a", "--backend", "b"]).status.code(), Some(1));
}

#[test]
fn full_pipeline_from_sources_to_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (all, split_dir, ds, model, r1, r2, eval_out) =
        (p("all.jsonl"), p("split"), p("ds.jsonl"), p("model.txt"), p("r1.json"), p("r2.json"), p("eval.json"));
    let roots: Vec<String> = E2E_PROJECTS.iter().map(|r| s(&fixture("e2e").join(r)).to_string()).collect();
    let with_roots = |head: &[&str], tail: &[&str]| -> Output {
        let mut args: Vec<&str> = head.to_vec();
        args.extend(roots.iter().map(String::as_str));
        args.extend(tail);
        namewise(&args)
    };

    assert!(with_roots(&["extract"], &["--out", &all]).status.success());

    let o = namewise(&["split", "--corpus", &all, "--ratios", "0.34,0.33,0.33", "--seed", "4", "--out-dir", &split_dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    for part in ["train", "validation", "test"] {
        let path = Path::new(&split_dir).join(format!("{part}.jsonl"));
        assert!(!namewise::corpus::read_corpus(&path).unwrap().is_empty());
    }

    let o = namewise(&["sample", "--corpus", &all, "--ratio", "1", "--seed", "3", "--out", &ds]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = namewise(&["fit", "--dataset", &ds, "--out", &model]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&model).unwrap().starts_with("mccmodel v1\n"));

    let check = |out: &str| with_roots(&["check"], &["--model", &model, "--k", "3", "--format", "machine", "--out", out]);
    let o = check(&r1);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(check(&r2).status.success());
    let bytes = std::fs::read(&r1).unwrap();
    assert_eq!(bytes, std::fs::read(&r2).unwrap());

    let report: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(report["summary"]["methods_checked"], 66);
    assert_eq!(report["strategy"], "classification");
    for f in report["flagged"].as_array().unwrap() {
        assert_eq!(f["candidates"].as_array().unwrap().len(), 3);
    }

    let train = format!("{split_dir}/train.jsonl");
    let o = namewise(&["evaluate", "--corpus", &all, "--index", &train, "--dataset", &ds, "--model", &model, "--out", &eval_out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let eval: serde_json::Value = serde_json::from_slice(&std::fs::read(&eval_out).unwrap()).unwrap();
    assert_eq!(eval["aggregates"]["count"], 66);
    assert_eq!(eval["mcc"]["count"], 132);
}

#[test]
fn evaluate_with_echo_backend_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let dataset = dir.path().join("d.jsonl");
    let out = dir.path().join("eval.json");
    assert!(namewise(&["extract", s(&fixture("sample")), "--out", s(&corpus)]).status.success());
    assert!(namewise(&["sample", "--corpus", s(&corpus), "--out", s(&dataset)]).status.success());
    // Without --model, classification is delegated to the backend.
    let o = namewise(&["evaluate", "--corpus", s(&corpus), "--backend", ECHO, "--dataset", s(&dataset), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let eval: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(eval["aggregates"]["exact_match"], 1.0);
    assert_eq!(eval["aggregates"]["f1"], 1.0);
    assert_eq!(eval["mcc"]["accuracy"], 1.0);
}

#[test]
fn evaluate_with_failing_backend_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    assert!(namewise(&["extract", s(&fixture("sample")), "--out", s(&corpus)]).status.success());
    let backend = format!("{} --mode malformed", env!("CARGO_BIN_EXE_fault-backend"));
    let o = namewise(&["evaluate", "--corpus", s(&corpus), "--backend", &backend]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not JSON"), "{}", stderr(&o));
}

#[test]
fn quality_scores_identifiers() {
    let o = namewise(&["quality", "getSystemProperties", "x1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("getSystemProperties\t10\t"));
    assert!(!lines.next().unwrap().starts_with("x1\t10"));
    assert_eq!(namewise(&["quality"]).status.code(), Some(1));
}
