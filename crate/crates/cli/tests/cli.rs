use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn bireach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bireach")).args(args).output().expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn decide_reports_not_bireachable_with_exit_one() {
    let out = bireach(&["decide", "--net", path_arg(&corpus("fig1.petri"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("NOT_BIREACHABLE"));
}

#[test]
fn decide_json_is_deterministic() {
    let args = ["--json", "decide", "--net", path_arg(&corpus("fig1.petri"))].map(str::to_string);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let first = bireach(&args);
    let second = bireach(&args);
    assert_eq!(first.stdout, second.stdout);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["kind"], "decide");
    assert_eq!(v["exit_code"], 1);
}

#[test]
fn cover_of_the_relaxed_net_has_four_ideals() {
    let out = bireach(&["--json", "cover", "--net", path_arg(&corpus("vprime.dvass"))]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["Complete"]["ideals"].as_array().map(Vec::len), Some(4));
}

#[test]
fn net_without_transitions_reaches_its_source() {
    let out = bireach(&["decide", "--net", path_arg(&corpus("empty.dvass"))]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn empty_corpus_directory_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = bireach(&["corpus", path_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 agree"));
}

#[test]
fn wrong_annotation_fails_the_corpus_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(corpus("fig1.petri")).unwrap();
    let flipped = text.replace("# expect: NOT_BIREACHABLE", "# expect: BIREACHABLE");
    assert_ne!(text, flipped);
    std::fs::write(dir.path().join("flipped.petri"), flipped).unwrap();
    std::fs::copy(corpus("empty.dvass"), dir.path().join("empty.dvass")).unwrap();
    let out = bireach(&["corpus", path_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("flipped.petri"), "stderr: {stderr}");
    assert!(!stderr.contains("empty.dvass"), "stderr: {stderr}");
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.dvass");
    std::fs::write(&path, "dvass broken\nlocations:\ntrans t: nowhere\n").unwrap();
    let out = bireach(&["decide", "--net", path_arg(&path)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
