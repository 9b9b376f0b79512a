use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use edgecolor_core::format::{parse_coloring, parse_graph, parse_log, parse_witnesses};
use edgecolor_core::{greedy_partial_color, oracle, replay};
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn edgecolor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgecolor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn workdir() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    for name in ["petersen.mg", "sh2.mg", "sh3.mg", "k3.mg"] {
        std::fs::copy(data(name), dir.path().join(name)).unwrap();
    }
    let p = dir.path().to_path_buf();
    (dir, p)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn petersen_text_output() {
    let out = edgecolor(&["color", s(&data("petersen.mg"))]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("c ")).count(), 15);
    assert!(text.ends_with("s k_used=4 colors_used=4 reduce_calls=0 witnesses=0 escalations=0\n"));
    let g = parse_graph(&std::fs::read_to_string(data("petersen.mg")).unwrap()).unwrap();
    let colors = parse_coloring(&text, &g).unwrap();
    assert!(oracle::is_proper(&g, &colors, 4));
}

#[test]
fn json_output_matches_golden_file() {
    let out = edgecolor(&["color", s(&data("petersen.mg")), "--format", "json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), std::fs::read_to_string(data("petersen.json")).unwrap());
}

#[test]
fn oracle_matches_golden_file() {
    let out = edgecolor(&["oracle", s(&data("sh2.mg"))]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), std::fs::read_to_string(data("sh2.oracle")).unwrap());
}

#[test]
fn strict_shortfall_writes_a_witness() {
    let (_dir, d) = workdir();
    let output = d.join("sh2.col");
    let out = edgecolor(&["color", s(&d.join("sh2.mg")), "--colors", "5", "--mode", "strict", "-o", s(&output)]);
    assert_eq!(code(&out), 2);
    let g = parse_graph(&std::fs::read_to_string(d.join("sh2.mg")).unwrap()).unwrap();
    let witnesses = parse_witnesses(&std::fs::read_to_string(d.join("sh2.col.witness")).unwrap(), &g).unwrap();
    assert_eq!(witnesses.len(), 1);
    assert_eq!(witnesses[0].vertices, vec![0, 1, 2]);
    assert_eq!(witnesses[0].refuted, 5);
}

#[test]
fn validate_exit_codes() {
    let (_dir, d) = workdir();
    std::fs::write(d.join("good.col"), "c 0 1\nc 1 2\nc 2 3\n").unwrap();
    std::fs::write(d.join("clash.col"), "c 0 1\nc 1 1\nc 2 2\n").unwrap();
    std::fs::write(d.join("partial.col"), "c 0 1\nc 1 2\n").unwrap();
    std::fs::write(d.join("junk.col"), "c zero 1\n").unwrap();
    let k3 = d.join("k3.mg");
    assert_eq!(code(&edgecolor(&["validate", s(&k3), s(&d.join("good.col"))])), 0);
    let clash = edgecolor(&["validate", s(&k3), s(&d.join("clash.col"))]);
    assert_eq!(code(&clash), 1);
    assert!(stdout(&clash).contains("edges 0 and 1"));
    assert_eq!(code(&edgecolor(&["validate", s(&k3), s(&d.join("partial.col"))])), 1);
    assert_eq!(code(&edgecolor(&["validate", s(&k3), s(&d.join("junk.col"))])), 3);
}

#[test]
fn trace_and_log_sidecars() {
    let (_dir, d) = workdir();
    let output = d.join("sh3.col");
    let out = edgecolor(&["color", s(&d.join("sh3.mg")), "--emit-trace", "--emit-log", "--emit-witness", "-o", s(&output)]);
    assert_eq!(code(&out), 0);
    let g = parse_graph(&std::fs::read_to_string(d.join("sh3.mg")).unwrap()).unwrap();
    let colors = parse_coloring(&std::fs::read_to_string(&output).unwrap(), &g).unwrap();
    let log = parse_log(&std::fs::read_to_string(d.join("sh3.col.log")).unwrap()).unwrap();
    let (initial, _) = greedy_partial_color(&g, g.max_degree() + 1);
    assert_eq!(replay(&g, &initial, &log).unwrap().assignment(), &colors[..]);
    let trace = std::fs::read_to_string(d.join("sh3.col.trace")).unwrap();
    assert!(trace.lines().all(|l| l.starts_with("t ") && l.split(' ').count() == 4));
    let witnesses = parse_witnesses(&std::fs::read_to_string(d.join("sh3.col.witness")).unwrap(), &g).unwrap();
    assert!(!witnesses.is_empty());
}

#[test]
fn escalation_bundle_replays() {
    let (_dir, d) = workdir();
    let output = d.join("sh3.col");
    let out = edgecolor(&["color", s(&d.join("sh3.mg")), "--edge-budget", "0", "-o", s(&output)]);
    assert_eq!(code(&out), 4);
    let bundle = d.join("sh3.col.bundle.json");
    let text = std::fs::read_to_string(&bundle).unwrap();
    let replayed = edgecolor(&["replay", s(&bundle)]);
    assert_eq!(code(&replayed), 0);
    assert!(stdout(&replayed).starts_with("r reproduced status=colored\n"));
    assert!(stdout(&replayed).contains("r escalation edge="));

    let truncated = d.join("truncated.json");
    std::fs::write(&truncated, &text[..text.len() / 3]).unwrap();
    assert_eq!(code(&edgecolor(&["replay", s(&truncated)])), 3);
    let tampered = d.join("tampered.json");
    std::fs::write(&tampered, text.replacen("\"seed\": 0", "\"seed\": 9", 1)).unwrap();
    assert_eq!(code(&edgecolor(&["replay", s(&tampered)])), 3);
}

#[test]
fn strict_unresolved_writes_a_bundle() {
    let (_dir, d) = workdir();
    let out = edgecolor(&["color", s(&d.join("sh3.mg")), "--mode", "strict", "--edge-budget", "0"]);
    assert_eq!(code(&out), 4);
    let bundle = d.join("sh3.mg.bundle.json");
    let replayed = edgecolor(&["replay", s(&bundle), "--format", "json"]);
    assert_eq!(code(&replayed), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&replayed)).unwrap();
    assert_eq!(value["status"], "unresolved");
    assert_eq!(value["verdict"], "reproduced");
}

#[test]
fn input_errors() {
    let (_dir, d) = workdir();
    std::fs::write(d.join("bad.mg"), "p multigraph 2 1\ne 0 0\n").unwrap();
    assert_eq!(code(&edgecolor(&["color", s(&d.join("bad.mg"))])), 3);
    assert_eq!(code(&edgecolor(&["color", s(&d.join("missing.mg"))])), 3);
    assert_eq!(code(&edgecolor(&["color", s(&d.join("k3.mg")), "--colors", "0"])), 3);
    assert_eq!(code(&edgecolor(&["color", s(&d.join("k3.mg")), "--mode", "lenient"])), 3);
    assert_eq!(code(&edgecolor(&["color", s(&d.join("petersen.mg")), "--colors", "3", "--mode", "strict"])), 3);
    assert_eq!(code(&edgecolor(&["frobnicate"])), 3);
    assert_eq!(code(&edgecolor(&["--help"])), 0);
}
