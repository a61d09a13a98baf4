use std::io::Write;
use std::process::{Command, Output, Stdio};

fn clclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clclab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn normalize_prints_the_normal_form() {
    let o = clclab(&["normalize", "K T x"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "T");
}

#[test]
fn reduce_prints_each_step() {
    let o = clclab(&["reduce", "S K K F", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3, "{}", out);
    assert!(out.lines().last().unwrap().starts_with("-> F"));
}

#[test]
fn true_and_false_are_not_equal() {
    let o = clclab(&["--json", "eq", "T", "F"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "no");
}

#[test]
fn eq_finds_a_join() {
    let o = clclab(&["--system", "CLC0", "eq", "K F T", "C F T F"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "yes");
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(clclab(&["normalize", "K (T"]).status.code(), Some(2));
    assert_eq!(clclab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(clclab(&["suite", "nope"]).status.code(), Some(2));
    assert_eq!(clclab(&["--fuel-steps", "0", "normalize", "T"]).status.code(), Some(2));
}

#[test]
fn graph_emits_dot() {
    let o = clclab(&["graph", "K1 (C1 T1 x y) z"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("digraph"), "{}", out);
    assert!(out.contains("->"));
}

#[test]
fn check_standard_reports_all_three() {
    let o = clclab(&["--json", "check-standard", "K1 F1 x"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["standard"], true);
    assert_eq!(v["leads_to_F1"], true);
}

#[test]
fn small_suite_passes() {
    let o = clclab(&["suite", "sn", "--cases", "20", "--size", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("sn-measure"));
}

#[test]
fn extract_to_f_reads_a_conversion_from_stdin() {
    let conv = clclab::harness::gen_convertible_to_f(&clclab::harness::GenConfig::default().with_seed(7));
    let mut child = Command::new(env!("CARGO_BIN_EXE_clclab"))
        .args(["--json", "extract-to-f", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(conv.to_jsonl().as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let tr = clclab::systems::Trace::from_jsonl(&stdout(&o)).unwrap();
    assert_eq!(&tr.start, &conv.start);
    assert_eq!(tr.end(), &clclab::term::Term::parse("F").unwrap());
}
