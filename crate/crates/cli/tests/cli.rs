use std::path::PathBuf;
use std::process::{Command, Output};

use tracelens_core::{fixtures, slice, SliceMode, SliceResult};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracelens")).args(args).output().unwrap()
}

fn query(cmd: &str, extra: &[&str]) -> Output {
    let (trace, model) = (fixture("example.tsv"), fixture("model.json"));
    let mut args = vec![cmd, "--trace", &trace, "--model", &model];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn table_indices(text: &str) -> Vec<usize> {
    text.lines().skip(1).map_while(|l| l.split_whitespace().next()?.parse().ok()).collect()
}

#[test]
fn basic_slice_table_matches_example() {
    let o = query("slice", &["--event", "37", "--mode", "basic", "--format", "table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(table_indices(&text), [1, 5, 6, 7, 13, 15, 17, 24, 28, 30, 31, 32, 33, 36, 37]);
    assert!(text.starts_with("No.  Proc.  Oper.   Rsrc.  Old State  New State\n1    P3     Start   P1     Unav.      Running\n"));
    assert!(text.contains("15 of 37 events"));
    assert_eq!(text, stdout(&query("slice", &["--event", "37", "--mode", "basic"])));
}

#[test]
fn cause_effect_slice_table_matches_example() {
    let o = query("slice", &["--event", "37", "--mode", "cause-effect"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(table_indices(&stdout(&o)), [1, 7, 13, 33, 36, 37]);
}

#[test]
fn out_of_range_event_exits_3() {
    let o = query("slice", &["--event", "99"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("out of range"));
    assert_eq!(query("deps", &["--event", "0"]).status.code(), Some(3));
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["slice", "--trace", "/nonexistent/t.tsv", "--event", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["slice", "--event", "1"]).status.code(), Some(2));
}

#[test]
fn json_output_parses_back_to_library_result() {
    let (t, m) = (fixtures::example_trace(), fixtures::fixture_model());
    for (flag, mode) in [("basic", SliceMode::Basic), ("cause-effect", SliceMode::CauseEffect)] {
        let o = query("slice", &["--event", "37", "--mode", flag, "--format", "json"]);
        assert_eq!(SliceResult::from_json(&stdout(&o)).unwrap(), slice(&t, &m, 37, mode).unwrap());
    }
}

#[test]
fn dot_output() {
    let text = stdout(&query("slice", &["--event", "37", "--mode", "cause-effect", "--format", "dot"]));
    assert!(text.starts_with("digraph slice {"));
    assert_eq!(text.matches("color=red").count(), 1);
}

#[test]
fn deps_groups_by_kind() {
    let text = stdout(&query("deps", &["--event", "37", "--mode", "basic"]));
    let row = |name: &str| text.lines().find(|l| l.starts_with(name)).unwrap().to_string();
    assert!(row("Change-Of-State").contains("(33,37)"));
    for pair in ["(32,37)", "(31,37)", "(28,37)"] {
        assert!(row("Last-Resource-Use").contains(pair));
    }
    assert!(row("Last-Shared-Resource-Use").contains("(36,37)"));

    let text = stdout(&query("deps", &["--event", "5"]));
    assert_eq!(text.matches("(none)").count(), 4);

    let text = stdout(&query("deps", &["--event", "33"]));
    let lsru = text.lines().find(|l| l.starts_with("Last-Shared-Resource-Use")).unwrap();
    assert!(lsru.ends_with("  (24,33)"), "{lsru}");

    let strict = stdout(&query("deps", &["--event", "33", "--lsru-strict", "--format", "json"]));
    assert!(!strict.contains(r#""kind":"LSRU""#), "{strict}");
}

#[test]
fn validate_exit_codes() {
    let o = query("validate", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 violations\n");

    let dir = tempfile::tempdir().unwrap();
    let corrupted = dir.path().join("bad.tsv");
    let text = fixtures::EXAMPLE_TSV.replace("10\tP1\tRead\tFileA\tOpen\tOpen", "10\tP1\tWrite\tFileA\tOpen\tOpen");
    std::fs::write(&corrupted, text).unwrap();
    let o = run(&["validate", "--trace", corrupted.to_str().unwrap(), "--model", &fixture("model.json")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("event 10: IllegalTransition"), "{out}");
    assert!(out.ends_with("1 violation\n"));

    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let o = run(&["validate", "--trace", empty.to_str().unwrap(), "--model", &fixture("model.json")]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn json_trace_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("example.json");
    std::fs::write(&path, fixtures::example_trace().serialize(tracelens_core::TraceFormat::Json)).unwrap();
    let o = run(&["slice", "--trace", path.to_str().unwrap(), "--model", &fixture("model.json"), "--event", "37"]);
    assert_eq!(table_indices(&stdout(&o)).len(), 15);
}
