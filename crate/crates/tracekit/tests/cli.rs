//! End-to-end checks of the command-line interface: exit codes, output
//! formats, prefilter flags, and stdout/stderr wiring. Most cases drive
//! `cli_main` in-process with `-o`; the stream-related ones spawn the
//! real binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use tracekit::cli::cli_main;
use tracekit::comm::{MSG_RECV, MSG_SEND};
use tracekit::model::{AttrValue, EventKind, TraceBuilder};
use tracekit::readers::write_csv;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["tracekit".to_owned()];
    argv.extend(args.iter().map(|s| (*s).to_owned()));
    cli_main(&argv)
}

/// Runs a subcommand with `-o` and returns the written bytes.
fn run_to_file(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = dir.join("out.tmp");
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_owned();
    full.push("-o");
    full.push(&out_str);
    let code = run(&full);
    let body = std::fs::read_to_string(&out).unwrap_or_default();
    let _ = std::fs::remove_file(&out);
    (code, body)
}

fn msg_attrs(partner: u32, size: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
        ("tag".to_owned(), AttrValue::Int(0)),
    ]
}

/// Two ranks, nested calls, one message, periodic markers, one tick.
/// Returns the CSV path and the event count.
fn fixture(dir: &Path) -> (PathBuf, usize) {
    let mut b = TraceBuilder::new();
    b.push(0, EventKind::Enter, "main", 0, 0);
    b.push(10, EventKind::Enter, "setup", 0, 0);
    b.push(50, EventKind::Leave, "setup", 0, 0);
    b.push(60, EventKind::Enter, "solve", 0, 0);
    b.push(100, EventKind::Instant, "iteration_start", 0, 0);
    b.push(140, EventKind::Leave, "solve", 0, 0);
    b.push_with_attrs(150, EventKind::Instant, MSG_SEND, 0, 0, msg_attrs(1, 64));
    b.push(200, EventKind::Instant, "iteration_start", 0, 0);
    b.push(300, EventKind::Instant, "iteration_start", 0, 0);
    b.push(400, EventKind::Instant, "iteration_start", 0, 0);
    b.push(450, EventKind::Leave, "main", 0, 0);
    b.push(5, EventKind::Enter, "main", 1, 0);
    b.push(20, EventKind::Enter, "solve", 1, 0);
    b.push(90, EventKind::Leave, "solve", 1, 0);
    b.push_with_attrs(160, EventKind::Instant, MSG_RECV, 1, 0, msg_attrs(0, 64));
    b.push(170, EventKind::Instant, "tick", 1, 0);
    b.push(500, EventKind::Leave, "main", 1, 0);
    let n = b.len();
    let trace = b.finish();
    let path = dir.join("fixture.csv");
    write_csv(&trace, &path).unwrap();
    (path, n)
}

// ---------------------------------------------------------------------------
// Exit codes
// ---------------------------------------------------------------------------

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let p = path.to_str().unwrap();

    assert_eq!(run(&["no-such-command", p]), 2);
    assert_eq!(run(&["flat-profile"]), 2, "input is required");
    assert_eq!(run(&["flat-profile", "--format", "yaml", p]), 2);
    assert_eq!(run(&["flat-profile", "--format", "svg", p]), 2, "no plot defined");
    assert_eq!(run(&["imbalance", "--format", "svg", p]), 2);
    assert_eq!(run(&["filter", "name == \"solve\"", "--format", "json", p]), 2);
    assert_eq!(run(&["convert", "--format", "svg", p]), 2);
    assert_eq!(run(&["timeline", "--format", "csv", p]), 2);
    assert_eq!(run(&["timeline", "--time-range", "50:50", "--format", "svg", p]), 2);
    assert_eq!(run(&["timeline", "--time-range", "abc", "--format", "svg", p]), 2);
    assert_eq!(run(&["flat-profile", "--processes", "0,x", p]), 2);
    assert_eq!(run(&["flat-profile", "--metric", "bogus", p]), 2);
    assert_eq!(run(&["flat-profile", "--filter", "name ==", p]), 2);
    assert_eq!(run(&["patterns", p]), 2, "--start-event is required");
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["flat-profile", "--help"]), 0);
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["flat-profile", "/no/such/file.csv"]), 1);

    // No messages anywhere: communication analyses report a runtime error.
    let mut b = TraceBuilder::new();
    b.push(0, EventKind::Enter, "main", 0, 0);
    b.push(9, EventKind::Leave, "main", 0, 0);
    let quiet = dir.path().join("quiet.csv");
    write_csv(&b.finish(), &quiet).unwrap();
    assert_eq!(run(&["comm-matrix", quiet.to_str().unwrap()]), 1);

    // A stray Leave is an error under --strict, tolerated without it.
    let broken = dir.path().join("broken.csv");
    std::fs::write(
        &broken,
        "timestamp,event_type,name,process,thread\n\
         0,Enter,main,0,0\n\
         5,Leave,other,0,0\n\
         9,Leave,main,0,0\n",
    )
    .unwrap();
    let b = broken.to_str().unwrap();
    assert_eq!(run(&["flat-profile", "--strict", b]), 1);
    let (code, _) = run_to_file(dir.path(), &["flat-profile", b]);
    assert_eq!(code, 0);
}

// ---------------------------------------------------------------------------
// Output formats
// ---------------------------------------------------------------------------

#[test]
fn flat_profile_csv_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) =
        run_to_file(dir.path(), &["flat-profile", "--format", "csv", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    // main: (450-0) - 120 + (500-5) - 70 = 755; solve: 80 + 70; setup: 40.
    assert_eq!(body, "name,exc_ns\nmain,755\nsolve,150\nsetup,40\n");
}

#[test]
fn flat_profile_text_has_aligned_header() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) = run_to_file(dir.path(), &["flat-profile", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let first = body.lines().next().unwrap();
    assert!(first.starts_with("name"), "header line: {first}");
    assert!(first.contains("exc_ns(ns)"), "header line: {first}");
    assert_eq!(body.lines().count(), 4);
}

#[test]
fn json_output_is_an_array_of_row_objects() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) =
        run_to_file(dir.path(), &["flat-profile", "--format", "json", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["name"], "main");
    assert_eq!(rows[0]["exc_ns"], 755);
}

#[test]
fn svg_outputs_are_svg_documents() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let p = path.to_str().unwrap();
    for args in [
        vec!["comm-matrix", "--format", "svg", p],
        vec!["time-profile", "--bins", "4", "--format", "svg", p],
        vec!["comm-by-process", "--format", "svg", p],
        vec!["message-histogram", "--format", "svg", p],
        vec!["timeline", "--format", "svg", p],
        vec!["timeline", p], // text upgrades to the SVG rendering
    ] {
        let (code, body) = run_to_file(dir.path(), &args);
        assert_eq!(code, 0, "{args:?}");
        assert!(body.starts_with("<?xml"), "{args:?}: {}", &body[..40.min(body.len())]);
        assert!(body.contains("<svg"), "{args:?}");
        assert!(body.trim_end().ends_with("</svg>"), "{args:?}");
    }
}

#[test]
fn convert_reemits_canonical_csv_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let original = std::fs::read_to_string(&path).unwrap();
    let (code, body) = run_to_file(dir.path(), &["convert", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(body, original);
}

// ---------------------------------------------------------------------------
// Prefilter flags
// ---------------------------------------------------------------------------

#[test]
fn filter_flag_restricts_the_profile() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) = run_to_file(
        dir.path(),
        &[
            "flat-profile",
            "--filter",
            "name == \"solve\"",
            "--format",
            "csv",
            path.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(body, "name,exc_ns\nsolve,150\n");
}

#[test]
fn processes_flag_keeps_one_rank() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) = run_to_file(
        dir.path(),
        &[
            "flat-profile",
            "--processes",
            "1",
            "--format",
            "csv",
            path.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(body, "name,exc_ns\nmain,425\nsolve,70\n");
}

#[test]
fn filter_subcommand_writes_a_smaller_trace() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) = run_to_file(
        dir.path(),
        &["filter", "process == 1 && name != \"tick\"", path.to_str().unwrap()],
    );
    assert_eq!(code, 0);
    // Header plus rank 1's events, minus the tick.
    assert_eq!(body.lines().count(), 1 + 5);
    assert!(!body.contains("tick"));
    assert!(body.lines().skip(1).all(|l| l.split(',').nth(3) == Some("1")));
}

// ---------------------------------------------------------------------------
// Tables with fixture-specific content
// ---------------------------------------------------------------------------

#[test]
fn info_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (path, n) = fixture(dir.path());
    let (code, body) = run_to_file(dir.path(), &["info", "--format", "csv", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(body.starts_with("field,value\n"));
    assert!(body.contains(&format!("events,{n}\n")), "{body}");
    assert!(body.contains("processes,2\n"));
    assert!(body.contains("messages_matched,1\n"));
    assert!(body.contains("span_ns,500\n"));
}

#[test]
fn critical_path_table_lists_segments() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) =
        run_to_file(dir.path(), &["critical-path", "--format", "csv", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "segment,kind,where,start_ts,end_ts,duration_ns,events"
    );
    assert!(lines.next().is_some());
}

#[test]
fn multirun_uses_custom_labels() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let p = path.to_str().unwrap();
    let (code, body) = run_to_file(
        dir.path(),
        &["multirun", "--labels", "before,after", "--format", "csv", p, p],
    );
    assert_eq!(code, 0);
    assert!(body.starts_with("name,before,after\n"), "{body}");
}

#[test]
fn patterns_emits_one_row_per_span() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let (code, body) = run_to_file(
        dir.path(),
        &[
            "patterns",
            "--start-event",
            "iteration_start",
            "--format",
            "csv",
            path.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0);
    // Four periodic markers -> three unit spans.
    assert_eq!(body.lines().count(), 1 + 3, "{body}");
}

// ---------------------------------------------------------------------------
// Binary-level stream wiring
// ---------------------------------------------------------------------------

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tracekit"))
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let p = path.to_str().unwrap();

    let out = binary().args(["flat-profile", "--format", "csv", p]).output().unwrap();
    assert!(out.status.success());
    let (_, body) = run_to_file(dir.path(), &["flat-profile", "--format", "csv", p]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), body);
}

#[test]
fn runtime_failures_report_on_stderr() {
    let out = binary().args(["flat-profile", "/no/such/file.csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn patterns_summary_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let out = binary()
        .args(["patterns", "--start-event", "iteration_start", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("occurrences"), "stderr: {err}");
    assert!(String::from_utf8(out.stdout).unwrap().contains("start_ts"));
}

#[test]
fn workers_env_var_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let (path, _) = fixture(dir.path());
    let p = path.to_str().unwrap();
    let with_env = binary()
        .args(["flat-profile", "--format", "csv", p])
        .env("TRACE_WORKERS", "3")
        .output()
        .unwrap();
    assert!(with_env.status.success());
    let default = binary().args(["flat-profile", "--format", "csv", p]).output().unwrap();
    assert_eq!(with_env.stdout, default.stdout);
}
