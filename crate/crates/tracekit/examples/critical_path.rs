//! Critical path: walk backwards from the last event, hopping along the
//! message that released each blocked stretch, to find the dependency
//! chain that actually bounded the run.
//!
//! Run with: cargo run --example critical_path

use tracekit::comm::{MSG_RECV, MSG_SEND};
use tracekit::diagnostics::PathSegment;
use tracekit::model::{AttrValue, EventKind, Trace, TraceBuilder};
use tracekit::report::to_text_string;

fn msg(partner: u32, size: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
    ]
}

/// A three-stage pipeline: rank 0 produces, rank 1 transforms, rank 2
/// consumes. Each stage starts meaningful work only once its input
/// arrives, so the path must thread through both messages.
fn pipeline() -> Trace {
    let mut b = TraceBuilder::new();

    b.push(0, EventKind::Enter, "produce", 0, 0);
    b.push(4_000, EventKind::Leave, "produce", 0, 0);
    b.push_with_attrs(4_050, EventKind::Instant, MSG_SEND, 0, 0, msg(1, 65_536));
    b.push(4_100, EventKind::Enter, "cleanup", 0, 0);
    b.push(4_500, EventKind::Leave, "cleanup", 0, 0);

    b.push(10, EventKind::Enter, "warmup", 1, 0);
    b.push(900, EventKind::Leave, "warmup", 1, 0);
    b.push_with_attrs(4_250, EventKind::Instant, MSG_RECV, 1, 0, msg(0, 65_536));
    b.push(4_300, EventKind::Enter, "transform", 1, 0);
    b.push(7_300, EventKind::Leave, "transform", 1, 0);
    b.push_with_attrs(7_350, EventKind::Instant, MSG_SEND, 1, 0, msg(2, 65_536));

    b.push(20, EventKind::Enter, "warmup", 2, 0);
    b.push(800, EventKind::Leave, "warmup", 2, 0);
    b.push_with_attrs(7_500, EventKind::Instant, MSG_RECV, 2, 0, msg(1, 65_536));
    b.push(7_550, EventKind::Enter, "consume", 2, 0);
    b.push(9_800, EventKind::Leave, "consume", 2, 0);

    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = pipeline();

    let path = trace.critical_path()?;
    println!(
        "critical path covers {} ns across {} segments{}",
        path.total_ns,
        path.segments.len(),
        if path.truncated { " (truncated)" } else { "" }
    );
    for seg in &path.segments {
        match seg {
            PathSegment::Local { process, start_ts, end_ts, .. } => {
                println!("  on rank {process}: {start_ts} .. {end_ts}");
            }
            PathSegment::MessageHop { from, to, send_ts, recv_ts, .. } => {
                println!("  hop {from} -> {to}: {send_ts} .. {recv_ts}");
            }
        }
    }

    // The same walk as a table, ready for CSV/JSON rendering.
    println!("\n{}", to_text_string(&trace.critical_path_table()?));
    Ok(())
}
