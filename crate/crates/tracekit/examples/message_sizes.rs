//! Message-size histogram and traffic over time: how big are the
//! messages, and when does the network actually carry them?
//!
//! Run with: cargo run --example message_sizes

use tracekit::comm::{MSG_RECV, MSG_SEND};
use tracekit::model::{AttrValue, EventKind, Trace, TraceBuilder};
use tracekit::report::svg::render_stacked_bars;
use tracekit::report::to_text_string;

fn msg(partner: u32, size: i64, tag: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
        ("tag".to_owned(), AttrValue::Int(tag)),
    ]
}

/// Two ranks trading bulk data early and a storm of tiny control
/// messages late in the run.
fn mixed_traffic() -> Trace {
    let mut b = TraceBuilder::new();
    b.push(0, EventKind::Enter, "main", 0, 0);
    b.push(1, EventKind::Enter, "main", 1, 0);
    for k in 0..6i64 {
        b.push_with_attrs(100 + 500 * k, EventKind::Instant, MSG_SEND, 0, 0, msg(1, 1 << (14 + k % 3), k));
        b.push_with_attrs(150 + 500 * k, EventKind::Instant, MSG_RECV, 1, 0, msg(0, 1 << (14 + k % 3), k));
    }
    for k in 0..40i64 {
        b.push_with_attrs(4_000 + 50 * k, EventKind::Instant, MSG_SEND, 1, 0, msg(0, 64, 100 + k));
        b.push_with_attrs(4_010 + 50 * k, EventKind::Instant, MSG_RECV, 0, 0, msg(1, 64, 100 + k));
    }
    b.push(6_500, EventKind::Leave, "main", 0, 0);
    b.push(6_501, EventKind::Leave, "main", 1, 0);
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = mixed_traffic();

    // Equal-width size buckets; rows are labelled by the lower bound.
    let hist = trace.message_histogram(8)?;
    println!("{}", to_text_string(&hist));

    // Sends bucketed into equal time bins: the early bins carry nearly
    // all the bytes, the late bins nearly all the messages.
    let over_time = trace.comm_over_time(6)?;
    println!("{}", to_text_string(&over_time));

    let svg = render_stacked_bars(&hist);
    let path = std::env::temp_dir().join("message_histogram.svg");
    std::fs::write(&path, svg)?;
    println!("histogram chart written to {}", path.display());
    Ok(())
}
