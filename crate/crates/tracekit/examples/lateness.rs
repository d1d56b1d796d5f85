//! Logical steps and lateness: align the k-th operation of every
//! process, then measure how far each process trails the first finisher
//! at each step. Lateness localizes stragglers even when clocks between
//! iterations drift apart.
//!
//! Run with: cargo run --example lateness

use tracekit::comm::{MSG_RECV, MSG_SEND};
use tracekit::model::{AttrValue, EventKind, Trace, TraceBuilder};
use tracekit::report::to_text_string;

fn msg(partner: u32, size: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
    ]
}

/// Three ranks run the same loop; rank 1 hits a slow patch in the middle
/// iterations (think page faults or a noisy neighbour).
fn straggler_run() -> Trace {
    let mut b = TraceBuilder::new();
    for rank in 0..3u32 {
        let r = rank as i64;
        b.push(r, EventKind::Enter, "main", rank, 0);
        let mut t = 100 + r;
        for k in 0..8 {
            let slow = if rank == 1 && (3..6).contains(&k) { 900 } else { 0 };
            b.push(t, EventKind::Enter, "compute", rank, 0);
            b.push(t + 1_000 + slow, EventKind::Leave, "compute", rank, 0);
            b.push_with_attrs(
                t + 1_050 + slow,
                EventKind::Instant,
                MSG_SEND,
                rank,
                0,
                msg((rank + 1) % 3, 2_048),
            );
            // Receives land late enough to follow even the slowest send.
            b.push_with_attrs(
                t + 2_500,
                EventKind::Instant,
                MSG_RECV,
                rank,
                0,
                msg((rank + 2) % 3, 2_048),
            );
            t += 3_000;
        }
        b.push(27_000 + r, EventKind::Leave, "main", rank, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = straggler_run();

    // Steps are assigned per process in operation order; matched
    // receives additionally wait for their send's step, which keeps the
    // numbering aligned across ranks.
    let steps = trace.logical_steps()?;
    println!(
        "assigned {} operations to logical steps",
        steps.op_rows.len()
    );

    let table = trace.lateness()?;
    println!("{}", to_text_string(&table));

    let worst = table.row_label(0);
    let max = table.lookup(worst, "max_lateness_ns").unwrap().as_i64().unwrap();
    let at = table.lookup(worst, "at_step").unwrap().as_i64().unwrap();
    println!("rank {worst} fell {max} ns behind, first at step {at}");
    Ok(())
}
