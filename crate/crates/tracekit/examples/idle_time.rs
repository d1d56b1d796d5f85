//! Idle time: how long each process sits in waiting calls, found by a
//! configurable name predicate rather than a fixed runtime vocabulary.
//!
//! Run with: cargo run --example idle_time

use tracekit::diagnostics::IdlePredicate;
use tracekit::model::{EventKind, Trace, TraceBuilder};
use tracekit::report::to_text_string;

/// A fork/join pool where worker 2 finishes early each round and parks
/// in `pool_idle` until the next batch of tasks arrives.
fn pool_run() -> Trace {
    let mut b = TraceBuilder::new();
    for worker in 0..3u32 {
        let w = worker as i64;
        b.push(w, EventKind::Enter, "worker_loop", worker, 0);
        for round in 0..4 {
            let t = 100 + 2_000 * round + w;
            let work = if worker == 2 { 600 } else { 1_700 };
            b.push(t, EventKind::Enter, "run_task", worker, 0);
            b.push(t + work, EventKind::Leave, "run_task", worker, 0);
            b.push(t + work + 10, EventKind::Enter, "pool_idle", worker, 0);
            b.push(t + 1_900, EventKind::Leave, "pool_idle", worker, 0);
        }
        b.push(8_200 + w, EventKind::Leave, "worker_loop", worker, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = pool_run();

    // The default predicate looks for "idle" and "wait" substrings,
    // case-insensitively; nested idle calls are not double-counted.
    let table = trace.idle_time(&IdlePredicate::default())?;
    println!("{}", to_text_string(&table));

    // The idlest process sorts first.
    let idlest = table.row_label(0);
    let frac = table.lookup(idlest, "idle_frac").unwrap().as_f64().unwrap();
    println!("worker {idlest} idles {:.0}% of its span", frac * 100.0);

    // Custom vocabularies slot in the same way.
    let custom = IdlePredicate { substrings: vec!["pool_".to_owned()] };
    let by_pool = trace.idle_time(&custom)?;
    let total: i64 = (0..by_pool.n_rows())
        .map(|r| by_pool.cell(r, 0).as_i64().unwrap_or(0))
        .sum();
    println!("time attributed to the pool itself: {total} ns");
    Ok(())
}
