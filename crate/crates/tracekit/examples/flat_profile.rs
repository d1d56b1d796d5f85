//! Flat profile: total exclusive/inclusive time per function name,
//! aggregated over every process and thread.
//!
//! Run with: cargo run --example flat_profile

use tracekit::model::{EventKind, Trace, TraceBuilder};
use tracekit::profiles::{flat_profile, Metric};
use tracekit::report::to_text_string;

/// A toy particle step over four ranks: forces dominate, integration is
/// cheap, and rank-local bookkeeping hides under a wrapper.
fn simulation() -> Trace {
    let mut b = TraceBuilder::new();
    for rank in 0..4 {
        let mut t = 1_000 * rank as i64;
        b.push(t, EventKind::Enter, "step", rank, 0);
        for _ in 0..8 {
            b.push(t + 10, EventKind::Enter, "forces", rank, 0);
            b.push(t + 10 + 480, EventKind::Leave, "forces", rank, 0);
            b.push(t + 500, EventKind::Enter, "integrate", rank, 0);
            b.push(t + 620, EventKind::Leave, "integrate", rank, 0);
            t += 700;
        }
        b.push(t + 50, EventKind::Leave, "step", rank, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = simulation();

    // Exclusive time: each call minus its direct children. The wrapper
    // "step" keeps only the slack between its iterations.
    let exc = flat_profile(&trace, &Metric::ExcNs)?;
    println!("{}", to_text_string(&exc));

    // Inclusive time counts the whole subtree, so wrappers float to the
    // top instead.
    let inc = flat_profile(&trace, &Metric::IncNs)?;
    println!("{}", to_text_string(&inc));

    let top = exc.row_label(0);
    let ns = exc.cell(0, 0).as_i64().unwrap_or(0);
    println!("hottest by exclusive time: {top} ({ns} ns total)");
    Ok(())
}
