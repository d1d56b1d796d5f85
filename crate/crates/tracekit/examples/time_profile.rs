//! Time profile: exclusive time per function, split into equal-width
//! bins across the trace, showing how the mix of work shifts over time.
//!
//! Run with: cargo run --example time_profile

use tracekit::model::{EventKind, Trace, TraceBuilder};
use tracekit::profiles::{flat_profile, time_profile, Metric};
use tracekit::report::to_text_string;

/// Two ranks that assemble for the first half of the run and solve for
/// the second, with short exchanges sprinkled throughout.
fn phased_run() -> Trace {
    let mut b = TraceBuilder::new();
    for rank in 0..2 {
        let r = rank as i64;
        b.push(r, EventKind::Enter, "main", rank, 0);
        for k in 0..10 {
            let t = 100 + 1_000 * k + r;
            let name = if k < 5 { "assemble" } else { "solve" };
            b.push(t, EventKind::Enter, name, rank, 0);
            b.push(t + 700, EventKind::Leave, name, rank, 0);
            b.push(t + 750, EventKind::Enter, "exchange", rank, 0);
            b.push(t + 900, EventKind::Leave, "exchange", rank, 0);
        }
        b.push(10_200 + r, EventKind::Leave, "main", rank, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = phased_run();

    // One row per bin (labelled by its start time), one column per
    // function. A call spanning a bin edge is split proportionally.
    let table = time_profile(&trace, 8)?;
    println!("{}", to_text_string(&table));

    // Binning only redistributes time: every column still sums to the
    // function's flat-profile total.
    let flat = flat_profile(&trace, &Metric::ExcNs)?;
    for (c, col) in table.columns().iter().enumerate() {
        let binned = table.column_sum_i64(c).unwrap_or(0);
        let total = flat
            .lookup(&col.label, "exc_ns")
            .and_then(|cell| cell.as_i64())
            .unwrap_or(0);
        println!("{:<10} binned {binned:>6} ns, flat {total:>6} ns", col.label);
        assert_eq!(binned, total);
    }
    Ok(())
}
