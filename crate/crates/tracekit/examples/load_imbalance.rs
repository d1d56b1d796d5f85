//! Load imbalance: per-function spread of a metric across processes.
//! The imbalance factor is max/mean; 1.0 is perfectly balanced, and the
//! gap to 1.0 is roughly the fraction of parallel efficiency lost.
//!
//! Run with: cargo run --example load_imbalance

use tracekit::model::{EventKind, Trace, TraceBuilder};
use tracekit::profiles::Metric;
use tracekit::report::to_text_string;

/// A domain decomposition gone wrong: rank 3 owns a refined region and
/// spends three times longer in the kernel than everyone else.
fn skewed_run() -> Trace {
    let mut b = TraceBuilder::new();
    for rank in 0..4u32 {
        let r = rank as i64;
        let kernel = if rank == 3 { 3_000 } else { 1_000 };
        b.push(r, EventKind::Enter, "main", rank, 0);
        for k in 0..5 {
            let t = 100 + 4_000 * k + r;
            b.push(t, EventKind::Enter, "kernel", rank, 0);
            b.push(t + kernel, EventKind::Leave, "kernel", rank, 0);
            b.push(t + 3_200, EventKind::Enter, "reduce", rank, 0);
            b.push(t + 3_500, EventKind::Leave, "reduce", rank, 0);
        }
        b.push(20_100 + r, EventKind::Leave, "main", rank, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = skewed_run();

    // Rows are sorted by total, biggest time sink first; the imbalance
    // column tells you which of those sinks is actually skewed.
    let table = trace.load_imbalance(&Metric::ExcNs)?;
    println!("{}", to_text_string(&table));

    let factor = table.lookup("kernel", "imbalance").unwrap().as_f64().unwrap();
    let top = table.lookup("kernel", "top_process").unwrap().as_i64().unwrap();
    println!(
        "`kernel` runs {factor:.2}x its mean on rank {top}; \
         evening it out would shave ~{:.0}% off the kernel phase",
        (1.0 - 1.0 / factor) * 100.0
    );
    Ok(())
}
