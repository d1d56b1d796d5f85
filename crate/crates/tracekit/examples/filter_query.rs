//! Trace filtering: a small expression language over name, process,
//! thread, timestamp, kind, and attributes, producing a new trace that
//! downstream analyses consume unchanged.
//!
//! Run with: cargo run --example filter_query

use tracekit::comm::{MSG_RECV, MSG_SEND};
use tracekit::model::{AttrValue, EventKind, Trace, TraceBuilder};
use tracekit::profiles::{flat_profile, Metric};
use tracekit::query::{filter_str, FilterOptions};
use tracekit::report::to_text_string;

fn sized(partner: u32, size: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
    ]
}

fn mixed_workload() -> Trace {
    let mut b = TraceBuilder::new();
    for rank in 0..4u32 {
        let r = rank as i64;
        b.push(r, EventKind::Enter, "main", rank, 0);
        for k in 0..6 {
            let t = 100 + 1_000 * k + r;
            b.push(t, EventKind::Enter, "mpi_halo", rank, 0);
            b.push_with_attrs(t + 20, EventKind::Instant, MSG_SEND, rank, 0, sized((rank + 1) % 4, 512 << k));
            b.push(t + 200, EventKind::Leave, "mpi_halo", rank, 0);
            b.push_with_attrs(t + 280, EventKind::Instant, MSG_RECV, rank, 0, sized((rank + 3) % 4, 512 << k));
            b.push(t + 300, EventKind::Enter, "smooth", rank, 0);
            b.push(t + 900, EventKind::Leave, "smooth", rank, 0);
        }
        b.push(6_200 + r, EventKind::Leave, "main", rank, 0);
    }
    b.finish()
}

fn show(label: &str, trace: &Trace) {
    println!("{label}: {} events", trace.events().len());
}

fn main() -> tracekit::Result<()> {
    let trace = mixed_workload();
    let opts = FilterOptions::default();
    show("full trace", &trace);

    // Keep two ranks. Enter/Leave pairs survive together by default.
    show("process in (0, 2)", &filter_str(&trace, "process in (0, 2)", &opts)?);

    // Name matching: exact equality, or globs via `matches`.
    show(
        "name matches \"mpi_*\"",
        &filter_str(&trace, "name matches \"mpi_*\"", &opts)?,
    );

    // Attributes compare numerically when both sides are numeric.
    show(
        "attr:size >= 4096",
        &filter_str(&trace, "attr:size >= 4096", &opts)?,
    );

    // Boolean operators and a half-open time window.
    let busy = filter_str(
        &trace,
        "(name == \"smooth\" || name == \"mpi_halo\") && time between 0 and 3000",
        &opts,
    )?;
    show("early kernels", &busy);

    // The filtered trace is a first-class trace: profile it directly.
    let flat = flat_profile(&busy, &Metric::ExcNs)?;
    println!("{}", to_text_string(&flat));
    Ok(())
}
