//! Pattern detection: find repeating phases from the gaps between
//! occurrences of a marker event, using a matrix profile over the gap
//! series (with a shortcut when the gaps are exactly periodic).
//!
//! Run with: cargo run --example pattern_detection

use tracekit::model::{EventKind, Trace, TraceBuilder};
use tracekit::patterns::{pattern_detection, PatternOptions};

/// Rank 0 emits an `iteration_start` marker per solver iteration. The
/// first run is perfectly periodic; the second speeds up mid-run, which
/// breaks exact periodicity but keeps a repeating cadence.
fn marked_run(speedup: bool) -> Trace {
    let mut b = TraceBuilder::new();
    b.push(0, EventKind::Enter, "main", 0, 0);
    let mut t = 1_000i64;
    for k in 0..24 {
        b.push(t, EventKind::Instant, "iteration_start", 0, 0);
        b.push(t + 50, EventKind::Enter, "solve", 0, 0);
        b.push(t + 900, EventKind::Leave, "solve", 0, 0);
        let gap = if speedup && k >= 12 { 1_500 } else { 2_000 };
        t += gap;
    }
    b.push(t + 100, EventKind::Leave, "main", 0, 0);
    b.finish()
}

fn report(label: &str, trace: &Trace) -> tracekit::Result<()> {
    let r = pattern_detection(trace, "iteration_start", &PatternOptions::default())?;
    println!(
        "{label}: {} occurrences on rank {}, periodic: {}, {} spans",
        r.occurrence_ts.len(),
        r.process,
        r.periodic,
        r.spans.len()
    );
    for s in r.spans.iter().take(4) {
        println!(
            "  span {} .. {} covering occurrences {}..{}",
            s.start_ts,
            s.end_ts,
            s.start_occurrence,
            s.start_occurrence + s.occurrences
        );
    }
    if r.spans.len() > 4 {
        println!("  ... {} more", r.spans.len() - 4);
    }
    Ok(())
}

fn main() -> tracekit::Result<()> {
    // Constant gaps: every unit stride between markers is a span.
    report("steady", &marked_run(false))?;

    // Varying gaps: the matrix profile picks motifs in the gap series;
    // the window is tunable when the default is too coarse.
    let trace = marked_run(true);
    let opts = PatternOptions { window: Some(4), ..Default::default() };
    let r = pattern_detection(&trace, "iteration_start", &opts)?;
    println!(
        "speedup run: periodic: {}, window {}, threshold {:.3}, {} spans",
        r.periodic,
        r.window,
        r.threshold,
        r.spans.len()
    );
    for s in &r.spans {
        println!("  span {} .. {}", s.start_ts, s.end_ts);
    }
    Ok(())
}
