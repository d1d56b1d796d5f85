//! Timeline rendering: one band per stream, nested call bars stacked by
//! depth, instants as diamonds, message arrows between streams, and an
//! optional critical-path overlay — all as a static SVG.
//!
//! Run with: cargo run --example timeline_svg

use tracekit::comm::{MSG_RECV, MSG_SEND};
use tracekit::model::{AttrValue, EventKind, Trace, TraceBuilder};
use tracekit::patterns::{pattern_detection, PatternOptions};
use tracekit::report::svg::{render_timeline, TimelineOptions};

fn msg(partner: u32, size: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
    ]
}

/// Two ranks ping-ponging between compute phases, with an iteration
/// marker so pattern spans have something to shade.
fn ping_pong() -> Trace {
    let mut b = TraceBuilder::new();
    for rank in 0..2u32 {
        let r = rank as i64;
        b.push(r, EventKind::Enter, "main", rank, 0);
        for k in 0..5 {
            let t = 200 + 2_000 * k + r;
            b.push(t, EventKind::Instant, "iteration_start", rank, 0);
            b.push(t + 20, EventKind::Enter, "compute", rank, 0);
            b.push(t + 1_200, EventKind::Leave, "compute", rank, 0);
            if rank == 0 {
                b.push_with_attrs(t + 1_250, EventKind::Instant, MSG_SEND, 0, 0, msg(1, 4_096));
                b.push_with_attrs(t + 1_700, EventKind::Instant, MSG_RECV, 0, 0, msg(1, 64));
            } else {
                b.push_with_attrs(t + 1_400, EventKind::Instant, MSG_RECV, 1, 0, msg(0, 4_096));
                b.push(t + 1_450, EventKind::Enter, "reduce", rank, 0);
                b.push(t + 1_600, EventKind::Leave, "reduce", rank, 0);
                b.push_with_attrs(t + 1_650, EventKind::Instant, MSG_SEND, 1, 0, msg(0, 64));
            }
        }
        b.push(10_500 + r, EventKind::Leave, "main", rank, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = ping_pong();

    // Shade the detected iteration spans behind the bars.
    let found = pattern_detection(&trace, "iteration_start", &PatternOptions::default())?;
    let spans: Vec<(i64, i64)> = found.spans.iter().map(|s| (s.start_ts, s.end_ts)).collect();

    let opts = TimelineOptions {
        show_messages: true,
        critical_path: true,
        spans,
        ..Default::default()
    };
    let svg = render_timeline(&trace, &opts)?;
    let path = std::env::temp_dir().join("timeline.svg");
    std::fs::write(&path, &svg)?;
    println!("timeline written to {} ({} bytes)", path.display(), svg.len());

    // Zooming is just a time range.
    let zoom = TimelineOptions {
        time_range: Some((200, 2_200)),
        ..Default::default()
    };
    let first_iter = render_timeline(&trace, &zoom)?;
    let zoom_path = std::env::temp_dir().join("timeline_first_iteration.svg");
    std::fs::write(&zoom_path, &first_iter)?;
    println!("first iteration written to {}", zoom_path.display());
    Ok(())
}
