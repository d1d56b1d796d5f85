//! Communication matrix: who sends to whom, by message count or bytes,
//! plus a heatmap rendering of the same table.
//!
//! Run with: cargo run --example comm_matrix

use tracekit::comm::{CommUnit, MSG_RECV, MSG_SEND};
use tracekit::model::{AttrValue, EventKind, Trace, TraceBuilder};
use tracekit::report::svg::{render_heatmap, Colormap};
use tracekit::report::to_text_string;

fn msg(partner: u32, size: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
    ]
}

/// A 1-d halo exchange over six ranks: each rank trades small faces
/// with both neighbours, and everyone reports to rank 0 now and then.
fn halo_exchange() -> Trace {
    const P: u32 = 6;
    let mut b = TraceBuilder::new();
    for rank in 0..P {
        let r = rank as i64;
        b.push(r, EventKind::Enter, "main", rank, 0);
        for k in 0..4 {
            let t = 100 + 1_000 * k + r;
            let (left, right) = ((rank + P - 1) % P, (rank + 1) % P);
            b.push_with_attrs(t, EventKind::Instant, MSG_SEND, rank, 0, msg(right, 8_192));
            b.push_with_attrs(t + 10, EventKind::Instant, MSG_SEND, rank, 0, msg(left, 8_192));
            b.push_with_attrs(t + 200, EventKind::Instant, MSG_RECV, rank, 0, msg(left, 8_192));
            b.push_with_attrs(t + 210, EventKind::Instant, MSG_RECV, rank, 0, msg(right, 8_192));
            if rank != 0 {
                b.push_with_attrs(t + 400, EventKind::Instant, MSG_SEND, rank, 0, msg(0, 128));
            }
        }
        if rank == 0 {
            for k in 0..4 {
                for src in 1..P {
                    let t = 600 + 1_000 * k + src as i64;
                    b.push_with_attrs(t, EventKind::Instant, MSG_RECV, rank, 0, msg(src, 128));
                }
            }
        }
        b.push(5_000 + r, EventKind::Leave, "main", rank, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = halo_exchange();

    let counts = trace.comm_matrix(CommUnit::Count)?;
    println!("{}", to_text_string(&counts));

    let bytes = trace.comm_matrix(CommUnit::Bytes)?;
    println!("{}", to_text_string(&bytes));

    // Per-rank marginals of the same traffic.
    println!("{}", to_text_string(&trace.comm_by_process(CommUnit::Bytes)?));

    // The byte matrix is heavy-tailed (big halos, tiny reports), so the
    // log colormap keeps the reports visible.
    let svg = render_heatmap(&bytes, Colormap::Log);
    let path = std::env::temp_dir().join("comm_matrix.svg");
    std::fs::write(&path, svg)?;
    println!("heatmap written to {}", path.display());
    Ok(())
}
