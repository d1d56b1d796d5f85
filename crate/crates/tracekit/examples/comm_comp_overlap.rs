//! Communication/computation breakdown: how much of each rank's wall
//! time is pure compute, pure communication, overlap of the two, or
//! neither.
//!
//! Run with: cargo run --example comm_comp_overlap

use tracekit::comm::CommPredicate;
use tracekit::model::{EventKind, Trace, TraceBuilder};
use tracekit::report::to_text_string;

/// Rank 0 posts a non-blocking exchange and keeps computing while it is
/// in flight; rank 1 blocks in MPI_Recv with nothing to overlap.
fn overlap_demo() -> Trace {
    let mut b = TraceBuilder::new();

    b.push(0, EventKind::Enter, "main", 0, 0);
    b.push(100, EventKind::Enter, "MPI_Isend", 0, 0);
    b.push(150, EventKind::Leave, "MPI_Isend", 0, 0);
    // The wait overlaps the tail of this compute region.
    b.push(200, EventKind::Enter, "compute", 0, 0);
    b.push(1_200, EventKind::Leave, "compute", 0, 0);
    b.push(1_000, EventKind::Enter, "MPI_Wait", 0, 1);
    b.push(1_400, EventKind::Leave, "MPI_Wait", 0, 1);
    b.push(2_000, EventKind::Leave, "main", 0, 0);

    b.push(0, EventKind::Enter, "main", 1, 0);
    b.push(100, EventKind::Enter, "MPI_Recv", 1, 0);
    b.push(1_300, EventKind::Leave, "MPI_Recv", 1, 0);
    b.push(1_350, EventKind::Enter, "compute", 1, 0);
    b.push(1_950, EventKind::Leave, "compute", 1, 0);
    b.push(2_000, EventKind::Leave, "main", 1, 0);

    b.finish()
}

fn main() -> tracekit::Result<()> {
    let trace = overlap_demo();

    // The default predicate treats MPI_* calls as communication; the
    // four columns partition each rank's observed span exactly.
    let pred = CommPredicate::default();
    let table = trace.comm_comp_breakdown(&pred)?;
    println!("{}", to_text_string(&table));

    for r in 0..2 {
        let label = r.to_string();
        let overlap = table.lookup(&label, "overlap_ns").unwrap().as_i64().unwrap();
        let comm = table.lookup(&label, "comm_ns").unwrap().as_i64().unwrap();
        println!(
            "rank {r}: {overlap} ns of communication hidden, {comm} ns exposed"
        );
    }
    Ok(())
}
