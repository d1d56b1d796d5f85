//! Multi-run comparison: the same profile metric, side by side across
//! runs, to see which functions scale and which become the bottleneck.
//!
//! Run with: cargo run --example multi_run

use tracekit::model::{EventKind, Trace, TraceBuilder};
use tracekit::profiles::Metric;
use tracekit::query::multi_run_table;
use tracekit::report::to_text_string;

/// A strong-scaling series: total work is fixed, so per-rank compute
/// shrinks with rank count while the reduction grows with log2(p).
fn scaled_run(procs: u32) -> Trace {
    let total_work = 64_000i64;
    let per_rank = total_work / procs as i64;
    let reduce = 300 * (procs as i64).ilog2() as i64 + 200;
    let mut b = TraceBuilder::new();
    for rank in 0..procs {
        let mut t = 100 + rank as i64;
        b.push(t - 100, EventKind::Enter, "main", rank, 0);
        for _ in 0..4 {
            b.push(t, EventKind::Enter, "compute", rank, 0);
            b.push(t + per_rank, EventKind::Leave, "compute", rank, 0);
            b.push(t + per_rank + 50, EventKind::Enter, "MPI_Allreduce", rank, 0);
            b.push(t + per_rank + 50 + reduce, EventKind::Leave, "MPI_Allreduce", rank, 0);
            t += per_rank + reduce + 200;
        }
        b.push(t + 50, EventKind::Leave, "main", rank, 0);
    }
    b.finish()
}

fn main() -> tracekit::Result<()> {
    let runs: Vec<Trace> = [2u32, 4, 8].iter().map(|&p| scaled_run(p)).collect();

    // Default labels are derived from each run's process count.
    let table = multi_run_table(&runs, None, &Metric::ExcNs)?;
    println!("{}", to_text_string(&table));

    // Compute shrinks, the reduction creeps up: classic scaling story.
    let labels: Vec<String> = table.columns().iter().map(|c| c.label.clone()).collect();
    for name in ["compute", "MPI_Allreduce"] {
        print!("{name:<14}");
        for label in &labels {
            let v = table.lookup(name, label).unwrap().as_i64().unwrap();
            print!(" {v:>9}");
        }
        println!();
    }
    Ok(())
}
