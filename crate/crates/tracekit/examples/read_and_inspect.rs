//! Parse a trace from the canonical CSV interchange format and poke at
//! the columnar event table: counts, streams, names, and message pairing.
//!
//! Run with: cargo run --example read_and_inspect

use tracekit::readers::{read_csv_str, ReadOptions};

const SAMPLE: &str = "\
timestamp,event_type,name,process,thread,attributes
0,Enter,main,0,0,
100,Enter,solve,0,0,
150,Instant,MpiSend,0,0,partner=1;size=4096;tag=7
900,Leave,solve,0,0,
1000,Leave,main,0,0,
5,Enter,main,1,0,
200,Enter,solve,1,0,
410,Instant,MpiRecv,1,0,partner=0;size=4096;tag=7
950,Leave,solve,1,0,
1005,Leave,main,1,0,
";

fn main() -> tracekit::Result<()> {
    let trace = read_csv_str(SAMPLE, &ReadOptions::strict())?;
    let ev = trace.events();

    println!("events     : {}", ev.len());
    println!("names      : {}", ev.name_count());
    println!("processes  : {:?}", ev.processes());
    let (lo, hi) = trace.time_span()?;
    println!("time span  : [{lo}, {hi}] ns");
    println!("heap usage : ~{} bytes", ev.approx_heap_bytes());

    // Rows are sorted by (process, thread, timestamp), so each stream is
    // one contiguous slice of the table.
    for s in ev.streams() {
        println!(
            "stream p{} t{} holds rows {}..{}",
            s.process, s.thread, s.start, s.end
        );
    }

    // Attributes live in sparse per-key columns; typed access is direct.
    for i in 0..ev.len() {
        if let Some(size) = ev.attr(i, "size") {
            println!("row {i}: {} {} carries size {size:?}", ev.kind(i), ev.name(i));
        }
    }

    // Message pairing is derived lazily and cached on first use.
    let msgs = trace.messages();
    for r in &msgs.records {
        println!(
            "message {} -> {} ({} bytes, latency {} ns)",
            r.sender,
            r.receiver,
            r.bytes,
            r.recv_ts - r.send_ts
        );
    }
    Ok(())
}
