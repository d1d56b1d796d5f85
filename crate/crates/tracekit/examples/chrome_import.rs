//! Import a Chrome trace-event JSON document (the chrome://tracing and
//! about:tracing format) and run the usual analyses on it. Durations
//! arrive as B/E pairs or complete X events; microseconds are widened
//! to nanoseconds.
//!
//! Run with: cargo run --example chrome_import

use tracekit::profiles::{flat_profile, Metric};
use tracekit::readers::{read_chrome_str, ReadOptions};
use tracekit::report::to_text_string;

const SAMPLE: &str = r#"{
  "traceEvents": [
    {"ph": "M", "name": "process_name", "pid": 12, "args": {"name": "renderer"}},
    {"ph": "B", "name": "frame", "pid": 12, "tid": 1, "ts": 1000.0},
    {"ph": "X", "name": "layout", "pid": 12, "tid": 1, "ts": 1050.0, "dur": 300.0},
    {"ph": "X", "name": "paint", "pid": 12, "tid": 1, "ts": 1400.0, "dur": 500.5},
    {"ph": "i", "name": "vsync", "pid": 12, "tid": 1, "ts": 2000.0, "s": "t"},
    {"ph": "E", "name": "frame", "pid": 12, "tid": 1, "ts": 2100.0},
    {"ph": "B", "name": "frame", "pid": 12, "tid": 2, "ts": 1100.0},
    {"ph": "X", "name": "decode", "pid": 12, "tid": 2, "ts": 1150.0, "dur": 800.0,
     "args": {"codec": "vp9"}},
    {"ph": "E", "name": "frame", "pid": 12, "tid": 2, "ts": 2150.0}
  ],
  "displayTimeUnit": "ms"
}"#;

fn main() -> tracekit::Result<()> {
    let trace = read_chrome_str(SAMPLE, &ReadOptions::strict())?;
    let ev = trace.events();

    println!("events: {}, streams: {}", ev.len(), ev.streams().len());
    for (k, v) in trace.metadata() {
        println!("meta {k} = {v}");
    }

    // Args on X/B events come through as row attributes.
    for i in 0..ev.len() {
        if let Some(codec) = ev.attr(i, "codec") {
            println!("{} decoded with {codec:?}", ev.name(i));
        }
    }

    // From here it is a normal trace.
    let flat = flat_profile(&trace, &Metric::ExcNs)?;
    println!("{}", to_text_string(&flat));
    Ok(())
}
