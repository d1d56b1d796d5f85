//! Trace readers and writers.
//!
//! Two input formats are supported: a canonical CSV layout
//! (`timestamp,event_type,name,process[,thread[,attributes]]`, nanosecond
//! timestamps) and the Chrome trace-event JSON format (microsecond
//! timestamps, normalized to nanoseconds on read). Both produce the same
//! sorted columnar [`Trace`], so every analysis is format-agnostic.
//!
//! Readers are lenient by default: malformed rows are skipped and counted
//! in the trace metadata (`skipped_events`). Strict mode turns the first
//! defect into an error.

mod chrome;
mod csv;

pub use self::chrome::read_chrome_str;
pub use self::csv::{read_csv_str, write_csv_string};

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Result, TraceError};
use crate::model::{Trace, TraceBuilder};

/// Reader behavior shared by all formats.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Fail on the first malformed row / unbalanced structure instead of
    /// skipping and counting.
    pub strict: bool,
}

impl ReadOptions {
    pub fn strict() -> Self {
        ReadOptions { strict: true }
    }
}

/// On-disk trace encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Chrome,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Chrome => "chrome",
        }
    }
}

/// Guesses the format of a file from its extension, falling back to
/// sniffing the first non-whitespace byte (`{` or `[` means JSON).
pub fn detect_format(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => return Ok(Format::Csv),
        Some(ext) if ext.eq_ignore_ascii_case("json") => return Ok(Format::Chrome),
        _ => {}
    }
    let bytes = std::fs::read(path)?;
    for &b in &bytes {
        if b.is_ascii_whitespace() {
            continue;
        }
        return Ok(if b == b'{' || b == b'[' {
            Format::Chrome
        } else {
            Format::Csv
        });
    }
    // An empty file reads as an empty CSV trace.
    Ok(Format::Csv)
}

/// Reads a trace in the canonical CSV format.
pub fn read_csv(path: &Path, opts: &ReadOptions) -> Result<Trace> {
    let text = std::fs::read_to_string(path)?;
    let mut trace = self::csv::read_csv_str(&text, opts)?;
    trace.set_metadata("source_path", &path.display().to_string());
    Ok(trace)
}

/// Reads a Chrome trace-event JSON file (array form or `{"traceEvents":
/// [...]}` form).
pub fn read_chrome(path: &Path, opts: &ReadOptions) -> Result<Trace> {
    let text = std::fs::read_to_string(path)?;
    let mut trace = self::chrome::read_chrome_str(&text, opts)?;
    trace.set_metadata("source_path", &path.display().to_string());
    Ok(trace)
}

/// Reads one file, detecting the format unless one is given.
pub fn read_trace(path: &Path, format: Option<Format>, opts: &ReadOptions) -> Result<Trace> {
    let format = match format {
        Some(f) => f,
        None => detect_format(path)?,
    };
    match format {
        Format::Csv => read_csv(path, opts),
        Format::Chrome => read_chrome(path, opts),
    }
}

/// Writes a trace in the canonical CSV layout (always six columns,
/// attributes sorted by key, `\n` line endings). Reading the output back
/// reproduces the event table exactly.
pub fn write_csv(trace: &Trace, path: &Path) -> Result<()> {
    std::fs::write(path, self::csv::write_csv_string(trace))?;
    Ok(())
}

/// Reads several single-process (or disjoint-process) trace files
/// concurrently and merges them into one trace.
///
/// `workers` threads (at least 1) pull files from a shared queue; the merge
/// happens in path order, so the result is byte-for-byte independent of
/// scheduling. Files claiming overlapping process ranks fail with
/// [`TraceError::DuplicateProcess`].
pub fn read_parallel(
    paths: &[PathBuf],
    format: Option<Format>,
    workers: usize,
    opts: &ReadOptions,
) -> Result<Trace> {
    if paths.is_empty() {
        return Ok(TraceBuilder::new().finish());
    }
    let workers = workers.max(1).min(paths.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Trace>>>> = Mutex::new((0..paths.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= paths.len() {
                    break;
                }
                let outcome = read_trace(&paths[i], format, opts);
                results.lock().unwrap()[i] = Some(outcome);
            });
        }
    });

    let results = results.into_inner().unwrap();
    let mut traces: Vec<Trace> = Vec::with_capacity(paths.len());
    for slot in results {
        traces.push(slot.expect("worker completed every index")?);
    }
    merge_traces(traces, opts)
}

/// Merges per-file traces in input order, enforcing disjoint process sets
/// and summing the reader skip counters.
fn merge_traces(traces: Vec<Trace>, opts: &ReadOptions) -> Result<Trace> {
    let mut seen_procs = std::collections::BTreeSet::new();
    for t in &traces {
        for p in t.events().processes() {
            if !seen_procs.insert(p) {
                return Err(TraceError::DuplicateProcess { process: p });
            }
        }
    }

    // Individual reads already repaired unclosed calls; the merge only
    // re-sorts, so repair is off.
    let mut b = TraceBuilder::new().strict(opts.strict).repair(false);
    let mut skipped: u64 = 0;
    let mut dropped_flows: u64 = 0;
    let mut formats: Vec<String> = Vec::new();
    let mut sources: Vec<String> = Vec::new();
    for t in &traces {
        let md = t.metadata();
        skipped += md
            .get("skipped_events")
            .and_then(|v| v.parse::<u64>().ok())
            .unwrap_or(0);
        dropped_flows += md
            .get("dropped_flows")
            .and_then(|v| v.parse::<u64>().ok())
            .unwrap_or(0);
        if let Some(f) = md.get("source_format") {
            if !formats.contains(f) {
                formats.push(f.clone());
            }
        }
        if let Some(s) = md.get("source_path") {
            sources.push(s.clone());
        }

        let ev = t.events();
        for i in 0..ev.len() {
            let attrs: Vec<(String, crate::model::AttrValue)> = ev
                .row_attrs(i)
                .into_iter()
                .map(|(k, v)| (k.to_owned(), v.clone()))
                .collect();
            b.push_with_attrs(
                ev.ts(i),
                ev.kind(i),
                ev.name(i),
                ev.process(i),
                ev.thread(i),
                attrs,
            );
        }
    }

    b.set_metadata("source_format", &formats.join(","));
    b.set_metadata("source_path", &sources.join(","));
    b.set_metadata("skipped_events", &skipped.to_string());
    if dropped_flows > 0 {
        b.set_metadata("dropped_flows", &dropped_flows.to_string());
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(dir: &Path, name: &str, content: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        p
    }

    #[test]
    fn detect_format_by_extension_and_content() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_temp(dir.path(), "a.csv", "timestamp,event_type,name,process\n");
        let json = write_temp(dir.path(), "b.json", "[]");
        let sniff_json = write_temp(dir.path(), "c.trace", "  [ ]");
        let sniff_csv = write_temp(dir.path(), "d.trace", "timestamp,event_type,name,process\n");
        assert_eq!(detect_format(&csv).unwrap(), Format::Csv);
        assert_eq!(detect_format(&json).unwrap(), Format::Chrome);
        assert_eq!(detect_format(&sniff_json).unwrap(), Format::Chrome);
        assert_eq!(detect_format(&sniff_csv).unwrap(), Format::Csv);
    }

    #[test]
    fn parallel_read_merges_in_path_order() {
        let dir = tempfile::tempdir().unwrap();
        let f0 = write_temp(
            dir.path(),
            "r0.csv",
            "timestamp,event_type,name,process\n0,Enter,main,0\n10,Leave,main,0\n",
        );
        let f1 = write_temp(
            dir.path(),
            "r1.csv",
            "timestamp,event_type,name,process\n0,Enter,main,1\n12,Leave,main,1\n",
        );
        let paths = vec![f0, f1];
        let opts = ReadOptions::default();
        let one = read_parallel(&paths, None, 1, &opts).unwrap();
        let four = read_parallel(&paths, None, 4, &opts).unwrap();
        assert_eq!(one.events().len(), 4);
        assert_eq!(
            write_csv_string(&one),
            write_csv_string(&four),
            "worker count must not change the merged trace"
        );
        assert_eq!(one.events().processes(), vec![0, 1]);
    }

    #[test]
    fn parallel_read_rejects_duplicate_ranks() {
        let dir = tempfile::tempdir().unwrap();
        let f0 = write_temp(
            dir.path(),
            "a.csv",
            "timestamp,event_type,name,process\n0,Instant,x,3\n",
        );
        let f1 = write_temp(
            dir.path(),
            "b.csv",
            "timestamp,event_type,name,process\n0,Instant,y,3\n",
        );
        let err = read_parallel(&[f0, f1], None, 2, &ReadOptions::default()).unwrap_err();
        assert!(matches!(err, TraceError::DuplicateProcess { process: 3 }));
    }
}
