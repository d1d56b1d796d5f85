//! Error type shared by readers, analyses, and the query layer.

use thiserror::Error;

/// Everything that can go wrong while reading a trace or running an analysis.
///
/// Row numbers refer to positions in the sorted event table; line numbers
/// refer to positions in an input file.
#[derive(Debug, Error)]
pub enum TraceError {
    /// The trace (or a filtered view of it) contains no events.
    #[error("trace contains no events")]
    EmptyTrace,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// The CSV header row is not one of the accepted column layouts.
    #[error("malformed CSV header: expected `timestamp,event_type,name,process[,thread[,attributes]]`, found `{found}`")]
    MalformedHeader { found: String },

    /// A data row could not be parsed (strict mode only; lenient mode skips).
    #[error("malformed row at line {line}: {msg}")]
    MalformedRow { line: u64, msg: String },

    /// The input is not valid JSON, or not a recognizable Chrome trace.
    #[error("malformed trace JSON: {msg}")]
    MalformedJson { msg: String },

    /// Begin/End events do not nest on a (process, thread) stream
    /// (strict Chrome reading only; lenient mode counts and continues).
    #[error("unbalanced B/E events on process {process}, thread {thread}")]
    UnbalancedBeginEnd { process: u32, thread: u32 },

    /// Two input files in a parallel read claim the same process rank.
    #[error("process {process} appears in more than one input file")]
    DuplicateProcess { process: u32 },

    /// A Leave event does not close the innermost open call
    /// (strict matching only; lenient mode counts and continues).
    #[error("leave event at row {row} does not match the innermost open call")]
    MismatchedLeave { row: usize },

    /// A metric was requested that no event in the trace carries, or that is
    /// present on only one side of an enter/leave pair.
    #[error("metric `{metric}` is missing or incomplete: {msg}")]
    MissingMetric { metric: String, msg: String },

    /// A histogram or profile was asked for zero bins.
    #[error("bin count must be at least 1")]
    BadBinCount,

    /// A communication analysis was run on a trace with no send events.
    #[error("trace contains no message send events")]
    NoCommData,

    /// Message timestamps imply an impossible ordering (a receive that
    /// completes before its matching send).
    #[error("message causality cycle: recv at row {recv_row} precedes its send at row {send_row}")]
    CycleDetected { send_row: usize, recv_row: usize },

    /// A series is too short for the requested matrix-profile window.
    #[error("series of length {len} is too short: window {window} with exclusion {exclusion} needs at least {needed} points")]
    SeriesTooShort {
        len: usize,
        window: usize,
        exclusion: usize,
        needed: usize,
    },

    /// A matrix-profile window below the supported minimum.
    #[error("window must be at least {min}, got {window}")]
    BadWindow { window: usize, min: usize },

    /// Pattern detection found no occurrences of the anchor event.
    #[error("no occurrences of event `{name}` in the trace")]
    NoOccurrences { name: String },

    /// A filter expression failed to parse or is invalid for the
    /// requested mode.
    #[error("bad filter expression: {msg}")]
    BadExpr { msg: String },

    /// Multi-run comparison needs at least two runs.
    #[error("multi-run comparison needs at least 2 traces, got {got}")]
    TooFewRuns { got: usize },

    /// Multi-run labels must match the number of runs.
    #[error("got {labels} labels for {runs} runs")]
    LabelCountMismatch { labels: usize, runs: usize },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, TraceError>;
