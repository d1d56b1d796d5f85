//! Analysis toolkit for parallel execution traces.
//!
//! A trace is a flat, time-sorted list of events — function enters and
//! leaves, point instants (including message send/receive markers) —
//! each tagged with a process rank and thread id, held in a columnar
//! [`model::EventTable`]. On top of that sit derived structures
//! (call matching, call trees, message pairing, logical steps) that are
//! computed lazily and cached, and a set of analyses:
//!
//! - [`profiles`]: flat and time-binned profiles over pluggable metrics
//! - [`comm`]: message matrices, size histograms, traffic over time,
//!   communication/computation overlap
//! - [`diagnostics`]: load imbalance, idle time, per-step lateness,
//!   critical path extraction
//! - [`patterns`]: repeating-phase detection via matrix profiles
//! - [`query`]: a small filter language plus multi-run comparison
//! - [`report`]: text/CSV/JSON tables and static SVG plots
//!
//! Results come back as a uniform [`table::AnalysisTable`] so every
//! analysis can render the same four ways. The `tracekit` binary (see
//! [`cli`]) exposes each analysis as a subcommand; the crate's
//! `examples/` directory shows the library API for the same tasks.

pub mod error;
pub mod model;
pub mod table;

pub mod intervals;

mod util;

pub mod readers;

pub mod callgraph;
pub mod comm;
pub mod diagnostics;
pub mod patterns;
pub mod profiles;
pub mod query;
pub mod report;

pub mod cli;

pub use error::{Result, TraceError};
pub use model::{AttrValue, EventKind, EventTable, Trace, TraceBuilder};
pub use table::{AnalysisTable, Cell};
