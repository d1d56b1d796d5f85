//! The columnar event model.
//!
//! A trace is a table of events sorted by `(process, thread, timestamp)`.
//! Each event is an `Enter`, `Leave`, or `Instant` with a name, a location
//! (process rank and thread id), an integer-nanosecond timestamp, and an
//! optional set of typed attributes. Columns live in per-field vectors and
//! names are interned, so a million-event trace costs tens of bytes per
//! event rather than a heap allocation per field.
//!
//! Derived columns (caller/callee matching, inclusive/exclusive time,
//! calling-context-tree ids, message pairings, logical steps) are computed
//! lazily on first use and cached; see the analysis modules for the
//! algorithms.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use crate::callgraph::{CctData, MatchColumns, MatchFailure, TimeMetrics};
use crate::comm::MessageData;
use crate::diagnostics::{CycleInfo, StepColumns};
use crate::error::{Result, TraceError};

/// Canonical name of the attribute placed on repair-synthesized Leave rows.
pub const SYNTHETIC_LEAVE_ATTR: &str = "synthetic_leave";

/// What kind of thing happened at a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    /// A function (or region/kernel) began.
    Enter,
    /// A function ended.
    Leave,
    /// A point event with no duration (e.g. a message send or receive).
    Instant,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Enter => "Enter",
            EventKind::Leave => "Leave",
            EventKind::Instant => "Instant",
        }
    }

    /// Parses the canonical spelling. Case-sensitive: `Enter`, `Leave`,
    /// `Instant`.
    pub fn from_str_exact(s: &str) -> Option<EventKind> {
        match s {
            "Enter" => Some(EventKind::Enter),
            "Leave" => Some(EventKind::Leave),
            "Instant" => Some(EventKind::Instant),
            _ => None,
        }
    }
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A typed attribute value attached to one event row.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Int(i64),
    Float(f64),
    Str(String),
}

impl AttrValue {
    /// Numeric view: integers widen to `f64`, strings are not numeric.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttrValue::Int(v) => Some(*v as f64),
            AttrValue::Float(v) => Some(*v),
            AttrValue::Str(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            AttrValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttrValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

/// Interned event-name id. Resolve through the owning table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NameId(pub u32);

/// Name interner: every distinct event name is stored once.
#[derive(Debug, Default, Clone)]
pub(crate) struct StringTable {
    names: Vec<String>,
    index: HashMap<String, NameId>,
}

impl StringTable {
    pub(crate) fn intern(&mut self, s: &str) -> NameId {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = NameId(self.names.len() as u32);
        self.names.push(s.to_owned());
        self.index.insert(s.to_owned(), id);
        id
    }

    pub(crate) fn resolve(&self, id: NameId) -> &str {
        &self.names[id.0 as usize]
    }

    pub(crate) fn lookup(&self, s: &str) -> Option<NameId> {
        self.index.get(s).copied()
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }

    fn heap_bytes(&self) -> usize {
        let name_bytes: usize = self
            .names
            .iter()
            .map(|s| s.capacity() + std::mem::size_of::<String>())
            .sum();
        // The index roughly doubles the string storage plus map overhead.
        name_bytes * 2 + self.index.len() * 16
    }
}

/// One contiguous run of rows sharing a `(process, thread)` location.
///
/// Because the table is sorted by `(process, thread, timestamp)`, every
/// stream is a contiguous half-open row range `[start, end)` in timestamp
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    pub process: u32,
    pub thread: u32,
    pub start: u32,
    pub end: u32,
}

impl Stream {
    pub fn rows(&self) -> std::ops::Range<usize> {
        self.start as usize..self.end as usize
    }
}

/// Lazily-computed derived columns. Each slot is filled at most once per
/// table; `Trace::clear_derived` drops them all for recomputation.
#[derive(Default)]
pub(crate) struct Derived {
    pub(crate) matching: OnceLock<std::result::Result<MatchColumns, MatchFailure>>,
    /// Filled only after matching succeeded.
    pub(crate) metrics: OnceLock<TimeMetrics>,
    /// Filled only after matching succeeded.
    pub(crate) cct: OnceLock<CctData>,
    pub(crate) messages: OnceLock<MessageData>,
    pub(crate) steps: OnceLock<std::result::Result<StepColumns, CycleInfo>>,
}

/// The sorted columnar event table.
pub struct EventTable {
    pub(crate) ts: Vec<i64>,
    pub(crate) kinds: Vec<EventKind>,
    pub(crate) names: Vec<NameId>,
    pub(crate) procs: Vec<u32>,
    pub(crate) threads: Vec<u32>,
    /// Sparse attribute columns: key -> (row -> value).
    pub(crate) attrs: BTreeMap<String, BTreeMap<u32, AttrValue>>,
    pub(crate) strings: StringTable,
    pub(crate) streams: Vec<Stream>,
    /// Strict-mode flag inherited from the reader options; controls whether
    /// matching failures are hard errors.
    pub(crate) strict: bool,
    pub(crate) derived: Derived,
}

impl Clone for EventTable {
    /// Clones the base columns; derived columns are recomputed on demand
    /// (they are deterministic, so the clone is observationally identical).
    fn clone(&self) -> Self {
        EventTable {
            ts: self.ts.clone(),
            kinds: self.kinds.clone(),
            names: self.names.clone(),
            procs: self.procs.clone(),
            threads: self.threads.clone(),
            attrs: self.attrs.clone(),
            strings: self.strings.clone(),
            streams: self.streams.clone(),
            strict: self.strict,
            derived: Derived::default(),
        }
    }
}

impl std::fmt::Debug for EventTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventTable")
            .field("rows", &self.len())
            .field("streams", &self.streams.len())
            .field("names", &self.strings.len())
            .finish()
    }
}

impl EventTable {
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    pub fn ts(&self, row: usize) -> i64 {
        self.ts[row]
    }

    pub fn kind(&self, row: usize) -> EventKind {
        self.kinds[row]
    }

    pub fn name_id(&self, row: usize) -> NameId {
        self.names[row]
    }

    pub fn name(&self, row: usize) -> &str {
        self.strings.resolve(self.names[row])
    }

    pub fn process(&self, row: usize) -> u32 {
        self.procs[row]
    }

    pub fn thread(&self, row: usize) -> u32 {
        self.threads[row]
    }

    /// Resolves an interned name id to its string.
    pub fn resolve(&self, id: NameId) -> &str {
        self.strings.resolve(id)
    }

    /// Looks up the id of a name, if any event uses it.
    pub fn lookup_name(&self, name: &str) -> Option<NameId> {
        self.strings.lookup(name)
    }

    /// Number of distinct event names.
    pub fn name_count(&self) -> usize {
        self.strings.len()
    }

    /// The attribute `key` on `row`, if present.
    pub fn attr(&self, row: usize, key: &str) -> Option<&AttrValue> {
        self.attrs.get(key).and_then(|col| col.get(&(row as u32)))
    }

    /// All attributes of `row`, sorted by key.
    pub fn row_attrs(&self, row: usize) -> Vec<(&str, &AttrValue)> {
        let row = row as u32;
        self.attrs
            .iter()
            .filter_map(|(k, col)| col.get(&row).map(|v| (k.as_str(), v)))
            .collect()
    }

    /// Names of all attribute keys present anywhere in the table, sorted.
    pub fn attr_keys(&self) -> impl Iterator<Item = &str> {
        self.attrs.keys().map(|k| k.as_str())
    }

    /// True if the attribute key appears on at least one row.
    pub fn has_attr_key(&self, key: &str) -> bool {
        self.attrs.get(key).is_some_and(|col| !col.is_empty())
    }

    /// The `(process, thread)` streams of the table, in sorted order.
    pub fn streams(&self) -> &[Stream] {
        &self.streams
    }

    /// The stream containing `row`.
    pub fn stream_of(&self, row: usize) -> &Stream {
        let row = row as u32;
        let idx = self
            .streams
            .partition_point(|s| s.end <= row)
            .min(self.streams.len() - 1);
        &self.streams[idx]
    }

    /// Distinct process ranks, ascending.
    pub fn processes(&self) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for s in &self.streams {
            if out.last() != Some(&s.process) {
                out.push(s.process);
            }
        }
        out
    }

    fn sort_key(&self, row: usize) -> (u32, u32, i64) {
        (self.procs[row], self.threads[row], self.ts[row])
    }

    /// True if rows are sorted by `(process, thread, timestamp)`.
    pub fn is_sorted(&self) -> bool {
        (1..self.len()).all(|i| self.sort_key(i - 1) <= self.sort_key(i))
    }

    /// Approximate heap bytes held by the table's own structures
    /// (columns, interner, attribute maps). Used for memory budgeting;
    /// intentionally a slight over-estimate.
    pub fn approx_heap_bytes(&self) -> usize {
        let mut total = self.ts.capacity() * 8
            + self.kinds.capacity()
            + self.names.capacity() * 4
            + self.procs.capacity() * 4
            + self.threads.capacity() * 4
            + self.streams.capacity() * std::mem::size_of::<Stream>()
            + self.strings.heap_bytes();
        for (key, col) in &self.attrs {
            let value_bytes: usize = col
                .values()
                .map(|v| match v {
                    AttrValue::Str(s) => std::mem::size_of::<AttrValue>() + s.capacity(),
                    _ => std::mem::size_of::<AttrValue>(),
                })
                .sum();
            // B-tree node overhead runs ~25% on top of the entries.
            total += key.capacity() + (col.len() * 4 + value_bytes) * 5 / 4;
        }
        total
    }

    /// Recomputes the stream index after the base columns change.
    fn rebuild_streams(&mut self) {
        self.streams.clear();
        let n = self.len();
        let mut i = 0usize;
        while i < n {
            let (p, t) = (self.procs[i], self.threads[i]);
            let mut j = i + 1;
            while j < n && self.procs[j] == p && self.threads[j] == t {
                j += 1;
            }
            self.streams.push(Stream {
                process: p,
                thread: t,
                start: i as u32,
                end: j as u32,
            });
            i = j;
        }
    }
}

/// Restores the `(process, thread, timestamp)` sort order of a table.
///
/// A stable sort: rows with equal keys keep their relative order, so a
/// zero-duration call (`Enter` then `Leave` at the same timestamp) stays
/// Enter-before-Leave. An already-sorted table is returned unchanged.
/// Derived columns are dropped if a re-sort was needed.
pub fn sort_events(table: EventTable) -> EventTable {
    if table.is_sorted() {
        return table;
    }
    let mut table = table;
    let n = table.len();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.sort_by_key(|&i| table.sort_key(i as usize));

    let apply_u32 = |col: &Vec<u32>| -> Vec<u32> { perm.iter().map(|&i| col[i as usize]).collect() };
    table.ts = perm.iter().map(|&i| table.ts[i as usize]).collect();
    table.kinds = perm.iter().map(|&i| table.kinds[i as usize]).collect();
    table.names = perm.iter().map(|&i| table.names[i as usize]).collect();
    table.procs = apply_u32(&table.procs);
    table.threads = apply_u32(&table.threads);

    // Attribute columns are keyed by row; remap through the inverse
    // permutation.
    let mut inverse = vec![0u32; n];
    for (new_row, &old_row) in perm.iter().enumerate() {
        inverse[old_row as usize] = new_row as u32;
    }
    let old_attrs = std::mem::take(&mut table.attrs);
    for (key, col) in old_attrs {
        let remapped: BTreeMap<u32, AttrValue> = col
            .into_iter()
            .map(|(row, v)| (inverse[row as usize], v))
            .collect();
        table.attrs.insert(key, remapped);
    }
    table.rebuild_streams();
    table.derived = Derived::default();
    table
}

/// A trace: the event table plus run-level metadata.
pub struct Trace {
    pub(crate) events: EventTable,
    pub(crate) metadata: BTreeMap<String, String>,
}

impl Clone for Trace {
    fn clone(&self) -> Self {
        Trace {
            events: self.events.clone(),
            metadata: self.metadata.clone(),
        }
    }
}

impl std::fmt::Debug for Trace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trace")
            .field("events", &self.events)
            .field("metadata", &self.metadata)
            .finish()
    }
}

impl Trace {
    /// The underlying sorted event table.
    pub fn events(&self) -> &EventTable {
        &self.events
    }

    /// Run-level metadata (source format, reader skip counts, names from
    /// trace headers, ...).
    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn set_metadata(&mut self, key: &str, value: &str) {
        self.metadata.insert(key.to_owned(), value.to_owned());
    }

    /// `(first, last)` event timestamp in the trace, both inclusive.
    ///
    /// A single-event trace yields `(t, t)`. Empty traces are an error.
    pub fn time_span(&self) -> Result<(i64, i64)> {
        if self.events.is_empty() {
            return Err(TraceError::EmptyTrace);
        }
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for &t in &self.events.ts {
            lo = lo.min(t);
            hi = hi.max(t);
        }
        Ok((lo, hi))
    }

    /// Drops every cached derived column so the next analysis recomputes
    /// from the base columns. Analyses are deterministic, so recomputation
    /// yields identical results.
    pub fn clear_derived(&mut self) {
        self.events.derived = Derived::default();
    }
}

/// Incremental trace constructor used by the readers, the filter engine,
/// and tests.
///
/// Events may be pushed in any order; `finish` sorts them stably by
/// `(process, thread, timestamp)`. With `repair` enabled (the default,
/// matching reader behavior for truncated traces), any call still open at
/// the end of its stream receives a synthesized Leave at the trace-wide
/// maximum timestamp, tagged with the attribute `synthetic_leave=1`.
pub struct TraceBuilder {
    ts: Vec<i64>,
    kinds: Vec<EventKind>,
    names: Vec<NameId>,
    procs: Vec<u32>,
    threads: Vec<u32>,
    row_attrs: Vec<Vec<(String, AttrValue)>>,
    strings: StringTable,
    metadata: BTreeMap<String, String>,
    strict: bool,
    repair: bool,
}

impl Default for TraceBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TraceBuilder {
    pub fn new() -> Self {
        TraceBuilder {
            ts: Vec::new(),
            kinds: Vec::new(),
            names: Vec::new(),
            procs: Vec::new(),
            threads: Vec::new(),
            row_attrs: Vec::new(),
            strings: StringTable::default(),
            metadata: BTreeMap::new(),
            strict: false,
            repair: true,
        }
    }

    /// Strict mode makes later matching failures hard errors instead of
    /// counted recoveries.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Disables synthesized Leaves for unclosed calls. Filtered views use
    /// this so that filtering composes without inventing events.
    pub fn repair(mut self, repair: bool) -> Self {
        self.repair = repair;
        self
    }

    pub fn metadata(mut self, key: &str, value: &str) -> Self {
        self.metadata.insert(key.to_owned(), value.to_owned());
        self
    }

    pub fn set_metadata(&mut self, key: &str, value: &str) {
        self.metadata.insert(key.to_owned(), value.to_owned());
    }

    /// Appends one event with no attributes.
    pub fn push(&mut self, ts: i64, kind: EventKind, name: &str, process: u32, thread: u32) {
        self.push_with_attrs(ts, kind, name, process, thread, Vec::new());
    }

    /// Appends one event with attributes.
    pub fn push_with_attrs(
        &mut self,
        ts: i64,
        kind: EventKind,
        name: &str,
        process: u32,
        thread: u32,
        attrs: Vec<(String, AttrValue)>,
    ) {
        let id = self.strings.intern(name);
        self.ts.push(ts);
        self.kinds.push(kind);
        self.names.push(id);
        self.procs.push(process);
        self.threads.push(thread);
        self.row_attrs.push(attrs);
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    /// Sorts, optionally repairs unclosed calls, and produces the trace.
    pub fn finish(mut self) -> Trace {
        if self.repair && !self.ts.is_empty() {
            self.synthesize_missing_leaves();
        }

        let n = self.ts.len();
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.sort_by_key(|&i| {
            let i = i as usize;
            (self.procs[i], self.threads[i], self.ts[i])
        });

        let mut table = EventTable {
            ts: perm.iter().map(|&i| self.ts[i as usize]).collect(),
            kinds: perm.iter().map(|&i| self.kinds[i as usize]).collect(),
            names: perm.iter().map(|&i| self.names[i as usize]).collect(),
            procs: perm.iter().map(|&i| self.procs[i as usize]).collect(),
            threads: perm.iter().map(|&i| self.threads[i as usize]).collect(),
            attrs: BTreeMap::new(),
            strings: self.strings,
            streams: Vec::new(),
            strict: self.strict,
            derived: Derived::default(),
        };
        for (new_row, &old_row) in perm.iter().enumerate() {
            for (key, value) in std::mem::take(&mut self.row_attrs[old_row as usize]) {
                table
                    .attrs
                    .entry(key)
                    .or_default()
                    .insert(new_row as u32, value);
            }
        }
        table.rebuild_streams();

        Trace {
            events: table,
            metadata: self.metadata,
        }
    }

    /// Walks each stream in sorted order and appends a Leave at the global
    /// maximum timestamp for every call left open, innermost first.
    fn synthesize_missing_leaves(&mut self) {
        let n = self.ts.len();
        let t_max = self.ts.iter().copied().max().unwrap();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by_key(|&i| {
            let i = i as usize;
            (self.procs[i], self.threads[i], self.ts[i])
        });

        let mut synthetic: Vec<(NameId, u32, u32)> = Vec::new();
        let mut stack: Vec<NameId> = Vec::new();
        let mut idx = 0usize;
        while idx < n {
            let first = order[idx] as usize;
            let (p, t) = (self.procs[first], self.threads[first]);
            stack.clear();
            while idx < n {
                let row = order[idx] as usize;
                if self.procs[row] != p || self.threads[row] != t {
                    break;
                }
                match self.kinds[row] {
                    EventKind::Enter => stack.push(self.names[row]),
                    EventKind::Leave => {
                        // Mirror lenient matching: only a Leave naming the
                        // innermost open call closes it.
                        if stack.last() == Some(&self.names[row]) {
                            stack.pop();
                        }
                    }
                    EventKind::Instant => {}
                }
                idx += 1;
            }
            // Innermost first so the synthesized Leaves nest correctly.
            while let Some(name) = stack.pop() {
                synthetic.push((name, p, t));
            }
        }

        for (name, p, t) in synthetic {
            self.ts.push(t_max);
            self.kinds.push(EventKind::Leave);
            self.names.push(name);
            self.procs.push(p);
            self.threads.push(t);
            self.row_attrs
                .push(vec![(SYNTHETIC_LEAVE_ATTR.to_owned(), AttrValue::Int(1))]);
        }
    }
}
