//! Performance diagnostics: load imbalance across processes, idle time,
//! logical step assignment, operation lateness, and critical-path
//! extraction.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::comm::MsgRole;
use crate::error::{Result, TraceError};
use crate::model::{EventKind, Trace};
use crate::profiles::{metric_values, Metric, MetricValues};
use crate::table::{AnalysisTable, Cell};

/// Row-aligned logical steps (cached on the trace).
///
/// A *step* is a causal rank: operations on one stream get increasing
/// steps, and a matched receive's step exceeds its send's. Wrapper calls
/// carry the maximum step of anything nested inside them.
#[derive(Debug, Clone)]
pub struct StepColumns {
    /// `step[row]` for operation rows and their enclosing Enter rows;
    /// `None` elsewhere (Leave rows, rows outside any operation).
    pub step: Vec<Option<u64>>,
    /// Operation rows (leaf-call Enters and instants), ascending.
    pub op_rows: Vec<u32>,
}

/// A causality violation found during step assignment: the receive cannot
/// be ordered after its send.
#[derive(Debug, Clone, Copy)]
pub struct CycleInfo {
    pub send_row: u32,
    pub recv_row: u32,
}

impl From<CycleInfo> for TraceError {
    fn from(c: CycleInfo) -> Self {
        TraceError::CycleDetected {
            send_row: c.send_row as usize,
            recv_row: c.recv_row as usize,
        }
    }
}

/// Which call names count as idle/waiting time.
#[derive(Debug, Clone)]
pub struct IdlePredicate {
    /// Case-insensitive substrings.
    pub substrings: Vec<String>,
}

impl Default for IdlePredicate {
    fn default() -> Self {
        IdlePredicate {
            substrings: vec!["idle".to_owned(), "wait".to_owned()],
        }
    }
}

impl IdlePredicate {
    pub fn matches(&self, name: &str) -> bool {
        let lower = name.to_ascii_lowercase();
        self.substrings.iter().any(|s| lower.contains(s.as_str()))
    }
}

/// One hop of the critical path, in forward time order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSegment {
    /// A run of consecutive rows on one stream.
    Local {
        process: u32,
        thread: u32,
        first_row: u32,
        last_row: u32,
        start_ts: i64,
        end_ts: i64,
    },
    /// A message edge from one process to another.
    MessageHop {
        from: u32,
        to: u32,
        send_row: u32,
        recv_row: u32,
        send_ts: i64,
        recv_ts: i64,
    },
}

/// The dependency chain ending at the last event of the trace.
#[derive(Debug, Clone)]
pub struct CriticalPath {
    /// Segments in forward time order; local runs alternate with hops.
    pub segments: Vec<PathSegment>,
    /// True when the walk hit missing data (an unmatched receive at the
    /// head of a stream, or inconsistent timestamps) and stopped early.
    pub truncated: bool,
    /// End-to-end span covered by the path, in nanoseconds.
    pub total_ns: i64,
}

impl Trace {
    /// Logical step of every operation (cached).
    pub fn logical_steps(&self) -> Result<&StepColumns> {
        self.matching()?; // propagate matching errors before caching steps
        let r = self
            .events
            .derived
            .steps
            .get_or_init(|| compute_steps(self));
        match r {
            Ok(s) => Ok(s),
            Err(c) => Err((*c).into()),
        }
    }

    /// Per-function spread of a metric across processes: max/mean ratio,
    /// 1.0 meaning perfectly balanced.
    pub fn load_imbalance(&self, metric: &Metric) -> Result<AnalysisTable> {
        load_imbalance(self, metric)
    }

    /// Time per process spent in idle/wait calls (maximal such calls;
    /// nested idle inside idle is not double-counted).
    pub fn idle_time(&self, pred: &IdlePredicate) -> Result<AnalysisTable> {
        idle_time(self, pred)
    }

    /// How far behind the fastest process each process finishes the
    /// operations of each logical step, reported as per-process maxima.
    pub fn lateness(&self) -> Result<AnalysisTable> {
        lateness(self)
    }

    /// The chain of events and messages that determined when the trace
    /// finished.
    pub fn critical_path(&self) -> Result<CriticalPath> {
        critical_path(self)
    }

    /// [`Trace::critical_path`] rendered as a table, one segment per row.
    pub fn critical_path_table(&self) -> Result<AnalysisTable> {
        critical_path_table(self)
    }
}

// ---------------------------------------------------------------------------
// Load imbalance
// ---------------------------------------------------------------------------

fn load_imbalance(trace: &Trace, metric: &Metric) -> Result<AnalysisTable> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let ev = trace.events();
    let vals = metric_values(trace, metric)?;
    let processes = ev.processes();
    let n_procs = processes.len().max(1);

    // Per (name, process) totals as f64; integer metrics are re-emitted
    // as exact integers below (they are per-row exact i64 sums).
    let mut int_metric = false;
    let mut totals: BTreeMap<crate::model::NameId, BTreeMap<u32, f64>> = BTreeMap::new();
    let mut int_totals: BTreeMap<crate::model::NameId, BTreeMap<u32, i64>> = BTreeMap::new();
    match vals {
        MetricValues::Time(v) => {
            int_metric = true;
            for (row, val) in v.iter().enumerate() {
                if let Some(x) = val {
                    *int_totals
                        .entry(ev.name_id(row))
                        .or_default()
                        .entry(ev.process(row))
                        .or_insert(0) += x;
                }
            }
        }
        MetricValues::Attr(v) => {
            for (row, val) in v.iter().enumerate() {
                if let Some(x) = val {
                    *totals
                        .entry(ev.name_id(row))
                        .or_default()
                        .entry(ev.process(row))
                        .or_insert(0.0) += x;
                }
            }
        }
    }

    struct Row {
        name: String,
        total: Cell,
        max: Cell,
        mean: f64,
        imbalance: f64,
        top: u32,
    }
    let mut rows: Vec<(f64, Row)> = Vec::new();

    if int_metric {
        for (name_id, by_proc) in &int_totals {
            let total: i64 = by_proc.values().sum();
            let (&top, &max) = by_proc
                .iter()
                .max_by_key(|&(p, v)| (*v, Reverse(*p)))
                .unwrap();
            let mean = total as f64 / n_procs as f64;
            let imbalance = if mean == 0.0 { 1.0 } else { max as f64 / mean };
            rows.push((
                total as f64,
                Row {
                    name: ev.resolve(*name_id).to_owned(),
                    total: Cell::Int(total),
                    max: Cell::Int(max),
                    mean,
                    imbalance,
                    top,
                },
            ));
        }
    } else {
        for (name_id, by_proc) in &totals {
            let total: f64 = by_proc.values().sum();
            let (&top, &max) = by_proc
                .iter()
                .max_by(|a, b| {
                    (a.1, Reverse(*a.0))
                        .partial_cmp(&(b.1, Reverse(*b.0)))
                        .unwrap()
                })
                .unwrap();
            let mean = total / n_procs as f64;
            let imbalance = if mean == 0.0 { 1.0 } else { max / mean };
            rows.push((
                total,
                Row {
                    name: ev.resolve(*name_id).to_owned(),
                    total: Cell::Float(total),
                    max: Cell::Float(max),
                    mean,
                    imbalance,
                    top,
                },
            ));
        }
    }

    rows.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1.name.cmp(&b.1.name))
    });

    let unit = metric.unit();
    let mut table = AnalysisTable::new("name");
    table.add_column("total", unit);
    table.add_column("mean", unit);
    table.add_column("max", unit);
    table.add_column("imbalance", None);
    table.add_column("top_process", None);
    for (_, r) in rows {
        table.push_row(
            &r.name,
            vec![
                r.total,
                Cell::Float(r.mean),
                r.max,
                Cell::Float(r.imbalance),
                Cell::Int(r.top as i64),
            ],
        );
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Idle time
// ---------------------------------------------------------------------------

fn idle_time(trace: &Trace, pred: &IdlePredicate) -> Result<AnalysisTable> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let ev = trace.events();
    let m = trace.matching()?;

    // idle_covered[row]: this Enter is idle-named or sits inside an
    // idle-named call. Parents precede children in row order, so one
    // forward pass suffices.
    let mut idle_covered = vec![false; ev.len()];
    let mut idle_ns: BTreeMap<u32, i64> = BTreeMap::new();
    let mut span_ns: BTreeMap<u32, i64> = BTreeMap::new();

    for stream in ev.streams() {
        if stream.rows().is_empty() {
            continue;
        }
        let lo = ev.ts(stream.rows().start);
        let hi = ev.ts(stream.rows().end - 1);
        *span_ns.entry(stream.process).or_insert(0) += hi - lo;

        for i in stream.rows() {
            if ev.kind(i) != EventKind::Enter {
                continue;
            }
            let parent_covered = m.parent[i].is_some_and(|p| idle_covered[p as usize]);
            let is_idle = pred.matches(ev.name(i));
            idle_covered[i] = is_idle || parent_covered;
            if is_idle && !parent_covered {
                if let Some(leave) = m.matching[i] {
                    *idle_ns.entry(stream.process).or_insert(0) +=
                        ev.ts(leave as usize) - ev.ts(i);
                }
            }
        }
    }

    let mut rows: Vec<(u32, i64, i64)> = span_ns
        .iter()
        .map(|(&p, &span)| (p, idle_ns.get(&p).copied().unwrap_or(0), span))
        .collect();
    rows.sort_by_key(|&(p, idle, _)| (Reverse(idle), p));

    let mut table = AnalysisTable::new("process");
    table.add_column("idle_ns", Some("ns"));
    table.add_column("span_ns", Some("ns"));
    table.add_column("idle_frac", None);
    for (p, idle, span) in rows {
        let frac = if span == 0 { 0.0 } else { idle as f64 / span as f64 };
        table.push_row(
            &p.to_string(),
            vec![Cell::Int(idle), Cell::Int(span), Cell::Float(frac)],
        );
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Logical steps
// ---------------------------------------------------------------------------

fn compute_steps(trace: &Trace) -> std::result::Result<StepColumns, CycleInfo> {
    let ev = trace.events();
    let m = trace.matching().expect("checked by caller");
    let msgs = trace.messages();

    // A receive stamped earlier than its send can never be ordered after
    // it; reject these up front.
    for r in &msgs.records {
        if r.recv_ts < r.send_ts {
            return Err(CycleInfo {
                send_row: r.send_row,
                recv_row: r.recv_row,
            });
        }
    }

    // Operations: leaf-call Enter rows and instants, in stream order.
    let mut op_lists: Vec<Vec<u32>> = Vec::new();
    let mut op_rows: Vec<u32> = Vec::new();
    for stream in ev.streams() {
        let mut ops = Vec::new();
        for i in stream.rows() {
            if ev.kind(i) == EventKind::Instant || m.is_leaf_call(ev, i) {
                ops.push(i as u32);
                op_rows.push(i as u32);
            }
        }
        if !ops.is_empty() {
            op_lists.push(ops);
        }
    }

    let n = ev.len();
    let mut step: Vec<Option<u64>> = vec![None; n];
    let mut next_local: Vec<u64> = vec![0; op_lists.len()]; // step floor per stream
    let mut cursor: Vec<usize> = vec![0; op_lists.len()];

    // Streams ready to execute their next operation, keyed by
    // (timestamp, row) for a deterministic schedule. Streams whose next
    // operation is a receive still waiting on its send park in `waiters`
    // until that send row executes.
    let mut ready: BinaryHeap<Reverse<(i64, u32, usize)>> = BinaryHeap::new();
    let mut waiters: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let key = |ev: &crate::model::EventTable, row: u32, s: usize| {
        Reverse((ev.ts(row as usize), row, s))
    };
    for (s, ops) in op_lists.iter().enumerate() {
        ready.push(key(ev, ops[0], s));
    }

    let mut remaining: usize = op_lists.iter().map(Vec::len).sum();
    while remaining > 0 {
        let Some(Reverse((_, row, s))) = ready.pop() else {
            // Every unfinished stream is parked behind a receive whose
            // send never became executable: a dependency cycle. Report
            // the earliest blocked receive.
            let blocked = waiters
                .iter()
                .flat_map(|(&send, streams)| {
                    streams.iter().map(move |&s| (s, send))
                })
                .map(|(s, send)| (op_lists[s][cursor[s]], send))
                .min_by_key(|&(recv, _)| (ev.ts(recv as usize), recv))
                .expect("ops remain, so some stream is parked");
            return Err(CycleInfo {
                send_row: blocked.1,
                recv_row: blocked.0,
            });
        };

        // A parked stream re-enters the heap only via its waiter entry,
        // so the popped row is always the stream's current operation.
        debug_assert_eq!(op_lists[s][cursor[s]], row);
        let i = row as usize;

        // Receives that are matched wait for their send to execute.
        if msgs.role[i] == MsgRole::Recv {
            if let Some(send_row) = msgs.send_of_recv[i] {
                if step[send_row as usize].is_none() {
                    waiters.entry(send_row).or_default().push(s);
                    continue;
                }
                next_local[s] = next_local[s].max(step[send_row as usize].unwrap() + 1);
            }
        }

        step[i] = Some(next_local[s]);
        next_local[s] += 1;
        cursor[s] += 1;
        remaining -= 1;
        if cursor[s] < op_lists[s].len() {
            ready.push(key(ev, op_lists[s][cursor[s]], s));
        }
        if let Some(streams) = waiters.remove(&row) {
            for w in streams {
                ready.push(key(ev, op_lists[w][cursor[w]], w));
            }
        }
    }

    // Wrapper calls inherit the maximum step nested inside them. Walk up
    // the parent chain, stopping once an ancestor already has a step at
    // least as large (its own ancestors were raised when it was set).
    for &op in &op_rows {
        let s = step[op as usize].expect("all ops were scheduled");
        let mut p = m.parent[op as usize];
        while let Some(q) = p {
            let q = q as usize;
            if step[q].is_some_and(|have| have >= s) {
                break;
            }
            step[q] = Some(s);
            p = m.parent[q];
        }
    }

    Ok(StepColumns { step, op_rows })
}

// ---------------------------------------------------------------------------
// Lateness
// ---------------------------------------------------------------------------

/// Completion time of an operation row: leave time for a leaf call, the
/// instant's own timestamp otherwise.
fn completion_ts(trace: &Trace, row: usize) -> Option<i64> {
    let ev = trace.events();
    match ev.kind(row) {
        EventKind::Instant => Some(ev.ts(row)),
        EventKind::Enter => {
            let m = trace.matching().ok()?;
            m.matching[row].map(|leave| ev.ts(leave as usize))
        }
        EventKind::Leave => None,
    }
}

fn lateness(trace: &Trace) -> Result<AnalysisTable> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let steps = trace.logical_steps()?;
    let ev = trace.events();

    // Earliest completion per step across all processes.
    let mut earliest: BTreeMap<u64, i64> = BTreeMap::new();
    let mut ops: Vec<(u32, u64, i64)> = Vec::new(); // (row, step, completion)
    for &row in &steps.op_rows {
        let (Some(step), Some(done)) = (
            steps.step[row as usize],
            completion_ts(trace, row as usize),
        ) else {
            continue;
        };
        ops.push((row, step, done));
        earliest
            .entry(step)
            .and_modify(|e| *e = (*e).min(done))
            .or_insert(done);
    }

    struct Accum {
        max: i64,
        at_step: u64,
        sum: i64,
        count: u64,
    }
    let mut by_proc: BTreeMap<u32, Accum> = BTreeMap::new();
    for &(row, step, done) in &ops {
        let late = done - earliest[&step];
        let a = by_proc.entry(ev.process(row as usize)).or_insert(Accum {
            max: -1,
            at_step: 0,
            sum: 0,
            count: 0,
        });
        if late > a.max {
            a.max = late;
            a.at_step = step;
        }
        a.sum += late;
        a.count += 1;
    }

    let mut rows: Vec<(u32, Accum)> = by_proc.into_iter().collect();
    rows.sort_by_key(|(p, a)| (Reverse(a.max), *p));

    let mut table = AnalysisTable::new("process");
    table.add_column("max_lateness_ns", Some("ns"));
    table.add_column("at_step", None);
    table.add_column("mean_lateness_ns", Some("ns"));
    table.add_column("ops", None);
    for (p, a) in rows {
        table.push_row(
            &p.to_string(),
            vec![
                Cell::Int(a.max),
                Cell::Int(a.at_step as i64),
                Cell::Float(a.sum as f64 / a.count as f64),
                Cell::Int(a.count as i64),
            ],
        );
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Critical path
// ---------------------------------------------------------------------------

fn critical_path(trace: &Trace) -> Result<CriticalPath> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    trace.matching()?;
    let ev = trace.events();
    let msgs = trace.messages();

    // Anchor: the row with the latest timestamp (highest row on ties).
    let anchor = (0..ev.len())
        .max_by_key(|&i| (ev.ts(i), i))
        .expect("trace is nonempty");

    let mut segments_rev: Vec<PathSegment> = Vec::new();
    let mut truncated = false;
    let mut visited = vec![false; ev.len()];

    let mut stream = ev.stream_of(anchor);
    let mut row = anchor; // current position, walking backward
    let mut chunk_hi = anchor; // newest row of the current local run

    'walk: loop {
        let first = stream.rows().start;
        // Does this row hand control to another stream via a message?
        let binds = msgs.role[row] == MsgRole::Recv
            && msgs.send_of_recv[row].is_some_and(|send| {
                let send = send as usize;
                ev.ts(send) <= ev.ts(row)
                    && (row == first || ev.ts(send) > ev.ts(row - 1))
            });

        if binds {
            let send = msgs.send_of_recv[row].unwrap() as usize;
            visited[row..=chunk_hi].fill(true);
            segments_rev.push(PathSegment::Local {
                process: stream.process,
                thread: stream.thread,
                first_row: row as u32,
                last_row: chunk_hi as u32,
                start_ts: ev.ts(row),
                end_ts: ev.ts(chunk_hi),
            });
            segments_rev.push(PathSegment::MessageHop {
                from: ev.process(send),
                to: stream.process,
                send_row: send as u32,
                recv_row: row as u32,
                send_ts: ev.ts(send),
                recv_ts: ev.ts(row),
            });
            if visited[send] {
                // Only reachable through equal-timestamp knots; bail out
                // rather than loop.
                truncated = true;
                break 'walk;
            }
            stream = ev.stream_of(send);
            row = send;
            chunk_hi = send;
            continue;
        }

        if row == first {
            // Head of the stream: path start, unless the head is an
            // unmatched receive (the chain continues into missing data).
            if msgs.role[row] == MsgRole::Recv && msgs.send_of_recv[row].is_none() {
                truncated = true;
            }
            visited[row..=chunk_hi].fill(true);
            segments_rev.push(PathSegment::Local {
                process: stream.process,
                thread: stream.thread,
                first_row: row as u32,
                last_row: chunk_hi as u32,
                start_ts: ev.ts(row),
                end_ts: ev.ts(chunk_hi),
            });
            break 'walk;
        }
        row -= 1;
    }

    let segments: Vec<PathSegment> = segments_rev.into_iter().rev().collect();
    let start_ts = match segments[0] {
        PathSegment::Local { start_ts, .. } => start_ts,
        PathSegment::MessageHop { send_ts, .. } => send_ts,
    };
    Ok(CriticalPath {
        segments,
        truncated,
        total_ns: ev.ts(anchor) - start_ts,
    })
}

fn critical_path_table(trace: &Trace) -> Result<AnalysisTable> {
    let path = trace.critical_path()?;
    let mut table = AnalysisTable::new("segment");
    table.add_column("kind", None);
    table.add_column("where", None);
    table.add_column("start_ts", Some("ns"));
    table.add_column("end_ts", Some("ns"));
    table.add_column("duration_ns", Some("ns"));
    table.add_column("events", None);
    for (idx, seg) in path.segments.iter().enumerate() {
        let cells = match *seg {
            PathSegment::Local {
                process,
                thread,
                first_row,
                last_row,
                start_ts,
                end_ts,
            } => vec![
                Cell::Text("local".to_owned()),
                Cell::Text(format!("{process}.{thread}")),
                Cell::Int(start_ts),
                Cell::Int(end_ts),
                Cell::Int(end_ts - start_ts),
                Cell::Int((last_row - first_row + 1) as i64),
            ],
            PathSegment::MessageHop {
                from,
                to,
                send_ts,
                recv_ts,
                ..
            } => vec![
                Cell::Text("message".to_owned()),
                Cell::Text(format!("{from}->{to}")),
                Cell::Int(send_ts),
                Cell::Int(recv_ts),
                Cell::Int(recv_ts - send_ts),
                Cell::Int(2),
            ],
        };
        table.push_row(&idx.to_string(), cells);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::{MSG_RECV, MSG_SEND};
    use crate::model::{AttrValue, TraceBuilder};
    use EventKind::{Enter, Instant, Leave};

    fn msg(b: &mut TraceBuilder, ts: i64, kind: &str, here: u32, partner: u32, tag: i64) {
        b.push_with_attrs(
            ts,
            Instant,
            kind,
            here,
            0,
            vec![
                ("partner".into(), AttrValue::Int(partner as i64)),
                ("tag".into(), AttrValue::Int(tag)),
            ],
        );
    }

    #[test]
    fn imbalance_ratio_and_top_process() {
        // Rank 0 spends 30 ns in work, rank 1 spends 10 ns.
        let mut b = TraceBuilder::new();
        b.push(0, Enter, "work", 0, 0);
        b.push(30, Leave, "work", 0, 0);
        b.push(0, Enter, "work", 1, 0);
        b.push(10, Leave, "work", 1, 0);
        let t = b.finish();
        let table = t.load_imbalance(&Metric::ExcNs).unwrap();
        assert_eq!(table.lookup("work", "total"), Some(&Cell::Int(40)));
        assert_eq!(table.lookup("work", "max"), Some(&Cell::Int(30)));
        assert_eq!(table.lookup("work", "mean"), Some(&Cell::Float(20.0)));
        assert_eq!(table.lookup("work", "imbalance"), Some(&Cell::Float(1.5)));
        assert_eq!(table.lookup("work", "top_process"), Some(&Cell::Int(0)));
    }

    #[test]
    fn imbalance_counts_absent_ranks_as_zero() {
        // "solo" runs only on rank 0 of a 4-rank trace: imbalance = 4.
        let mut b = TraceBuilder::new();
        for r in 0..4u32 {
            b.push(0, Enter, "base", r, 0);
            b.push(10, Leave, "base", r, 0);
        }
        b.push(2, Enter, "solo", 0, 0);
        b.push(6, Leave, "solo", 0, 0);
        let t = b.finish();
        let table = t.load_imbalance(&Metric::IncNs).unwrap();
        assert_eq!(table.lookup("solo", "imbalance"), Some(&Cell::Float(4.0)));
        assert_eq!(table.lookup("base", "imbalance"), Some(&Cell::Float(1.0)));
        // Sorted by total descending: base (40) before solo (4).
        assert_eq!(table.row_label(0), "base");
    }

    #[test]
    fn idle_time_counts_maximal_idle_calls_once() {
        let mut b = TraceBuilder::new();
        b.push(0, Enter, "main", 0, 0);
        b.push(10, Enter, "Idle", 0, 0);
        b.push(15, Enter, "wait_inner", 0, 0); // nested idle: not re-counted
        b.push(18, Leave, "wait_inner", 0, 0);
        b.push(30, Leave, "Idle", 0, 0);
        b.push(50, Leave, "main", 0, 0);
        b.push(0, Enter, "main", 1, 0);
        b.push(50, Leave, "main", 1, 0);
        let t = b.finish();
        let table = t.idle_time(&IdlePredicate::default()).unwrap();
        assert_eq!(table.lookup("0", "idle_ns"), Some(&Cell::Int(20)));
        assert_eq!(table.lookup("0", "span_ns"), Some(&Cell::Int(50)));
        assert_eq!(table.lookup("0", "idle_frac"), Some(&Cell::Float(0.4)));
        assert_eq!(table.lookup("1", "idle_ns"), Some(&Cell::Int(0)));
        // Idle-heavy rank sorts first.
        assert_eq!(table.row_label(0), "0");
    }

    #[test]
    fn steps_advance_locally_and_across_messages() {
        // Rank 0: op A (step 0), send (step 1).
        // Rank 1: recv must land after the send: step 2, then op B step 3.
        let mut b = TraceBuilder::new().repair(false);
        b.push(0, Enter, "A", 0, 0);
        b.push(5, Leave, "A", 0, 0);
        msg(&mut b, 6, MSG_SEND, 0, 1, 0);
        msg(&mut b, 8, MSG_RECV, 1, 0, 0);
        b.push(9, Enter, "B", 1, 0);
        b.push(12, Leave, "B", 1, 0);
        let t = b.finish();
        let s = t.logical_steps().unwrap();
        let step_of = |name: &str, proc: u32| {
            let ev = t.events();
            (0..ev.len())
                .find(|&i| ev.name(i) == name && ev.process(i) == proc)
                .and_then(|i| s.step[i])
        };
        assert_eq!(step_of("A", 0), Some(0));
        assert_eq!(step_of(MSG_SEND, 0), Some(1));
        assert_eq!(step_of(MSG_RECV, 1), Some(2));
        assert_eq!(step_of("B", 1), Some(3));
    }

    #[test]
    fn wrappers_inherit_max_nested_step() {
        let mut b = TraceBuilder::new().repair(false);
        b.push(0, Enter, "outer", 0, 0);
        b.push(1, Enter, "x", 0, 0);
        b.push(2, Leave, "x", 0, 0);
        b.push(3, Enter, "y", 0, 0);
        b.push(4, Leave, "y", 0, 0);
        b.push(5, Leave, "outer", 0, 0);
        let t = b.finish();
        let s = t.logical_steps().unwrap();
        assert_eq!(s.step[0], Some(1)); // outer carries y's step
        assert_eq!(s.step[1], Some(0)); // x
        assert_eq!(s.step[3], Some(1)); // y
        assert_eq!(s.step[2], None); // Leave rows are untagged
    }

    #[test]
    fn recv_before_send_is_a_cycle() {
        let mut b = TraceBuilder::new().repair(false);
        msg(&mut b, 10, MSG_SEND, 0, 1, 0);
        msg(&mut b, 5, MSG_RECV, 1, 0, 0); // stamped before the send
        let t = b.finish();
        assert!(matches!(
            t.logical_steps(),
            Err(TraceError::CycleDetected { .. })
        ));
    }

    #[test]
    fn crossing_equal_time_recvs_deadlock() {
        // Both ranks receive (at t=5) what the other sends at t=5:
        // neither receive can be scheduled after its send.
        let mut b = TraceBuilder::new().repair(false);
        msg(&mut b, 5, MSG_RECV, 0, 1, 0);
        msg(&mut b, 5, MSG_SEND, 0, 1, 1);
        msg(&mut b, 5, MSG_RECV, 1, 0, 1);
        msg(&mut b, 5, MSG_SEND, 1, 0, 0);
        let t = b.finish();
        assert!(matches!(
            t.logical_steps(),
            Err(TraceError::CycleDetected { .. })
        ));
    }

    #[test]
    fn ping_pong_steps_match_hand_computation() {
        // 0 sends, 1 recvs + sends back, 0 recvs. Hand-derived steps:
        // send0=0, recv1=1, send1=2, recv0=3.
        let mut b = TraceBuilder::new().repair(false);
        msg(&mut b, 0, MSG_SEND, 0, 1, 0);
        msg(&mut b, 10, MSG_RECV, 0, 1, 1);
        msg(&mut b, 2, MSG_RECV, 1, 0, 0);
        msg(&mut b, 4, MSG_SEND, 1, 0, 1);
        let t = b.finish();
        let s = t.logical_steps().unwrap();
        assert_eq!(s.step[0], Some(0)); // rank 0 send
        assert_eq!(s.step[1], Some(3)); // rank 0 recv (send1 step 2, +1)
        assert_eq!(s.step[2], Some(1)); // rank 1 recv
        assert_eq!(s.step[3], Some(2)); // rank 1 send
    }

    #[test]
    fn lateness_flags_the_slow_rank() {
        // Two ranks run "iter" at step 0; rank 1 finishes 40 ns later.
        let mut b = TraceBuilder::new();
        b.push(0, Enter, "iter", 0, 0);
        b.push(10, Leave, "iter", 0, 0);
        b.push(0, Enter, "iter", 1, 0);
        b.push(50, Leave, "iter", 1, 0);
        let t = b.finish();
        let table = t.lateness().unwrap();
        assert_eq!(table.row_label(0), "1"); // worst first
        assert_eq!(table.lookup("1", "max_lateness_ns"), Some(&Cell::Int(40)));
        assert_eq!(table.lookup("0", "max_lateness_ns"), Some(&Cell::Int(0)));
        assert_eq!(table.lookup("1", "at_step"), Some(&Cell::Int(0)));
    }

    #[test]
    fn critical_path_follows_the_binding_message() {
        // Rank 0: work [0,10), send at 10.
        // Rank 1: early [0,3), recv at 12 (waiting on the message), then
        // finish [12,20). Path: rank0 work+send -> hop -> rank1 tail.
        let mut b = TraceBuilder::new().repair(false);
        b.push(0, Enter, "work", 0, 0);
        b.push(10, Leave, "work", 0, 0);
        msg(&mut b, 10, MSG_SEND, 0, 1, 0);
        b.push(0, Enter, "early", 1, 0);
        b.push(3, Leave, "early", 1, 0);
        msg(&mut b, 12, MSG_RECV, 1, 0, 0);
        b.push(12, Enter, "finish", 1, 0);
        b.push(20, Leave, "finish", 1, 0);
        let t = b.finish();
        let p = t.critical_path().unwrap();
        assert!(!p.truncated);
        assert_eq!(p.total_ns, 20);
        assert_eq!(p.segments.len(), 3);
        match p.segments[0] {
            PathSegment::Local { process, start_ts, end_ts, .. } => {
                assert_eq!((process, start_ts, end_ts), (0, 0, 10));
            }
            _ => panic!("expected a local head segment"),
        }
        match p.segments[1] {
            PathSegment::MessageHop { from, to, send_ts, recv_ts, .. } => {
                assert_eq!((from, to, send_ts, recv_ts), (0, 1, 10, 12));
            }
            _ => panic!("expected a message hop"),
        }
        match p.segments[2] {
            PathSegment::Local { process, start_ts, end_ts, .. } => {
                assert_eq!((process, start_ts, end_ts), (1, 12, 20));
            }
            _ => panic!("expected a local tail segment"),
        }
    }

    #[test]
    fn critical_path_ignores_non_binding_message() {
        // The receive at 12 happens after local work ending at 15: the
        // local chain, not the message, determined the finish time.
        let mut b = TraceBuilder::new().repair(false);
        msg(&mut b, 2, MSG_SEND, 0, 1, 0);
        b.push(0, Enter, "local", 1, 0);
        b.push(15, Leave, "local", 1, 0);
        msg(&mut b, 15, MSG_RECV, 1, 0, 0);
        b.push(16, Enter, "tail", 1, 0);
        b.push(20, Leave, "tail", 1, 0);
        let t = b.finish();
        let p = t.critical_path().unwrap();
        assert!(!p.truncated);
        // One purely local segment on rank 1 covering [0,20).
        assert_eq!(p.segments.len(), 1);
        match p.segments[0] {
            PathSegment::Local { process, start_ts, end_ts, .. } => {
                assert_eq!((process, start_ts, end_ts), (1, 0, 20));
            }
            _ => panic!("expected one local segment"),
        }
    }

    #[test]
    fn unmatched_recv_at_stream_head_truncates() {
        let mut b = TraceBuilder::new().repair(false);
        msg(&mut b, 5, MSG_RECV, 0, 9, 0); // sender rank 9 never traced
        b.push(6, Enter, "rest", 0, 0);
        b.push(10, Leave, "rest", 0, 0);
        let t = b.finish();
        let p = t.critical_path().unwrap();
        assert!(p.truncated);
        assert_eq!(p.segments.len(), 1);
    }

    #[test]
    fn critical_path_table_lists_segments_in_order() {
        let mut b = TraceBuilder::new().repair(false);
        b.push(0, Enter, "work", 0, 0);
        b.push(10, Leave, "work", 0, 0);
        msg(&mut b, 10, MSG_SEND, 0, 1, 0);
        msg(&mut b, 12, MSG_RECV, 1, 0, 0);
        b.push(12, Enter, "finish", 1, 0);
        b.push(20, Leave, "finish", 1, 0);
        let t = b.finish();
        let table = t.critical_path_table().unwrap();
        assert_eq!(table.n_rows(), 3);
        assert_eq!(table.cell(0, 0), &Cell::Text("local".to_owned()));
        assert_eq!(table.cell(1, 0), &Cell::Text("message".to_owned()));
        assert_eq!(table.cell(1, 1), &Cell::Text("0->1".to_owned()));
        assert_eq!(table.cell(1, 4), &Cell::Int(2)); // 12 - 10
    }
}
