//! Communication analysis: message matching, traffic matrices, size
//! histograms, traffic over time, and the communication/computation
//! overlap breakdown.
//!
//! Messages are point events: an Instant named [`MSG_SEND`] on the sender
//! paired with an Instant named [`MSG_RECV`] on the receiver. Both carry a
//! `partner` attribute (the other side's rank) and optional `size` (bytes)
//! and `tag` attributes. Sends and receives pair FIFO within each
//! `(sender, receiver, tag)` channel, which is exactly MPI's non-overtaking
//! rule for a fixed tag.

use std::collections::BTreeMap;

use crate::error::{Result, TraceError};
use crate::intervals::IntervalSet;
use crate::model::{EventKind, Trace};
use crate::profiles::{bin_edges, bin_of};
use crate::table::{AnalysisTable, Cell};

/// Canonical name of a message-send instant.
pub const MSG_SEND: &str = "MpiSend";
/// Canonical name of a message-receive instant.
pub const MSG_RECV: &str = "MpiRecv";

/// A matched send/receive pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageRecord {
    pub sender: u32,
    pub receiver: u32,
    pub send_row: u32,
    pub recv_row: u32,
    pub send_ts: i64,
    pub recv_ts: i64,
    pub bytes: i64,
    pub tag: i64,
}

/// What part a row plays in messaging, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MsgRole {
    None,
    Send,
    Recv,
}

/// Message pairing results (cached on the trace).
#[derive(Debug, Clone)]
pub struct MessageData {
    /// Matched pairs, ordered by `(send_ts, send_row)`.
    pub records: Vec<MessageRecord>,
    /// Send rows with no matching receive, ascending.
    pub unmatched_sends: Vec<u32>,
    /// Receive rows with no matching send, ascending.
    pub unmatched_recvs: Vec<u32>,
    /// Message instants lacking a usable `partner` attribute, ascending.
    pub unroutable: Vec<u32>,
    pub(crate) role: Vec<MsgRole>,
    /// Row-aligned: for a matched receive row, its send row.
    pub(crate) send_of_recv: Vec<Option<u32>>,
}

impl MessageData {
    /// Total number of send instants (matched or not, excluding
    /// unroutable ones).
    pub fn send_count(&self) -> usize {
        self.records.len() + self.unmatched_sends.len()
    }
}

/// One direction of traffic, counted in messages or bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommUnit {
    Count,
    Bytes,
}

impl CommUnit {
    pub fn label(self) -> &'static str {
        match self {
            CommUnit::Count => "count",
            CommUnit::Bytes => "bytes",
        }
    }
}

/// Which event names count as communication in the overlap breakdown.
#[derive(Debug, Clone)]
pub struct CommPredicate {
    pub prefixes: Vec<String>,
    pub exact: Vec<String>,
    pub substrings: Vec<String>,
}

impl Default for CommPredicate {
    /// MPI calls by prefix, the canonical message instants, and anything
    /// mentioning nccl (GPU collectives).
    fn default() -> Self {
        CommPredicate {
            prefixes: vec!["MPI_".to_owned()],
            exact: vec![MSG_SEND.to_owned(), MSG_RECV.to_owned()],
            substrings: vec!["nccl".to_owned()],
        }
    }
}

impl CommPredicate {
    pub fn matches(&self, name: &str) -> bool {
        self.prefixes.iter().any(|p| name.starts_with(p.as_str()))
            || self.exact.iter().any(|e| e == name)
            || self.substrings.iter().any(|s| name.contains(s.as_str()))
    }
}

impl Trace {
    /// Message pairing (cached). Never fails: defects are reported in the
    /// unmatched/unroutable lists.
    pub fn messages(&self) -> &MessageData {
        self.events
            .derived
            .messages
            .get_or_init(|| compute_messages(self))
    }

    /// P×P traffic matrix; `cell[src][dst]` counts messages (or sums
    /// bytes) sent from `src` to `dst`. Built from every send instant,
    /// matched or not, so marginals are always consistent.
    pub fn comm_matrix(&self, unit: CommUnit) -> Result<AnalysisTable> {
        comm_matrix(self, unit)
    }

    /// Per-process totals: messages (or bytes) sent and received. These
    /// are exactly the row and column sums of [`Trace::comm_matrix`].
    pub fn comm_by_process(&self, unit: CommUnit) -> Result<AnalysisTable> {
        comm_by_process(self, unit)
    }

    /// Histogram of message sizes over equal-width bins spanning
    /// `[min_size, max_size]`.
    pub fn message_histogram(&self, bins: usize) -> Result<AnalysisTable> {
        message_histogram(self, bins)
    }

    /// Message count and bytes per time bin (binned by send timestamp).
    pub fn comm_over_time(&self, bins: usize) -> Result<AnalysisTable> {
        comm_over_time(self, bins)
    }

    /// Splits each process's wall-clock span into four exact categories:
    /// computation only, computation overlapped with communication,
    /// communication only, and other (neither).
    pub fn comm_comp_breakdown(&self, pred: &CommPredicate) -> Result<AnalysisTable> {
        comm_comp_breakdown(self, pred)
    }
}

fn attr_i64(trace: &Trace, row: usize, key: &str) -> Option<i64> {
    trace.events().attr(row, key).and_then(|v| v.as_i64())
}

fn compute_messages(trace: &Trace) -> MessageData {
    let ev = trace.events();
    let n = ev.len();
    let mut role = vec![MsgRole::None; n];
    let mut send_of_recv: Vec<Option<u32>> = vec![None; n];
    let mut unroutable: Vec<u32> = Vec::new();

    // Collect per-channel queues ordered by (timestamp, row).
    type Channel = (u32, u32, i64);
    let mut sends: BTreeMap<Channel, Vec<u32>> = BTreeMap::new();
    let mut recvs: BTreeMap<Channel, Vec<u32>> = BTreeMap::new();
    let mut send_rows: Vec<u32> = Vec::new();
    let mut recv_rows: Vec<u32> = Vec::new();

    for (i, slot) in role.iter_mut().enumerate() {
        if ev.kind(i) != EventKind::Instant {
            continue;
        }
        let name = ev.name(i);
        let is_send = name == MSG_SEND;
        let is_recv = name == MSG_RECV;
        if !is_send && !is_recv {
            continue;
        }
        let partner = attr_i64(trace, i, "partner").and_then(|p| u32::try_from(p).ok());
        let Some(partner) = partner else {
            unroutable.push(i as u32);
            continue;
        };
        *slot = if is_send { MsgRole::Send } else { MsgRole::Recv };
        let tag = attr_i64(trace, i, "tag").unwrap_or(0);
        if is_send {
            sends
                .entry((ev.process(i), partner, tag))
                .or_default()
                .push(i as u32);
            send_rows.push(i as u32);
        } else {
            recvs
                .entry((partner, ev.process(i), tag))
                .or_default()
                .push(i as u32);
            recv_rows.push(i as u32);
        }
    }

    // Rows within a channel must pair in timestamp order across streams.
    let by_time = |ev: &crate::model::EventTable, rows: &mut Vec<u32>| {
        rows.sort_by_key(|&r| (ev.ts(r as usize), r));
    };
    for q in sends.values_mut() {
        by_time(ev, q);
    }
    for q in recvs.values_mut() {
        by_time(ev, q);
    }

    let mut records: Vec<MessageRecord> = Vec::new();
    let mut unmatched_sends: Vec<u32> = Vec::new();
    let mut unmatched_recvs: Vec<u32> = Vec::new();

    for (channel, send_q) in &sends {
        let empty = Vec::new();
        let recv_q = recvs.get(channel).unwrap_or(&empty);
        let paired = send_q.len().min(recv_q.len());
        for k in 0..paired {
            let (s, r) = (send_q[k] as usize, recv_q[k] as usize);
            let bytes = message_size(trace, s).or_else(|| message_size(trace, r)).unwrap_or(0);
            records.push(MessageRecord {
                sender: channel.0,
                receiver: channel.1,
                send_row: send_q[k],
                recv_row: recv_q[k],
                send_ts: ev.ts(s),
                recv_ts: ev.ts(r),
                bytes,
                tag: channel.2,
            });
            send_of_recv[r] = Some(send_q[k]);
        }
        unmatched_sends.extend_from_slice(&send_q[paired..]);
    }
    for (channel, recv_q) in &recvs {
        let paired = sends.get(channel).map_or(0, |q| q.len().min(recv_q.len()));
        unmatched_recvs.extend_from_slice(&recv_q[paired..]);
    }

    records.sort_by_key(|r| (r.send_ts, r.send_row));
    unmatched_sends.sort_unstable();
    unmatched_recvs.sort_unstable();

    MessageData {
        records,
        unmatched_sends,
        unmatched_recvs,
        unroutable,
        role,
        send_of_recv,
    }
}

/// Size of a message instant in bytes (non-negative; floats round).
fn message_size(trace: &Trace, row: usize) -> Option<i64> {
    match trace.events().attr(row, "size")? {
        crate::model::AttrValue::Int(v) => Some((*v).max(0)),
        crate::model::AttrValue::Float(v) => Some(v.round().max(0.0) as i64),
        crate::model::AttrValue::Str(_) => None,
    }
}

/// Every send instant as (sender, receiver, bytes, send_ts), matched or
/// not. The traffic analyses all consume this single view.
fn all_sends(trace: &Trace) -> Vec<(u32, u32, i64, i64)> {
    let ev = trace.events();
    let msgs = trace.messages();
    let mut out: Vec<(u32, u32, i64, i64)> = msgs
        .records
        .iter()
        .map(|r| (r.sender, r.receiver, r.bytes, r.send_ts))
        .collect();
    for &row in &msgs.unmatched_sends {
        let i = row as usize;
        let receiver = attr_i64(trace, i, "partner")
            .and_then(|p| u32::try_from(p).ok())
            .expect("unmatched sends always carry a valid partner");
        out.push((
            ev.process(i),
            receiver,
            message_size(trace, i).unwrap_or(0),
            ev.ts(i),
        ));
    }
    out.sort_unstable();
    out
}

/// Number of process slots: one past the largest rank seen as an event
/// location or a message endpoint.
fn process_slots(trace: &Trace, sends: &[(u32, u32, i64, i64)]) -> usize {
    let mut max_rank = trace.events().processes().into_iter().max().unwrap_or(0);
    for &(src, dst, _, _) in sends {
        max_rank = max_rank.max(src).max(dst);
    }
    max_rank as usize + 1
}

fn comm_matrix(trace: &Trace, unit: CommUnit) -> Result<AnalysisTable> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let sends = all_sends(trace);
    if sends.is_empty() {
        return Err(TraceError::NoCommData);
    }
    let p = process_slots(trace, &sends);
    let mut cells = vec![vec![0i64; p]; p];
    for &(src, dst, bytes, _) in &sends {
        cells[src as usize][dst as usize] += match unit {
            CommUnit::Count => 1,
            CommUnit::Bytes => bytes,
        };
    }

    let mut table = AnalysisTable::new("process");
    for dst in 0..p {
        table.add_column(&dst.to_string(), Some(unit.label()));
    }
    for (src, row) in cells.into_iter().enumerate() {
        table.push_row(&src.to_string(), row.into_iter().map(Cell::Int).collect());
    }
    Ok(table)
}

fn comm_by_process(trace: &Trace, unit: CommUnit) -> Result<AnalysisTable> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let sends = all_sends(trace);
    if sends.is_empty() {
        return Err(TraceError::NoCommData);
    }
    let p = process_slots(trace, &sends);
    let mut sent = vec![0i64; p];
    let mut received = vec![0i64; p];
    for &(src, dst, bytes, _) in &sends {
        let v = match unit {
            CommUnit::Count => 1,
            CommUnit::Bytes => bytes,
        };
        sent[src as usize] += v;
        received[dst as usize] += v;
    }

    let mut table = AnalysisTable::new("process");
    table.add_column("sent", Some(unit.label()));
    table.add_column("received", Some(unit.label()));
    for rank in 0..p {
        table.push_row(
            &rank.to_string(),
            vec![Cell::Int(sent[rank]), Cell::Int(received[rank])],
        );
    }
    Ok(table)
}

fn message_histogram(trace: &Trace, bins: usize) -> Result<AnalysisTable> {
    if bins == 0 {
        return Err(TraceError::BadBinCount);
    }
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let sends = all_sends(trace);
    if sends.is_empty() {
        return Err(TraceError::NoCommData);
    }
    let lo = sends.iter().map(|&(_, _, b, _)| b).min().unwrap();
    let hi = sends.iter().map(|&(_, _, b, _)| b).max().unwrap();
    let edges = bin_edges(lo, hi, bins);
    let mut counts = vec![0i64; bins];
    for &(_, _, bytes, _) in &sends {
        counts[bin_of(&edges, bytes)] += 1;
    }

    let mut table = AnalysisTable::new("size_lo");
    table.add_column("size_hi", Some("bytes"));
    table.add_column("count", None);
    for b in 0..bins {
        table.push_row(
            &edges[b].to_string(),
            vec![Cell::Int(edges[b + 1]), Cell::Int(counts[b])],
        );
    }
    Ok(table)
}

fn comm_over_time(trace: &Trace, bins: usize) -> Result<AnalysisTable> {
    if bins == 0 {
        return Err(TraceError::BadBinCount);
    }
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let sends = all_sends(trace);
    if sends.is_empty() {
        return Err(TraceError::NoCommData);
    }
    let (t_min, t_max) = trace.time_span()?;
    let edges = bin_edges(t_min, t_max, bins);
    let mut count = vec![0i64; bins];
    let mut bytes = vec![0i64; bins];
    for &(_, _, b, ts) in &sends {
        let bin = bin_of(&edges, ts);
        count[bin] += 1;
        bytes[bin] += b;
    }

    let mut table = AnalysisTable::new("bin_start");
    table.add_column("count", None);
    table.add_column("bytes", Some("bytes"));
    for b in 0..bins {
        table.push_row(
            &edges[b].to_string(),
            vec![Cell::Int(count[b]), Cell::Int(bytes[b])],
        );
    }
    Ok(table)
}

fn comm_comp_breakdown(trace: &Trace, pred: &CommPredicate) -> Result<AnalysisTable> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let m = trace.matching()?;
    let ev = trace.events();

    // Communication: inclusive intervals of comm-named calls.
    // Computation: exclusive (innermost-active) intervals of all other
    // calls. Both unioned per process across its threads.
    let mut comm_raw: BTreeMap<u32, Vec<(i64, i64)>> = BTreeMap::new();
    let mut comp_raw: BTreeMap<u32, Vec<(i64, i64)>> = BTreeMap::new();
    let mut span: BTreeMap<u32, (i64, i64)> = BTreeMap::new();

    for stream in ev.streams() {
        for i in stream.rows() {
            let t = ev.ts(i);
            let entry = span.entry(stream.process).or_insert((t, t));
            entry.0 = entry.0.min(t);
            entry.1 = entry.1.max(t);

            if ev.kind(i) == EventKind::Enter && pred.matches(ev.name(i)) {
                if let Some(j) = m.matching[i] {
                    comm_raw
                        .entry(stream.process)
                        .or_default()
                        .push((ev.ts(i), ev.ts(j as usize)));
                }
            }
        }
    }
    crate::callgraph::for_each_exclusive_segment(ev, m, |enter_row, lo, hi| {
        let row = enter_row as usize;
        if !pred.matches(ev.name(row)) {
            comp_raw
                .entry(ev.process(row))
                .or_default()
                .push((lo, hi));
        }
    });

    let mut table = AnalysisTable::new("process");
    table.add_column("comp_ns", Some("ns"));
    table.add_column("overlap_ns", Some("ns"));
    table.add_column("comm_ns", Some("ns"));
    table.add_column("other_ns", Some("ns"));

    let mut totals = [0i64; 4];
    for (&process, &(lo, hi)) in &span {
        let comm = IntervalSet::from_intervals(comm_raw.remove(&process).unwrap_or_default());
        let comp = IntervalSet::from_intervals(comp_raw.remove(&process).unwrap_or_default());
        let overlap = comm.intersect(&comp).measure();
        let comm_only = comm.measure() - overlap;
        let comp_only = comp.measure() - overlap;
        let covered = comp.measure() + comm.measure() - overlap;
        let other = (hi - lo) - covered;
        let cells = [comp_only, overlap, comm_only, other];
        for (t, c) in totals.iter_mut().zip(cells) {
            *t += c;
        }
        table.push_row(
            &process.to_string(),
            cells.into_iter().map(Cell::Int).collect(),
        );
    }
    table.push_row("total", totals.into_iter().map(Cell::Int).collect());
    Ok(table)
}
