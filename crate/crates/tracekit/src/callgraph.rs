//! Call-structure recovery: enter/leave matching, caller columns, the
//! calling context tree, and inclusive/exclusive metrics.
//!
//! All results here are derived columns on the event table, computed once
//! per trace and cached. Matching walks each `(process, thread)` stream with
//! an explicit stack; every later analysis (profiles, overlap, critical
//! path) builds on its output instead of re-deriving call structure.

use crate::error::{Result, TraceError};
use crate::model::{EventKind, EventTable, NameId, Trace};

/// Row-aligned call-structure columns.
///
/// `matching[i]` pairs an Enter with its Leave (and vice versa); unmatched
/// rows hold `None`. `parent[i]` is the row of the innermost Enter open when
/// row `i` occurred. `depth[i]` is the nesting depth: a top-level Enter is
/// 0, its Leave is 0, an Instant directly inside it is 1, a top-level
/// Instant is 0.
#[derive(Debug, Clone)]
pub struct MatchColumns {
    pub matching: Vec<Option<u32>>,
    pub parent: Vec<Option<u32>>,
    pub depth: Vec<u32>,
    /// True for Enter rows that contain at least one nested call.
    pub has_child_call: Vec<bool>,
    /// Leave rows that did not close the innermost open call (lenient mode).
    pub mismatched_leaves: u32,
    /// Enter rows still open at the end of their stream.
    pub unclosed_enters: u32,
}

impl MatchColumns {
    /// True if `row` is an Enter with no nested call (a leaf call).
    pub fn is_leaf_call(&self, table: &EventTable, row: usize) -> bool {
        table.kind(row) == EventKind::Enter
            && self.matching[row].is_some()
            && !self.has_child_call[row]
    }
}

/// Internal marker for a strict-mode matching failure; converted to
/// [`TraceError::MismatchedLeave`] at the API boundary.
#[derive(Debug, Clone, Copy)]
pub struct MatchFailure {
    pub row: usize,
}

impl From<MatchFailure> for TraceError {
    fn from(f: MatchFailure) -> Self {
        TraceError::MismatchedLeave { row: f.row }
    }
}

/// Per-call time metrics, row-aligned (values sit on Enter rows).
///
/// `inc[i]` is leave-time minus enter-time. `exc[i]` is `inc[i]` minus the
/// inclusive time of the call's direct children. Unmatched rows hold `None`.
#[derive(Debug, Clone)]
pub struct TimeMetrics {
    pub inc: Vec<Option<i64>>,
    pub exc: Vec<Option<i64>>,
}

/// Per-call metrics derived from a numeric attribute counter (e.g. bytes,
/// flops). Inclusive = counter delta across the enter/leave pair; exclusive
/// subtracts the children's inclusive deltas.
#[derive(Debug, Clone)]
pub struct AttrMetrics {
    pub inc: Vec<Option<f64>>,
    pub exc: Vec<Option<f64>>,
}

/// One node of the calling context tree.
#[derive(Debug, Clone)]
pub struct CctNode {
    pub name: NameId,
    pub parent: Option<u32>,
    pub children: Vec<u32>,
}

/// The calling context tree: the union over all processes, threads, and
/// time of every observed call path. A forest with one root per distinct
/// top-level name; recursion produces one node per distinct path, so `f`
/// calling `f` yields two nodes.
#[derive(Debug, Clone, Default)]
pub struct Cct {
    nodes: Vec<CctNode>,
    roots: Vec<u32>,
}

impl Cct {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: u32) -> &CctNode {
        &self.nodes[id as usize]
    }

    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// Depth of a node (roots are 0).
    pub fn depth(&self, id: u32) -> u32 {
        let mut d = 0;
        let mut cur = self.nodes[id as usize].parent;
        while let Some(p) = cur {
            d += 1;
            cur = self.nodes[p as usize].parent;
        }
        d
    }

    /// The call path from root to `id` as name ids.
    pub fn path(&self, id: u32) -> Vec<NameId> {
        let mut out = vec![self.nodes[id as usize].name];
        let mut cur = self.nodes[id as usize].parent;
        while let Some(p) = cur {
            out.push(self.nodes[p as usize].name);
            cur = self.nodes[p as usize].parent;
        }
        out.reverse();
        out
    }

    fn find_or_insert(&mut self, parent: Option<u32>, name: NameId) -> u32 {
        let siblings: &[u32] = match parent {
            Some(p) => &self.nodes[p as usize].children,
            None => &self.roots,
        };
        for &c in siblings {
            if self.nodes[c as usize].name == name {
                return c;
            }
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(CctNode {
            name,
            parent,
            children: Vec::new(),
        });
        match parent {
            Some(p) => self.nodes[p as usize].children.push(id),
            None => self.roots.push(id),
        }
        id
    }
}

/// The tree plus the row → node column (`Some` on Enter rows).
#[derive(Debug, Clone)]
pub struct CctData {
    pub cct: Cct,
    pub node_of_row: Vec<Option<u32>>,
}

impl Trace {
    /// Enter/leave matching and caller columns (cached).
    ///
    /// Lenient traces record mismatched Leaves in
    /// [`MatchColumns::mismatched_leaves`] and leave them unmatched; strict
    /// traces fail with [`TraceError::MismatchedLeave`] naming the first
    /// offending row. Re-running on an unchanged trace returns the identical
    /// cached columns.
    pub fn matching(&self) -> Result<&MatchColumns> {
        let table = &self.events;
        table
            .derived
            .matching
            .get_or_init(|| compute_matching(table))
            .as_ref()
            .map_err(|&f| f.into())
    }

    /// Per-call inclusive/exclusive wall time (cached).
    pub fn time_metrics(&self) -> Result<&TimeMetrics> {
        let m = self.matching()?;
        Ok(self
            .events
            .derived
            .metrics
            .get_or_init(|| compute_time_metrics(&self.events, m)))
    }

    /// The calling context tree and the row → node column (cached).
    pub fn cct_data(&self) -> Result<&CctData> {
        let m = self.matching()?;
        Ok(self
            .events
            .derived
            .cct
            .get_or_init(|| compute_cct(&self.events, m)))
    }

    /// The calling context tree (cached).
    pub fn cct(&self) -> Result<&Cct> {
        Ok(&self.cct_data()?.cct)
    }

    /// Inclusive/exclusive deltas of a numeric attribute counter across each
    /// call (not cached; computed per key).
    ///
    /// Fails with [`TraceError::MissingMetric`] if no event carries the key,
    /// or if some enter/leave pair has the counter on exactly one side.
    pub fn attr_metrics(&self, key: &str) -> Result<AttrMetrics> {
        let table = &self.events;
        if !table.has_attr_key(key) {
            return Err(TraceError::MissingMetric {
                metric: key.to_owned(),
                msg: "no event carries this attribute".to_owned(),
            });
        }
        let m = self.matching()?;
        let n = table.len();
        let mut inc: Vec<Option<f64>> = vec![None; n];

        let numeric = |row: usize| -> Result<Option<f64>> {
            match table.attr(row, key) {
                None => Ok(None),
                Some(v) => v.as_f64().map(Some).ok_or_else(|| TraceError::MissingMetric {
                    metric: key.to_owned(),
                    msg: format!("non-numeric value at row {row}"),
                }),
            }
        };

        for (i, slot) in inc.iter_mut().enumerate() {
            if table.kind(i) != EventKind::Enter {
                continue;
            }
            let Some(j) = m.matching[i] else { continue };
            match (numeric(i)?, numeric(j as usize)?) {
                (Some(a), Some(b)) => *slot = Some(b - a),
                (None, None) => {}
                _ => {
                    return Err(TraceError::MissingMetric {
                        metric: key.to_owned(),
                        msg: format!(
                            "attribute present on only one side of the call at rows {i}/{j}"
                        ),
                    })
                }
            }
        }

        let mut exc = inc.clone();
        for (i, &child_inc) in inc.iter().enumerate() {
            if table.kind(i) != EventKind::Enter {
                continue;
            }
            if let (Some(child_inc), Some(p)) = (child_inc, m.parent[i]) {
                if let Some(parent_exc) = exc[p as usize].as_mut() {
                    *parent_exc -= child_inc;
                }
            }
        }
        Ok(AttrMetrics { inc, exc })
    }
}

fn compute_matching(table: &EventTable) -> std::result::Result<MatchColumns, MatchFailure> {
    let n = table.len();
    let mut matching: Vec<Option<u32>> = vec![None; n];
    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut depth: Vec<u32> = vec![0; n];
    let mut has_child_call: Vec<bool> = vec![false; n];
    let mut mismatched = 0u32;
    let mut unclosed = 0u32;

    let mut stack: Vec<u32> = Vec::new();
    for stream in table.streams() {
        stack.clear();
        for i in stream.rows() {
            match table.kind(i) {
                EventKind::Enter => {
                    if let Some(&top) = stack.last() {
                        parent[i] = Some(top);
                        has_child_call[top as usize] = true;
                    }
                    depth[i] = stack.len() as u32;
                    stack.push(i as u32);
                }
                EventKind::Leave => {
                    let closes_top = stack
                        .last()
                        .is_some_and(|&top| table.name_id(top as usize) == table.name_id(i));
                    if closes_top {
                        let top = stack.pop().unwrap();
                        matching[i] = Some(top);
                        matching[top as usize] = Some(i as u32);
                        parent[i] = parent[top as usize];
                        depth[i] = depth[top as usize];
                    } else {
                        if table.strict {
                            return Err(MatchFailure { row: i });
                        }
                        mismatched += 1;
                        parent[i] = stack.last().copied();
                        depth[i] = stack.len() as u32;
                    }
                }
                EventKind::Instant => {
                    parent[i] = stack.last().copied();
                    depth[i] = stack.len() as u32;
                }
            }
        }
        unclosed += stack.len() as u32;
    }

    Ok(MatchColumns {
        matching,
        parent,
        depth,
        has_child_call,
        mismatched_leaves: mismatched,
        unclosed_enters: unclosed,
    })
}

fn compute_time_metrics(table: &EventTable, m: &MatchColumns) -> TimeMetrics {
    let n = table.len();
    let mut inc: Vec<Option<i64>> = vec![None; n];
    for (i, slot) in inc.iter_mut().enumerate() {
        if table.kind(i) == EventKind::Enter {
            if let Some(j) = m.matching[i] {
                *slot = Some(table.ts(j as usize) - table.ts(i));
            }
        }
    }
    // Exclusive = inclusive minus direct children's inclusive. Matched
    // children of a matched parent always nest inside it (stack discipline
    // on a time-sorted stream), so the result is non-negative.
    let mut exc = inc.clone();
    for (i, &child_inc) in inc.iter().enumerate() {
        if table.kind(i) != EventKind::Enter {
            continue;
        }
        if let (Some(child_inc), Some(p)) = (child_inc, m.parent[i]) {
            if let Some(parent_exc) = exc[p as usize].as_mut() {
                *parent_exc -= child_inc;
            }
        }
    }
    TimeMetrics { inc, exc }
}

fn compute_cct(table: &EventTable, m: &MatchColumns) -> CctData {
    let mut cct = Cct::default();
    let mut node_of_row: Vec<Option<u32>> = vec![None; table.len()];
    let mut node_stack: Vec<u32> = Vec::new();

    for stream in table.streams() {
        node_stack.clear();
        for i in stream.rows() {
            match table.kind(i) {
                EventKind::Enter => {
                    let id = cct.find_or_insert(node_stack.last().copied(), table.name_id(i));
                    node_of_row[i] = Some(id);
                    node_stack.push(id);
                }
                EventKind::Leave => {
                    if m.matching[i].is_some() {
                        node_stack.pop();
                    }
                }
                EventKind::Instant => {}
            }
        }
    }
    CctData { cct, node_of_row }
}

/// Calls `f(enter_row, lo, hi)` for every maximal half-open time segment
/// `[lo, hi)` during which the call at `enter_row` was the innermost open
/// call on its stream. Segments of one call are disjoint and their total
/// length equals the call's exclusive time.
///
/// Instants are not boundaries; zero-length segments are skipped.
pub(crate) fn for_each_exclusive_segment<F: FnMut(u32, i64, i64)>(
    table: &EventTable,
    m: &MatchColumns,
    mut f: F,
) {
    let mut stack: Vec<u32> = Vec::new();
    for stream in table.streams() {
        stack.clear();
        let mut prev_ts: Option<i64> = None;
        for i in stream.rows() {
            let kind = table.kind(i);
            if kind == EventKind::Instant {
                continue;
            }
            let t = table.ts(i);
            if let (Some(p), Some(&top)) = (prev_ts, stack.last()) {
                if t > p {
                    f(top, p, t);
                }
            }
            match kind {
                EventKind::Enter => stack.push(i as u32),
                EventKind::Leave => {
                    if m.matching[i].is_some() {
                        stack.pop();
                    }
                }
                EventKind::Instant => unreachable!(),
            }
            prev_ts = Some(t);
        }
    }
}
