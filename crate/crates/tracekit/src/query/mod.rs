//! Trace querying: filtering events with a small expression language and
//! comparing profiles across runs.

mod expr;
mod parse;

pub use expr::{glob_match, CmpOp, FieldRef, FilterExpr};
pub use parse::parse_filter;

use std::collections::BTreeMap;

use crate::callgraph::MatchColumns;
use crate::error::{Result, TraceError};
use crate::model::{AttrValue, EventKind, Trace, TraceBuilder};
use crate::profiles::{flat_profile, Metric};
use crate::table::{AnalysisTable, Cell};

/// Attribute set on rows whose timestamp was moved by window clipping.
pub const CLIPPED_ATTR: &str = "clipped";

/// How [`filter`] treats call pairs and time windows.
#[derive(Debug, Clone)]
pub struct FilterOptions {
    /// Keep an Enter/Leave pair whenever either side matches, so calls
    /// survive whole. On by default.
    pub pair_preserving: bool,
    /// Interpret the expression's unique `timestamp between lo and hi`
    /// atom as *overlap* with `[lo, hi)` and clip kept call endpoints
    /// into the window (clipped rows get `clipped=1`). Off by default.
    pub time_clip: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            pair_preserving: true,
            time_clip: false,
        }
    }
}

/// The wall-clock span a row stands for: its call's interval for matched
/// Enter/Leave rows, a point otherwise.
fn row_span(trace: &Trace, m: Option<&MatchColumns>, row: usize) -> (i64, i64) {
    let ev = trace.events();
    let ts = ev.ts(row);
    let Some(m) = m else { return (ts, ts) };
    match ev.kind(row) {
        EventKind::Enter => m.matching[row]
            .map(|l| (ts, ev.ts(l as usize)))
            .unwrap_or((ts, ts)),
        EventKind::Leave => m.matching[row]
            .map(|e| (ev.ts(e as usize), ts))
            .unwrap_or((ts, ts)),
        EventKind::Instant => (ts, ts),
    }
}

/// Selects the events matching `expr` into a new trace.
///
/// Metadata is carried over. The result is not re-repaired: in
/// non-pair-preserving mode half pairs survive as-is.
pub fn filter(trace: &Trace, expr: &FilterExpr, opts: &FilterOptions) -> Result<Trace> {
    let ev = trace.events();
    let n = ev.len();

    let window = if opts.time_clip {
        let count = expr.count_time_between();
        if count != 1 {
            return Err(TraceError::BadExpr {
                msg: format!(
                    "window-clipped filtering needs exactly one `timestamp between` atom, found {count}"
                ),
            });
        }
        let (lo, hi) = expr.time_between_bounds().expect("count checked above");
        let as_ts = |v: &AttrValue| -> Result<i64> {
            match v {
                AttrValue::Int(x) => Ok(*x),
                other => Err(TraceError::BadExpr {
                    msg: format!("time window bounds must be integer nanoseconds, got {other:?}"),
                }),
            }
        };
        Some((as_ts(lo)?, as_ts(hi)?))
    } else {
        None
    };

    let m = if opts.pair_preserving || opts.time_clip {
        Some(trace.matching()?)
    } else {
        None
    };

    let mut keep = vec![false; n];
    for (row, kept) in keep.iter_mut().enumerate() {
        // In clip mode the time atom tests window overlap of the whole
        // call, not the row's own timestamp.
        let tb = window.map(|(lo, hi)| {
            let (s, e) = row_span(trace, m, row);
            if s == e {
                lo <= s && s < hi
            } else {
                s < hi && e > lo
            }
        });
        *kept = expr::eval_row(expr, trace, row, tb);
    }

    if let Some(m) = m {
        for row in 0..n {
            if ev.kind(row) == EventKind::Enter {
                if let Some(l) = m.matching[row] {
                    let l = l as usize;
                    if keep[row] || keep[l] {
                        keep[row] = true;
                        keep[l] = true;
                    }
                }
            }
        }
    }

    let mut b = TraceBuilder::new().repair(false);
    for (row, &kept) in keep.iter().enumerate() {
        if !kept {
            continue;
        }
        let mut ts = ev.ts(row);
        let mut attrs: Vec<(String, AttrValue)> = ev
            .row_attrs(row)
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v.clone()))
            .collect();
        if let (Some((lo, hi)), Some(m)) = (window, m) {
            let new_ts = match ev.kind(row) {
                EventKind::Enter => m.matching[row]
                    .map(|l| (ts, ev.ts(l as usize)))
                    .filter(|&(s, e)| s < e && s < hi && e > lo)
                    .map(|_| ts.max(lo)),
                EventKind::Leave => m.matching[row]
                    .map(|e| (ev.ts(e as usize), ts))
                    .filter(|&(s, e)| s < e && s < hi && e > lo)
                    .map(|_| ts.min(hi)),
                EventKind::Instant => None,
            };
            if let Some(new_ts) = new_ts {
                if new_ts != ts {
                    ts = new_ts;
                    attrs.push((CLIPPED_ATTR.to_owned(), AttrValue::Int(1)));
                }
            }
        }
        b.push_with_attrs(ts, ev.kind(row), ev.name(row), ev.process(row), ev.thread(row), attrs);
    }
    let mut out = b.finish();
    for (k, v) in trace.metadata() {
        out.set_metadata(k, v);
    }
    Ok(out)
}

/// Parses `expr_text` and filters in one step.
pub fn filter_str(trace: &Trace, expr_text: &str, opts: &FilterOptions) -> Result<Trace> {
    filter(trace, &parse_filter(expr_text)?, opts)
}

/// Side-by-side per-function totals across several runs.
///
/// Functions are the union over runs (absent entries are zero). Rows are
/// ordered by the largest value in any run, descending. Column labels
/// default to each run's process count, e.g. `"8p"`.
pub fn multi_run_table(
    runs: &[Trace],
    labels: Option<&[String]>,
    metric: &Metric,
) -> Result<AnalysisTable> {
    if runs.len() < 2 {
        return Err(TraceError::TooFewRuns { got: runs.len() });
    }
    if let Some(l) = labels {
        if l.len() != runs.len() {
            return Err(TraceError::LabelCountMismatch {
                labels: l.len(),
                runs: runs.len(),
            });
        }
    }
    let labels: Vec<String> = match labels {
        Some(l) => l.to_vec(),
        None => runs
            .iter()
            .map(|t| format!("{}p", t.events().processes().len()))
            .collect(),
    };

    let zero = match metric {
        Metric::ExcNs | Metric::IncNs => Cell::Int(0),
        _ => Cell::Float(0.0),
    };
    let mut by_name: BTreeMap<String, Vec<Cell>> = BTreeMap::new();
    for (i, run) in runs.iter().enumerate() {
        let fp = flat_profile(run, metric)?;
        for r in 0..fp.n_rows() {
            by_name
                .entry(fp.row_label(r).to_owned())
                .or_insert_with(|| vec![zero.clone(); runs.len()])[i] =
                fp.cell(r, 0).clone();
        }
    }

    let mut rows: Vec<(f64, String, Vec<Cell>)> = by_name
        .into_iter()
        .map(|(name, cells)| {
            let peak = cells
                .iter()
                .map(|c| c.as_f64().unwrap_or(0.0))
                .fold(f64::NEG_INFINITY, f64::max);
            (peak, name, cells)
        })
        .collect();
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));

    let mut table = AnalysisTable::new("name");
    for label in &labels {
        table.add_column(label, metric.unit());
    }
    for (_, name, cells) in rows {
        table.push_row(&name, cells);
    }
    Ok(table)
}
