//! Aggregated performance profiles: flat per-function totals, binned
//! time profiles, and numeric series derivation for pattern analysis.

use std::collections::BTreeMap;

use crate::callgraph::for_each_exclusive_segment;
use crate::error::{Result, TraceError};
use crate::model::{EventKind, NameId, Trace};
use crate::table::{AnalysisTable, Cell};

/// What to aggregate per call.
///
/// Time metrics are exact integer nanoseconds; attribute metrics are the
/// `f64` deltas of a numeric counter attribute across each call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Metric {
    /// Exclusive wall time (call minus its direct children).
    ExcNs,
    /// Inclusive wall time (leave minus enter).
    IncNs,
    /// Inclusive delta of a counter attribute.
    AttrInc(String),
    /// Exclusive delta of a counter attribute.
    AttrExc(String),
}

impl Metric {
    /// Parses a metric spec: `exc_ns`, `inc_ns`, `attr:<key>`, or
    /// `attr_exc:<key>`.
    pub fn parse(spec: &str) -> Result<Metric> {
        if let Some(key) = spec.strip_prefix("attr_exc:") {
            if !key.is_empty() {
                return Ok(Metric::AttrExc(key.to_owned()));
            }
        } else if let Some(key) = spec.strip_prefix("attr:") {
            if !key.is_empty() {
                return Ok(Metric::AttrInc(key.to_owned()));
            }
        }
        match spec {
            "exc_ns" => Ok(Metric::ExcNs),
            "inc_ns" => Ok(Metric::IncNs),
            _ => Err(TraceError::MissingMetric {
                metric: spec.to_owned(),
                msg: "expected exc_ns, inc_ns, attr:<key>, or attr_exc:<key>".to_owned(),
            }),
        }
    }

    /// Column label used in result tables; identical to the parseable spec.
    pub fn label(&self) -> String {
        match self {
            Metric::ExcNs => "exc_ns".to_owned(),
            Metric::IncNs => "inc_ns".to_owned(),
            Metric::AttrInc(k) => format!("attr:{k}"),
            Metric::AttrExc(k) => format!("attr_exc:{k}"),
        }
    }

    pub fn unit(&self) -> Option<&'static str> {
        match self {
            Metric::ExcNs | Metric::IncNs => Some("ns"),
            _ => None,
        }
    }
}

/// Per-call metric values, aligned to Enter rows.
pub(crate) enum MetricValues {
    Time(Vec<Option<i64>>),
    Attr(Vec<Option<f64>>),
}

pub(crate) fn metric_values(trace: &Trace, metric: &Metric) -> Result<MetricValues> {
    Ok(match metric {
        Metric::ExcNs => MetricValues::Time(trace.time_metrics()?.exc.clone()),
        Metric::IncNs => MetricValues::Time(trace.time_metrics()?.inc.clone()),
        Metric::AttrInc(k) => MetricValues::Attr(trace.attr_metrics(k)?.inc),
        Metric::AttrExc(k) => MetricValues::Attr(trace.attr_metrics(k)?.exc),
    })
}

/// Per-function totals of a metric, sorted descending (ties broken by
/// name). Integer metrics stay exact integers.
pub fn flat_profile(trace: &Trace, metric: &Metric) -> Result<AnalysisTable> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let vals = metric_values(trace, metric)?;
    let ev = trace.events();

    let mut table = AnalysisTable::new("name");
    table.add_column(&metric.label(), metric.unit());

    match vals {
        MetricValues::Time(v) => {
            let mut totals: BTreeMap<NameId, i64> = BTreeMap::new();
            for (i, val) in v.iter().enumerate() {
                if let Some(x) = val {
                    *totals.entry(ev.name_id(i)).or_default() += x;
                }
            }
            let mut rows: Vec<(&str, i64)> = totals
                .into_iter()
                .map(|(id, total)| (ev.resolve(id), total))
                .collect();
            rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            for (name, total) in rows {
                table.push_row(name, vec![Cell::Int(total)]);
            }
        }
        MetricValues::Attr(v) => {
            let mut totals: BTreeMap<NameId, f64> = BTreeMap::new();
            for (i, val) in v.iter().enumerate() {
                if let Some(x) = val {
                    *totals.entry(ev.name_id(i)).or_default() += x;
                }
            }
            let mut rows: Vec<(&str, f64)> = totals
                .into_iter()
                .map(|(id, total)| (ev.resolve(id), total))
                .collect();
            rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            for (name, total) in rows {
                table.push_row(name, vec![Cell::Float(total)]);
            }
        }
    }
    Ok(table)
}

/// Integer bin edges that partition `[t_min, t_max)` exactly: `edge_k =
/// t_min + floor(span * k / bins)`. Widths differ by at most 1 ns.
pub(crate) fn bin_edges(t_min: i64, t_max: i64, bins: usize) -> Vec<i64> {
    let span = (t_max - t_min) as i128;
    (0..=bins)
        .map(|k| t_min + (span * k as i128 / bins as i128) as i64)
        .collect()
}

/// Locates the bin of timestamp `t` given edges from [`bin_edges`].
pub(crate) fn bin_of(edges: &[i64], t: i64) -> usize {
    // Rightmost bin whose start is <= t; the final timestamp belongs to the
    // last bin.
    let idx = edges.partition_point(|&e| e <= t);
    idx.saturating_sub(1).min(edges.len().saturating_sub(2))
}

/// Exclusive time of every function, split across `bins` equal time bins
/// spanning the trace. Cell `(b, f)` is the exact number of nanoseconds in
/// bin `b` during which some call of `f` was the innermost open call on its
/// stream, summed over all processes and threads.
///
/// Column sums over all bins therefore equal the flat exclusive-time
/// profile; row sums never exceed `bin_width * stream_count`.
///
/// Rows are labeled with the bin's start timestamp; columns are ordered by
/// total exclusive time, descending.
pub fn time_profile(trace: &Trace, bins: usize) -> Result<AnalysisTable> {
    if bins == 0 {
        return Err(TraceError::BadBinCount);
    }
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let m = trace.matching()?;
    let ev = trace.events();
    let (t_min, t_max) = trace.time_span()?;
    let edges = bin_edges(t_min, t_max, bins);

    // Accumulate exact per-(bin, name) nanoseconds.
    let mut cells: BTreeMap<NameId, Vec<i64>> = BTreeMap::new();
    for_each_exclusive_segment(ev, m, |enter_row, lo, hi| {
        let col = cells
            .entry(ev.name_id(enter_row as usize))
            .or_insert_with(|| vec![0i64; bins]);
        let mut b = bin_of(&edges, lo);
        while b < bins && edges[b] < hi {
            let overlap = hi.min(edges[b + 1]) - lo.max(edges[b]);
            if overlap > 0 {
                col[b] += overlap;
            }
            b += 1;
        }
    });

    // Order columns by total, descending (ties by name) — same hierarchy a
    // flat profile would show.
    let mut order: Vec<(NameId, i64)> = cells
        .iter()
        .map(|(&id, col)| (id, col.iter().sum::<i64>()))
        .collect();
    order.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| ev.resolve(a.0).cmp(ev.resolve(b.0)))
    });

    let mut table = AnalysisTable::new("bin_start");
    for &(id, _) in &order {
        table.add_column(ev.resolve(id), Some("ns"));
    }
    for b in 0..bins {
        let row: Vec<Cell> = order
            .iter()
            .map(|&(id, _)| Cell::Int(cells[&id][b]))
            .collect();
        table.push_row(&edges[b].to_string(), row);
    }
    Ok(table)
}

/// A numeric series extracted from a trace, with one anchor timestamp per
/// point (used to map pattern indices back to trace time).
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub timestamps: Vec<i64>,
}

impl Series {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Ways to turn a trace into a numeric series.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesSpec {
    /// Inclusive duration of every completed call of `name`, in event
    /// order.
    CallDurations { name: String },
    /// Gaps between consecutive occurrences (Enter or Instant) of `name`.
    InterArrival { name: String },
    /// Exclusive time of `name` in each of `bins` time bins.
    BinnedExclusive { name: String, bins: usize },
    /// Total event count per time bin.
    EventRate { bins: usize },
}

/// Extracts a numeric series from the trace.
pub fn derive_series(trace: &Trace, spec: &SeriesSpec) -> Result<Series> {
    if trace.events().is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let ev = trace.events();
    match spec {
        SeriesSpec::CallDurations { name } => {
            let metrics = trace.time_metrics()?;
            let mut points: Vec<(i64, f64)> = Vec::new();
            for i in 0..ev.len() {
                if ev.kind(i) == EventKind::Enter && ev.name(i) == name {
                    if let Some(inc) = metrics.inc[i] {
                        points.push((ev.ts(i), inc as f64));
                    }
                }
            }
            if points.is_empty() {
                return Err(TraceError::NoOccurrences { name: name.clone() });
            }
            points.sort_by_key(|&(t, _)| t);
            Ok(Series {
                timestamps: points.iter().map(|&(t, _)| t).collect(),
                values: points.into_iter().map(|(_, v)| v).collect(),
            })
        }
        SeriesSpec::InterArrival { name } => {
            let mut times: Vec<i64> = (0..ev.len())
                .filter(|&i| {
                    matches!(ev.kind(i), EventKind::Enter | EventKind::Instant)
                        && ev.name(i) == name
                })
                .map(|i| ev.ts(i))
                .collect();
            if times.is_empty() {
                return Err(TraceError::NoOccurrences { name: name.clone() });
            }
            times.sort_unstable();
            Ok(Series {
                values: times.windows(2).map(|w| (w[1] - w[0]) as f64).collect(),
                timestamps: times[..times.len() - 1].to_vec(),
            })
        }
        SeriesSpec::BinnedExclusive { name, bins } => {
            let profile = time_profile(trace, *bins)?;
            let col = profile
                .column_index(name)
                .ok_or_else(|| TraceError::NoOccurrences { name: name.clone() })?;
            Ok(Series {
                values: (0..profile.n_rows())
                    .map(|r| profile.cell(r, col).as_f64().unwrap_or(0.0))
                    .collect(),
                timestamps: (0..profile.n_rows())
                    .map(|r| profile.row_label(r).parse::<i64>().unwrap_or(0))
                    .collect(),
            })
        }
        SeriesSpec::EventRate { bins } => {
            if *bins == 0 {
                return Err(TraceError::BadBinCount);
            }
            let (t_min, t_max) = trace.time_span()?;
            let edges = bin_edges(t_min, t_max, *bins);
            let mut counts = vec![0f64; *bins];
            for i in 0..ev.len() {
                counts[bin_of(&edges, ev.ts(i))] += 1.0;
            }
            Ok(Series {
                values: counts,
                timestamps: edges[..*bins].to_vec(),
            })
        }
    }
}
