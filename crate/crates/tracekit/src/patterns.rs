//! Pattern mining: matrix profile over numeric series and detection of
//! repeating phases from event recurrence.
//!
//! The matrix profile of a series records, for every window of length
//! `m`, the z-normalized Euclidean distance to its nearest neighbor
//! window elsewhere in the series (outside an exclusion zone around
//! itself). Low values mark motifs — stretches that repeat; high values
//! mark discords — stretches unlike anything else.

use crate::error::{Result, TraceError};
use crate::model::{EventKind, Trace};
use crate::table::{AnalysisTable, Cell};

/// Nearest-neighbor distances per window.
#[derive(Debug, Clone)]
pub struct MatrixProfile {
    /// `profile[i]`: distance from window `i` to its nearest neighbor.
    pub profile: Vec<f64>,
    /// `index[i]`: where that neighbor starts.
    pub index: Vec<Option<usize>>,
    pub window: usize,
    pub exclusion: usize,
}

/// One detected repetition of the dominant pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternSpan {
    pub start_ts: i64,
    pub end_ts: i64,
    /// Index of the first occurrence covered by this span.
    pub start_occurrence: usize,
    /// Number of occurrences covered (window length + 1).
    pub occurrences: usize,
}

/// Outcome of [`pattern_detection`].
#[derive(Debug, Clone)]
pub struct PatternResult {
    /// Process whose occurrences anchored the search.
    pub process: u32,
    /// Timestamps of the anchor event on that process, ascending.
    pub occurrence_ts: Vec<i64>,
    pub spans: Vec<PatternSpan>,
    /// Window length used on the gap series (0 for the periodic shortcut).
    pub window: usize,
    /// Distance threshold used (0.0 for the periodic shortcut).
    pub threshold: f64,
    /// True when the gaps were exactly periodic and no profile was needed.
    pub periodic: bool,
}

/// Tuning knobs for [`pattern_detection`]; `None` picks defaults.
#[derive(Debug, Clone, Default)]
pub struct PatternOptions {
    /// Window length over the gap series; default `max(4, n_gaps / 10)`.
    pub window: Option<usize>,
    /// Motif cutoff distance; default 5% of the maximum possible
    /// z-normalized distance `2*sqrt(m)`.
    pub threshold: Option<f64>,
    /// Self-match exclusion radius; default `ceil(m / 2)`.
    pub exclusion: Option<usize>,
}

/// A window whose standard deviation is this close to zero is treated as
/// constant. Shared by the engine and by the naive distance below so both
/// apply identical conventions.
pub fn is_constant_window(sigma: f64, mean: f64) -> bool {
    sigma <= 1e-12 * (1.0 + mean.abs())
}

/// Z-normalized Euclidean distance between two equal-length windows,
/// computed directly from the definition. Conventions for degenerate
/// windows: two constants are identical (0); a constant against a
/// non-constant is maximally far (`sqrt(2m)`).
pub fn znormalized_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "windows must have equal length");
    let m = a.len() as f64;
    let stats = |w: &[f64]| {
        let mean = w.iter().sum::<f64>() / m;
        let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m;
        (mean, var.max(0.0).sqrt())
    };
    let (ma, sa) = stats(a);
    let (mb, sb) = stats(b);
    match (is_constant_window(sa, ma), is_constant_window(sb, mb)) {
        (true, true) => 0.0,
        (true, false) | (false, true) => (2.0 * m).sqrt(),
        (false, false) => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let corr = (dot - m * ma * mb) / (m * sa * sb);
            (2.0 * m * (1.0 - corr)).max(0.0).sqrt()
        }
    }
}

/// Matrix profile of `series` with window `m`, via sliding dot products
/// along diagonals (one multiply-add per cell).
pub fn matrix_profile(
    series: &[f64],
    window: usize,
    exclusion: Option<usize>,
) -> Result<MatrixProfile> {
    let m = window;
    if m < 3 {
        return Err(TraceError::BadWindow { window: m, min: 3 });
    }
    let excl = exclusion.unwrap_or(m.div_ceil(2));
    let n = series.len();
    // Window 0 must have at least one neighbor beyond its exclusion zone.
    let needed = m + excl + 1;
    if n < needed {
        return Err(TraceError::SeriesTooShort {
            len: n,
            window: m,
            exclusion: excl,
            needed,
        });
    }
    let ns = n - m + 1;

    // Work on a mean-centered copy. Each window subtracts its own mean, so
    // the distances are unchanged, but dot products and variances no longer
    // carry a large common offset that would eat their precision.
    let shift = series.iter().sum::<f64>() / n as f64;
    let series: Vec<f64> = series.iter().map(|v| v - shift).collect();

    let mut sum = 0.0f64;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &x in &series {
        sum += x;
        prefix.push(sum);
    }
    let mf = m as f64;
    let mut mean = vec![0.0f64; ns];
    let mut std = vec![0.0f64; ns];
    let mut constant = vec![false; ns];
    for i in 0..ns {
        let mu = (prefix[i + m] - prefix[i]) / mf;
        // Two-pass variance: direct summation stays accurate even when the
        // window's spread is tiny compared to its level.
        let var = series[i..i + m]
            .iter()
            .map(|&x| (x - mu) * (x - mu))
            .sum::<f64>()
            / mf;
        let sigma = var.sqrt();
        mean[i] = mu;
        std[i] = sigma;
        constant[i] = is_constant_window(sigma, mu + shift);
    }

    let max_dist = (2.0 * mf).sqrt();
    let dist = |qt: f64, i: usize, j: usize| -> f64 {
        match (constant[i], constant[j]) {
            (true, true) => 0.0,
            (true, false) | (false, true) => max_dist,
            (false, false) => {
                let corr = (qt - mf * mean[i] * mean[j]) / (mf * std[i] * std[j]);
                (2.0 * mf * (1.0 - corr)).max(0.0).sqrt()
            }
        }
    };

    let mut profile = vec![f64::INFINITY; ns];
    let mut index: Vec<Option<usize>> = vec![None; ns];
    let update = |profile: &mut Vec<f64>, index: &mut Vec<Option<usize>>, i: usize, j: usize, d: f64| {
        if d < profile[i] {
            profile[i] = d;
            index[i] = Some(j);
        }
    };

    // Diagonal k pairs window i with window i + k; distances are
    // symmetric, so each diagonal updates both endpoints.
    for k in (excl + 1)..ns {
        let mut qt: f64 = (0..m).map(|t| series[t] * series[t + k]).sum();
        let d = dist(qt, 0, k);
        update(&mut profile, &mut index, 0, k, d);
        update(&mut profile, &mut index, k, 0, d);
        for i in 1..(ns - k) {
            qt += series[i + m - 1] * series[i + k + m - 1]
                - series[i - 1] * series[i + k - 1];
            let d = dist(qt, i, i + k);
            update(&mut profile, &mut index, i, i + k, d);
            update(&mut profile, &mut index, i + k, i, d);
        }
    }

    Ok(MatrixProfile {
        profile,
        index,
        window: m,
        exclusion: excl,
    })
}

/// Finds repetitions of the phase structure anchored at `start_event`.
///
/// Occurrences of the event are collected on the process that has the
/// most of them; the series of gaps between consecutive occurrences is
/// mined for motifs. Exactly periodic gaps short-circuit to one span per
/// period without a profile.
pub fn pattern_detection(
    trace: &Trace,
    start_event: &str,
    opts: &PatternOptions,
) -> Result<PatternResult> {
    let ev = trace.events();

    // Occurrences per process (Enter and Instant rows of that name).
    let mut per_proc: std::collections::BTreeMap<u32, Vec<(i64, u32)>> = Default::default();
    for i in 0..ev.len() {
        if ev.kind(i) != EventKind::Leave && ev.name(i) == start_event {
            per_proc
                .entry(ev.process(i))
                .or_default()
                .push((ev.ts(i), i as u32));
        }
    }
    // Most occurrences wins; ties go to the lowest process id.
    let Some((&process, _)) = per_proc
        .iter()
        .max_by_key(|&(p, v)| (v.len(), std::cmp::Reverse(*p)))
    else {
        return Err(TraceError::NoOccurrences {
            name: start_event.to_owned(),
        });
    };
    let mut occ = per_proc.remove(&process).unwrap();
    occ.sort_unstable();
    let occurrence_ts: Vec<i64> = occ.into_iter().map(|(t, _)| t).collect();

    let gaps: Vec<i64> = occurrence_ts.windows(2).map(|w| w[1] - w[0]).collect();

    // Exactly periodic: every consecutive pair is one repetition.
    if gaps.windows(2).all(|w| w[0] == w[1]) {
        let spans = occurrence_ts
            .windows(2)
            .enumerate()
            .map(|(k, w)| PatternSpan {
                start_ts: w[0],
                end_ts: w[1],
                start_occurrence: k,
                occurrences: 2,
            })
            .collect();
        return Ok(PatternResult {
            process,
            occurrence_ts,
            spans,
            window: 0,
            threshold: 0.0,
            periodic: true,
        });
    }

    let m = opts.window.unwrap_or_else(|| (gaps.len() / 10).max(4));
    let series: Vec<f64> = gaps.iter().map(|&g| g as f64).collect();
    let mp = matrix_profile(&series, m, opts.exclusion)?;
    let threshold = opts
        .threshold
        .unwrap_or_else(|| 0.05 * 2.0 * (m as f64).sqrt());

    // Greedy left-to-right pick of non-overlapping motif windows. A gap
    // window [i, i+m) covers occurrences i ..= i+m.
    let mut spans = Vec::new();
    let mut next_free = 0usize;
    for i in 0..mp.profile.len() {
        if i >= next_free && mp.profile[i] < threshold {
            spans.push(PatternSpan {
                start_ts: occurrence_ts[i],
                end_ts: occurrence_ts[i + m],
                start_occurrence: i,
                occurrences: m + 1,
            });
            next_free = i + m;
        }
    }

    Ok(PatternResult {
        process,
        occurrence_ts,
        spans,
        window: m,
        threshold,
        periodic: false,
    })
}

/// [`pattern_detection`] rendered as a table, one span per row.
pub fn pattern_table(
    trace: &Trace,
    start_event: &str,
    opts: &PatternOptions,
) -> Result<AnalysisTable> {
    Ok(spans_table(&pattern_detection(trace, start_event, opts)?))
}

/// The spans of an already-computed [`PatternResult`] as a table.
pub fn spans_table(r: &PatternResult) -> AnalysisTable {
    let mut table = AnalysisTable::new("span");
    table.add_column("start_ts", Some("ns"));
    table.add_column("end_ts", Some("ns"));
    table.add_column("duration_ns", Some("ns"));
    table.add_column("occurrences", None);
    for (i, s) in r.spans.iter().enumerate() {
        table.push_row(
            &i.to_string(),
            vec![
                Cell::Int(s.start_ts),
                Cell::Int(s.end_ts),
                Cell::Int(s.end_ts - s.start_ts),
                Cell::Int(s.occurrences as i64),
            ],
        );
    }
    table
}
