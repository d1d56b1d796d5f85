//! Static SVG plots: stream timelines, matrix heatmaps, and stacked bar
//! charts. Everything is plain shapes and text — no scripts, no external
//! assets — so the files render anywhere.

use crate::error::Result;
use crate::model::{EventKind, Trace};
use crate::table::AnalysisTable;
use crate::util::fnv1a64;

/// Fixed 20-color palette; names hash onto it, so a function keeps its
/// color across plots and traces.
const PALETTE: [&str; 20] = [
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728", "#ff9896",
    "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f", "#c7c7c7",
    "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
];

/// Color assigned to a name (stable across runs).
pub fn color_for(name: &str) -> &'static str {
    PALETTE[(fnv1a64(name.as_bytes()) % PALETTE.len() as u64) as usize]
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.2}\" height=\"{height:.2}\" \
         viewBox=\"0 0 {width:.2} {height:.2}\" font-family=\"sans-serif\">\n\
         <rect width=\"{width:.2}\" height=\"{height:.2}\" fill=\"white\"/>\n\
         {body}</svg>\n"
    )
}

fn text_el(x: f64, y: f64, size: f64, anchor: &str, fill: &str, s: &str) -> String {
    format!(
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size:.2}\" text-anchor=\"{anchor}\" \
         fill=\"{fill}\">{}</text>\n",
        esc(s)
    )
}

/// Compact tick label for a numeric axis value.
fn tick_label(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

// ---------------------------------------------------------------------------
// Timeline
// ---------------------------------------------------------------------------

/// Knobs for [`render_timeline`].
#[derive(Debug, Clone)]
pub struct TimelineOptions {
    /// Restrict the plot to `[lo, hi)`; default is the whole trace.
    pub time_range: Option<(i64, i64)>,
    /// Draw arrows for matched messages.
    pub show_messages: bool,
    /// Overlay the critical path in red.
    pub critical_path: bool,
    /// Shade these `[start, end)` windows (e.g. detected pattern spans).
    pub spans: Vec<(i64, i64)>,
    /// At most this many call bars; the shortest are dropped first.
    pub max_bars: usize,
}

impl Default for TimelineOptions {
    fn default() -> Self {
        TimelineOptions {
            time_range: None,
            show_messages: true,
            critical_path: false,
            spans: Vec::new(),
            max_bars: 50_000,
        }
    }
}

/// One horizontal band per stream, nested calls stacked by depth,
/// instants as diamonds, messages as arrows.
pub fn render_timeline(trace: &Trace, opts: &TimelineOptions) -> Result<String> {
    let ev = trace.events();
    let m = trace.matching()?;
    let (t0, t1) = match opts.time_range {
        Some((lo, hi)) => (lo, hi),
        None => trace.time_span()?,
    };
    let span = (t1 - t0).max(1) as f64;

    const MARGIN_L: f64 = 70.0;
    const MARGIN_R: f64 = 20.0;
    const MARGIN_T: f64 = 30.0;
    const MARGIN_B: f64 = 34.0;
    const PLOT_W: f64 = 1100.0;
    const BAR_H: f64 = 14.0;
    const BAND_GAP: f64 = 8.0;

    let x_of = |ts: i64| MARGIN_L + (ts - t0) as f64 / span * PLOT_W;

    // Band layout: one per stream, tall enough for its deepest call.
    struct Band {
        label: String,
        top: f64,
        depth: u32,
    }
    let mut bands: Vec<Band> = Vec::new();
    let mut band_of_stream: Vec<usize> = Vec::new();
    let mut y = MARGIN_T;
    for stream in ev.streams() {
        let mut max_depth = 0u32;
        for i in stream.rows() {
            max_depth = max_depth.max(m.depth[i]);
        }
        let levels = max_depth + 1;
        band_of_stream.push(bands.len());
        bands.push(Band {
            label: format!("p{}.t{}", stream.process, stream.thread),
            top: y,
            depth: levels,
        });
        y += levels as f64 * BAR_H + BAND_GAP;
    }
    let height = y - BAND_GAP + MARGIN_B;
    let width = MARGIN_L + PLOT_W + MARGIN_R;

    let mut body = String::new();

    // Shaded spans behind everything else.
    for &(lo, hi) in &opts.spans {
        let (lo, hi) = (lo.max(t0), hi.min(t1));
        if lo >= hi {
            continue;
        }
        body += &format!(
            "<rect x=\"{:.2}\" y=\"{MARGIN_T:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#ffe9a8\" opacity=\"0.55\"/>\n",
            x_of(lo),
            x_of(hi) - x_of(lo),
            height - MARGIN_T - MARGIN_B,
        );
    }

    // Collect visible call bars: (duration, enter_row, leave_ts).
    let mut bars: Vec<(i64, usize, i64)> = Vec::new();
    for stream_idx in 0..ev.streams().len() {
        let stream = &ev.streams()[stream_idx];
        for i in stream.rows() {
            if ev.kind(i) != EventKind::Enter {
                continue;
            }
            let Some(leave) = m.matching[i] else { continue };
            let (s, e) = (ev.ts(i), ev.ts(leave as usize));
            if s >= t1 || e <= t0 {
                continue;
            }
            bars.push((e - s, i, e));
        }
    }
    if bars.len() > opts.max_bars {
        bars.sort_by_key(|&(dur, row, _)| (std::cmp::Reverse(dur), row));
        bars.truncate(opts.max_bars);
        bars.sort_by_key(|&(_, row, _)| row); // restore draw order
    }

    for &(_, i, e) in &bars {
        let band = &bands[band_of_stream[stream_index_of(trace, i)]];
        let s = ev.ts(i);
        let x = x_of(s.max(t0));
        let w = (x_of(e.min(t1)) - x).max(0.5);
        let yb = band.top + m.depth[i] as f64 * BAR_H;
        let name = ev.name(i);
        body += &format!(
            "<rect x=\"{x:.2}\" y=\"{yb:.2}\" width=\"{w:.2}\" height=\"{:.2}\" fill=\"{}\" \
             stroke=\"#444\" stroke-width=\"0.3\"><title>{} [{s}, {e})</title></rect>\n",
            BAR_H - 1.0,
            color_for(name),
            esc(name),
        );
        if w > 60.0 {
            body += &text_el(
                x + 3.0,
                yb + BAR_H - 4.0,
                BAR_H * 0.65,
                "start",
                "#111",
                name,
            );
        }
    }

    // Instants as small diamonds at their depth level.
    for stream_idx in 0..ev.streams().len() {
        let stream = &ev.streams()[stream_idx];
        let band = &bands[band_of_stream[stream_idx]];
        for i in stream.rows() {
            if ev.kind(i) != EventKind::Instant {
                continue;
            }
            let ts = ev.ts(i);
            if ts < t0 || ts >= t1 {
                continue;
            }
            let x = x_of(ts);
            let yc = band.top + m.depth[i] as f64 * BAR_H + BAR_H / 2.0;
            let r = BAR_H * 0.35;
            body += &format!(
                "<path d=\"M {x:.2} {:.2} L {:.2} {yc:.2} L {x:.2} {:.2} L {:.2} {yc:.2} Z\" \
                 fill=\"{}\"><title>{} @{ts}</title></path>\n",
                yc - r,
                x + r,
                yc + r,
                x - r,
                color_for(ev.name(i)),
                esc(ev.name(i)),
            );
        }
    }

    // Message arrows between stream centers.
    if opts.show_messages {
        for rec in &trace.messages().records {
            if rec.send_ts >= t1 || rec.recv_ts < t0 {
                continue;
            }
            let sb = &bands[band_of_stream[stream_index_of(trace, rec.send_row as usize)]];
            let rb = &bands[band_of_stream[stream_index_of(trace, rec.recv_row as usize)]];
            let (x1, y1) = (x_of(rec.send_ts.max(t0)), sb.top + BAR_H / 2.0);
            let (x2, y2) = (x_of(rec.recv_ts.min(t1)), rb.top + BAR_H / 2.0);
            body += &format!(
                "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
                 stroke=\"#333\" stroke-width=\"1\" opacity=\"0.6\"/>\n\
                 <circle cx=\"{x2:.2}\" cy=\"{y2:.2}\" r=\"2.2\" fill=\"#333\" opacity=\"0.7\"/>\n"
            );
        }
    }

    // Critical path overlay.
    if opts.critical_path {
        let path = trace.critical_path()?;
        for seg in &path.segments {
            match *seg {
                crate::diagnostics::PathSegment::Local {
                    first_row,
                    start_ts,
                    end_ts,
                    ..
                } => {
                    let band = &bands[band_of_stream[stream_index_of(trace, first_row as usize)]];
                    let x = x_of(start_ts.max(t0));
                    let w = (x_of(end_ts.min(t1)) - x).max(1.0);
                    body += &format!(
                        "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{w:.2}\" height=\"{:.2}\" \
                         fill=\"none\" stroke=\"#e41a1c\" stroke-width=\"2\" opacity=\"0.85\"/>\n",
                        band.top - 1.0,
                        band.depth as f64 * BAR_H + 2.0,
                    );
                }
                crate::diagnostics::PathSegment::MessageHop {
                    send_row,
                    recv_row,
                    send_ts,
                    recv_ts,
                    ..
                } => {
                    let sb = &bands[band_of_stream[stream_index_of(trace, send_row as usize)]];
                    let rb = &bands[band_of_stream[stream_index_of(trace, recv_row as usize)]];
                    body += &format!(
                        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                         stroke=\"#e41a1c\" stroke-width=\"2\" opacity=\"0.85\"/>\n",
                        x_of(send_ts.max(t0)),
                        sb.top + BAR_H / 2.0,
                        x_of(recv_ts.min(t1)),
                        rb.top + BAR_H / 2.0,
                    );
                }
            }
        }
    }

    // Band labels and axis.
    for band in &bands {
        body += &text_el(
            MARGIN_L - 6.0,
            band.top + BAR_H - 3.0,
            10.0,
            "end",
            "#222",
            &band.label,
        );
    }
    let axis_y = height - MARGIN_B + 12.0;
    body += &format!(
        "<line x1=\"{MARGIN_L:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#222\" \
         stroke-width=\"1\"/>\n",
        height - MARGIN_B,
        MARGIN_L + PLOT_W,
        height - MARGIN_B,
    );
    for k in 0..=5 {
        let ts = t0 + (t1 - t0) * k / 5;
        let x = x_of(ts);
        body += &format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#222\" \
             stroke-width=\"1\"/>\n",
            height - MARGIN_B,
            height - MARGIN_B + 4.0,
        );
        let anchor = if k == 0 {
            "start"
        } else if k == 5 {
            "end"
        } else {
            "middle"
        };
        body += &text_el(x, axis_y + 8.0, 10.0, anchor, "#222", &format!("{ts} ns"));
    }

    Ok(document(width, height, &body))
}

/// Index of the stream containing `row`.
fn stream_index_of(trace: &Trace, row: usize) -> usize {
    let ev = trace.events();
    let stream = ev.stream_of(row);
    ev.streams()
        .iter()
        .position(|s| s.start == stream.start)
        .expect("row belongs to a stream")
}

// ---------------------------------------------------------------------------
// Heatmap
// ---------------------------------------------------------------------------

/// Color scaling for [`render_heatmap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    Linear,
    /// `log1p` scaling; spreads heavy-tailed traffic matrices.
    Log,
}

fn heat_color(v: f64, vmax: f64, map: Colormap) -> String {
    let frac = if vmax <= 0.0 {
        0.0
    } else {
        match map {
            Colormap::Linear => (v / vmax).clamp(0.0, 1.0),
            Colormap::Log => (v.max(0.0).ln_1p() / vmax.ln_1p()).clamp(0.0, 1.0),
        }
    };
    // White to deep blue.
    let lerp = |a: f64, b: f64| a + (b - a) * frac;
    format!(
        "rgb({},{},{})",
        lerp(255.0, 8.0).round() as u8,
        lerp(255.0, 81.0).round() as u8,
        lerp(255.0, 156.0).round() as u8
    )
}

/// Grid heatmap of a numeric table (e.g. a traffic matrix): one cell per
/// (row, column), value printed inside when the grid is small.
pub fn render_heatmap(table: &AnalysisTable, map: Colormap) -> String {
    const CELL: f64 = 30.0;
    const MARGIN_L: f64 = 70.0;
    const MARGIN_T: f64 = 60.0;
    let n_rows = table.n_rows();
    let n_cols = table.n_columns();

    let mut vmax = 0.0f64;
    for r in 0..n_rows {
        for c in 0..n_cols {
            if let Some(v) = table.cell(r, c).as_f64() {
                vmax = vmax.max(v);
            }
        }
    }

    let width = MARGIN_L + n_cols as f64 * CELL + 90.0;
    let height = MARGIN_T + n_rows as f64 * CELL + 20.0;
    let mut body = String::new();
    body += &text_el(MARGIN_L, 18.0, 12.0, "start", "#222", table.row_key());

    for (c, col) in table.columns().iter().enumerate() {
        body += &text_el(
            MARGIN_L + (c as f64 + 0.5) * CELL,
            MARGIN_T - 8.0,
            10.0,
            "middle",
            "#222",
            &col.label,
        );
    }
    for r in 0..n_rows {
        body += &text_el(
            MARGIN_L - 6.0,
            MARGIN_T + (r as f64 + 0.5) * CELL + 3.5,
            10.0,
            "end",
            "#222",
            table.row_label(r),
        );
        for c in 0..n_cols {
            let v = table.cell(r, c).as_f64().unwrap_or(0.0);
            let x = MARGIN_L + c as f64 * CELL;
            let y = MARGIN_T + r as f64 * CELL;
            body += &format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{CELL:.2}\" height=\"{CELL:.2}\" \
                 fill=\"{}\" stroke=\"#ddd\" stroke-width=\"0.5\"><title>{} \u{2192} {}: {}</title></rect>\n",
                heat_color(v, vmax, map),
                esc(table.row_label(r)),
                esc(&table.columns()[c].label),
                table.cell(r, c),
            );
            if n_rows <= 20 && n_cols <= 20 {
                let frac = if vmax > 0.0 { v / vmax } else { 0.0 };
                let ink = if frac > 0.55 { "#ffffff" } else { "#333333" };
                body += &text_el(
                    x + CELL / 2.0,
                    y + CELL / 2.0 + 3.5,
                    9.0,
                    "middle",
                    ink,
                    &tick_label(v),
                );
            }
        }
    }

    // Legend: min and max swatches.
    let lx = MARGIN_L + n_cols as f64 * CELL + 14.0;
    body += &format!(
        "<rect x=\"{lx:.2}\" y=\"{MARGIN_T:.2}\" width=\"14\" height=\"14\" fill=\"{}\" \
         stroke=\"#ddd\"/>\n",
        heat_color(0.0, vmax, map)
    );
    body += &text_el(lx + 18.0, MARGIN_T + 11.0, 10.0, "start", "#222", "0");
    body += &format!(
        "<rect x=\"{lx:.2}\" y=\"{:.2}\" width=\"14\" height=\"14\" fill=\"{}\" stroke=\"#ddd\"/>\n",
        MARGIN_T + 20.0,
        heat_color(vmax, vmax, map)
    );
    body += &text_el(
        lx + 18.0,
        MARGIN_T + 31.0,
        10.0,
        "start",
        "#222",
        &tick_label(vmax),
    );

    document(width, height, &body)
}

// ---------------------------------------------------------------------------
// Stacked bars
// ---------------------------------------------------------------------------

/// Vertical stacked bars: one bar per table row, one colored layer per
/// column. Suits binned profiles and histograms.
pub fn render_stacked_bars(table: &AnalysisTable) -> String {
    const MARGIN_L: f64 = 80.0;
    const MARGIN_R: f64 = 30.0;
    const MARGIN_T: f64 = 40.0;
    const MARGIN_B: f64 = 46.0;
    const PLOT_W: f64 = 1000.0;
    const PLOT_H: f64 = 320.0;

    let n = table.n_rows().max(1);
    let mut total_max = 0.0f64;
    for r in 0..table.n_rows() {
        let sum: f64 = (0..table.n_columns())
            .filter_map(|c| table.cell(r, c).as_f64())
            .filter(|v| *v > 0.0)
            .sum();
        total_max = total_max.max(sum);
    }
    let scale = if total_max > 0.0 { PLOT_H / total_max } else { 0.0 };

    let width = MARGIN_L + PLOT_W + MARGIN_R;
    let height = MARGIN_T + PLOT_H + MARGIN_B;
    let bar_w = PLOT_W / n as f64;
    let mut body = String::new();

    // Legend across the top.
    let mut lx = MARGIN_L;
    for col in table.columns() {
        body += &format!(
            "<rect x=\"{lx:.2}\" y=\"10\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
            color_for(&col.label)
        );
        body += &text_el(lx + 14.0, 19.0, 10.0, "start", "#222", &col.label);
        lx += 14.0 + 7.0 * col.label.len() as f64 + 16.0;
        if lx > MARGIN_L + PLOT_W {
            break;
        }
    }

    for r in 0..table.n_rows() {
        let x = MARGIN_L + r as f64 * bar_w;
        let mut y = MARGIN_T + PLOT_H;
        for (c, col) in table.columns().iter().enumerate() {
            let v = table.cell(r, c).as_f64().unwrap_or(0.0);
            if v <= 0.0 {
                continue;
            }
            let h = v * scale;
            y -= h;
            body += &format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"{}\" \
                 stroke=\"white\" stroke-width=\"0.3\"><title>{} @ {}: {}</title></rect>\n",
                (bar_w - 1.0).max(0.5),
                color_for(&col.label),
                esc(&col.label),
                esc(table.row_label(r)),
                table.cell(r, c),
            );
        }
    }

    // Axes and ticks.
    body += &format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{:.2}\" \
         stroke=\"#222\"/>\n<line x1=\"{MARGIN_L}\" y1=\"{0:.2}\" x2=\"{1:.2}\" y2=\"{0:.2}\" \
         stroke=\"#222\"/>\n",
        MARGIN_T + PLOT_H,
        MARGIN_L + PLOT_W,
    );
    for k in 0..=4 {
        let v = total_max * k as f64 / 4.0;
        let y = MARGIN_T + PLOT_H - v * scale;
        body += &format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_L}\" y2=\"{y:.2}\" stroke=\"#222\"/>\n",
            MARGIN_L - 4.0
        );
        body += &text_el(MARGIN_L - 8.0, y + 3.5, 10.0, "end", "#222", &tick_label(v));
    }
    let step = (table.n_rows() / 12).max(1);
    for r in (0..table.n_rows()).step_by(step) {
        let x = MARGIN_L + (r as f64 + 0.5) * bar_w;
        body += &text_el(
            x,
            MARGIN_T + PLOT_H + 16.0,
            9.0,
            "middle",
            "#222",
            table.row_label(r),
        );
    }
    body += &text_el(
        MARGIN_L + PLOT_W / 2.0,
        height - 8.0,
        11.0,
        "middle",
        "#222",
        table.row_key(),
    );

    document(width, height, &body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TraceBuilder;
    use crate::table::Cell;

    fn svg_is_well_formed(svg: &str) {
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        for tag in ["rect", "text"] {
            let opens = svg.matches(&format!("<{tag} ")).count();
            assert!(opens > 0, "expected some <{tag}> elements");
        }
        // Every opened element is closed or self-closed: crude but
        // effective — count unescaped '<' vs '>'.
        assert_eq!(svg.matches('<').count(), svg.matches('>').count());
    }

    fn small_trace() -> Trace {
        let mut b = TraceBuilder::new().repair(false);
        b.push(0, EventKind::Enter, "main", 0, 0);
        b.push(20, EventKind::Enter, "inner<&>", 0, 0);
        b.push(60, EventKind::Leave, "inner<&>", 0, 0);
        b.push(100, EventKind::Leave, "main", 0, 0);
        b.push(5, EventKind::Instant, "mark", 1, 0);
        b.push(10, EventKind::Enter, "main", 1, 0);
        b.push(90, EventKind::Leave, "main", 1, 0);
        b.finish()
    }

    #[test]
    fn timeline_renders_bands_bars_and_escapes_names() {
        let svg = render_timeline(&small_trace(), &TimelineOptions::default()).unwrap();
        svg_is_well_formed(&svg);
        assert!(svg.contains("p0.t0"));
        assert!(svg.contains("p1.t0"));
        assert!(svg.contains("inner&lt;&amp;&gt;")); // escaped name
        assert!(!svg.contains("inner<&>"));
    }

    #[test]
    fn timeline_respects_time_range_and_bar_cap() {
        let t = small_trace();
        let opts = TimelineOptions {
            time_range: Some((0, 15)),
            ..Default::default()
        };
        let svg = render_timeline(&t, &opts).unwrap();
        // inner [20,60) is outside [0,15): no bar for it.
        assert!(!svg.contains("inner"));

        let capped = TimelineOptions {
            max_bars: 1,
            ..Default::default()
        };
        let svg = render_timeline(&t, &capped).unwrap();
        // Only the longest call (main on rank 0, 100 ns) survives.
        assert!(svg.contains("main [0, 100)"));
        assert!(!svg.contains("inner"));
    }

    #[test]
    fn heatmap_scales_colors_and_prints_values() {
        let mut t = AnalysisTable::new("process");
        t.add_column("0", None);
        t.add_column("1", None);
        t.push_row("0", vec![Cell::Int(0), Cell::Int(100)]);
        t.push_row("1", vec![Cell::Int(50), Cell::Int(0)]);
        let svg = render_heatmap(&t, Colormap::Linear);
        svg_is_well_formed(&svg);
        assert!(svg.contains("rgb(255,255,255)")); // zero cells are white
        assert!(svg.contains("rgb(8,81,156)")); // the max cell is full blue
        let log = render_heatmap(&t, Colormap::Log);
        // log1p(50)/log1p(100) ~ 0.85 vs linear 0.5: the mid cell darkens.
        assert_ne!(svg, log);
    }

    #[test]
    fn stacked_bars_render_layers_per_column() {
        let mut t = AnalysisTable::new("bin_start");
        t.add_column("compute", Some("ns"));
        t.add_column("mpi", Some("ns"));
        t.push_row("0", vec![Cell::Int(30), Cell::Int(10)]);
        t.push_row("50", vec![Cell::Int(5), Cell::Int(25)]);
        let svg = render_stacked_bars(&t);
        svg_is_well_formed(&svg);
        assert!(svg.contains("compute"));
        assert!(svg.contains("mpi"));
        assert!(svg.contains("bin_start"));
    }

    #[test]
    fn color_assignment_is_stable() {
        assert_eq!(color_for("main"), color_for("main"));
        let distinct: std::collections::BTreeSet<&str> =
            ["a", "b", "c", "d", "e", "f"].iter().map(|n| color_for(n)).collect();
        assert!(distinct.len() >= 3, "hashing should spread names");
    }
}
