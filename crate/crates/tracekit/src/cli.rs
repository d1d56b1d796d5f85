//! Command-line interface: one subcommand per analysis, results to
//! stdout (or `--output`) as text, CSV, JSON, or SVG.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, malformed trace,
//! analysis error), 2 usage error (bad flags, bad expressions).

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::comm::{CommPredicate, CommUnit};
use crate::diagnostics::IdlePredicate;
use crate::error::TraceError;
use crate::model::{AttrValue, Trace};
use crate::patterns::{pattern_detection, spans_table, PatternOptions};
use crate::profiles::{flat_profile, time_profile, Metric};
use crate::query::{
    filter as filter_trace, multi_run_table, parse_filter, FieldRef, FilterExpr, FilterOptions,
};
use crate::readers::{read_parallel, read_trace, write_csv_string, Format, ReadOptions};
use crate::report::svg::{render_heatmap, render_stacked_bars, render_timeline, Colormap, TimelineOptions};
use crate::report::{to_csv_string, to_json_string, to_text_string};
use crate::table::AnalysisTable;

/// All subcommand names, used by the exhaustiveness check in tests.
pub const SUBCOMMANDS: [&str; 17] = [
    "info",
    "flat-profile",
    "time-profile",
    "comm-matrix",
    "comm-by-process",
    "message-histogram",
    "comm-over-time",
    "comm-comp",
    "imbalance",
    "idle",
    "lateness",
    "critical-path",
    "patterns",
    "filter",
    "multirun",
    "timeline",
    "convert",
];

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(TraceError),
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(TraceError::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "tracekit",
    version,
    about = "Analyze parallel execution traces",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Chrome,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Chrome => Format::Chrome,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Count,
    Bytes,
}

impl From<UnitArg> for CommUnit {
    fn from(u: UnitArg) -> CommUnit {
        match u {
            UnitArg::Count => CommUnit::Count,
            UnitArg::Bytes => CommUnit::Bytes,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ColormapArg {
    Linear,
    Log,
}

impl From<ColormapArg> for Colormap {
    fn from(c: ColormapArg) -> Colormap {
        match c {
            ColormapArg::Linear => Colormap::Linear,
            ColormapArg::Log => Colormap::Log,
        }
    }
}

/// Options shared by every subcommand.
#[derive(Args)]
struct Common {
    /// Input trace file(s); multiple files merge into one trace
    /// (except `multirun`, which treats each file as its own run)
    #[arg(required = true, value_name = "TRACE")]
    input: Vec<PathBuf>,

    /// Input format; default sniffs the extension, then the content
    #[arg(long, value_enum)]
    input_format: Option<FormatArg>,

    /// Fail on malformed input instead of skipping and counting
    #[arg(long)]
    strict: bool,

    /// Reader threads for multi-file input
    /// (default: $TRACE_WORKERS, else the CPU count)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,

    /// Event filter applied before the analysis, e.g.
    /// 'process < 4 && name matches "MPI_*"'
    #[arg(long, value_name = "EXPR")]
    filter: Option<String>,

    /// Keep only these processes (comma-separated ranks)
    #[arg(long, value_name = "LIST")]
    processes: Option<String>,

    /// Write the result here instead of stdout
    #[arg(long, short = 'o', value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format (svg only where a plot exists)
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Cmd {
    /// Summarize the trace: events, processes, span, messages
    Info {
        #[command(flatten)]
        common: Common,
    },
    /// Total of a metric per function, sorted descending
    FlatProfile {
        #[command(flatten)]
        common: Common,
        /// exc_ns, inc_ns, attr:<key>, or attr_exc:<key>
        #[arg(long, default_value = "exc_ns")]
        metric: String,
        /// Keep only the top K rows
        #[arg(long, value_name = "K")]
        top_k: Option<usize>,
    },
    /// Exclusive time per function over time bins
    TimeProfile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        bins: usize,
    },
    /// Process-to-process traffic matrix
    CommMatrix {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = UnitArg::Count)]
        unit: UnitArg,
        /// Color scaling for --format svg
        #[arg(long, value_enum, default_value_t = ColormapArg::Linear)]
        colormap: ColormapArg,
    },
    /// Messages (or bytes) sent and received per process
    CommByProcess {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = UnitArg::Count)]
        unit: UnitArg,
    },
    /// Histogram of message sizes
    MessageHistogram {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Message count and volume per time bin
    CommOverTime {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        bins: usize,
    },
    /// Communication/computation overlap per process
    CommComp {
        #[command(flatten)]
        common: Common,
    },
    /// Per-function spread of a metric across processes
    Imbalance {
        #[command(flatten)]
        common: Common,
        /// exc_ns, inc_ns, attr:<key>, or attr_exc:<key>
        #[arg(long, default_value = "exc_ns")]
        metric: String,
        /// Keep only the top K rows
        #[arg(long, value_name = "K")]
        top_k: Option<usize>,
    },
    /// Time per process spent in idle/wait calls
    Idle {
        #[command(flatten)]
        common: Common,
    },
    /// How far each process runs behind the fastest at each step
    Lateness {
        #[command(flatten)]
        common: Common,
    },
    /// The chain of events that determined the finish time
    CriticalPath {
        #[command(flatten)]
        common: Common,
    },
    /// Detect repeating phases from a recurring event
    Patterns {
        #[command(flatten)]
        common: Common,
        /// Event whose occurrences anchor the search
        #[arg(long, value_name = "NAME")]
        start_event: String,
        /// Window length over the gap series
        #[arg(long)]
        window: Option<usize>,
        /// Motif distance cutoff
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Select events into a new trace (written as CSV)
    Filter {
        /// Filter expression, e.g. 'name == "solve" || attr:size > 1024'
        expr: String,
        #[command(flatten)]
        common: Common,
        /// Drop half pairs instead of keeping whole calls
        #[arg(long)]
        no_pair_preserving: bool,
        /// Clip kept calls to the expression's `timestamp between` window
        #[arg(long)]
        time_clip: bool,
    },
    /// Compare per-function totals across runs (one file per run)
    Multirun {
        #[command(flatten)]
        common: Common,
        /// Comma-separated run labels (default: process counts)
        #[arg(long, value_name = "LIST")]
        labels: Option<String>,
        /// exc_ns, inc_ns, attr:<key>, or attr_exc:<key>
        #[arg(long, default_value = "exc_ns")]
        metric: String,
    },
    /// Render the trace as an SVG timeline
    Timeline {
        #[command(flatten)]
        common: Common,
        /// Restrict to a window, e.g. 1000:50000 (ns)
        #[arg(long, value_name = "LO:HI")]
        time_range: Option<String>,
        /// Hide message arrows
        #[arg(long)]
        no_messages: bool,
        /// Overlay the critical path in red
        #[arg(long)]
        critical_path: bool,
        /// Cap on drawn call bars; shortest dropped first
        #[arg(long, default_value_t = 50_000)]
        max_bars: usize,
    },
    /// Re-encode the input as canonical CSV
    Convert {
        #[command(flatten)]
        common: Common,
    },
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Cmd::Info { common } => cmd_info(common),
        Cmd::FlatProfile {
            common,
            metric,
            top_k,
        } => {
            let metric = parse_metric(metric)?;
            let trace = load(common)?;
            let mut table = flat_profile(&trace, &metric)?;
            if let Some(k) = top_k {
                table.truncate_rows(*k);
            }
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::TimeProfile { common, bins } => {
            let trace = load(common)?;
            let table = time_profile(&trace, *bins)?;
            emit_table(common, &table, SvgRender::Bars)
        }
        Cmd::CommMatrix {
            common,
            unit,
            colormap,
        } => {
            let trace = load(common)?;
            let table = trace.comm_matrix((*unit).into())?;
            emit_table(common, &table, SvgRender::Heatmap((*colormap).into()))
        }
        Cmd::CommByProcess { common, unit } => {
            let trace = load(common)?;
            let table = trace.comm_by_process((*unit).into())?;
            emit_table(common, &table, SvgRender::Bars)
        }
        Cmd::MessageHistogram { common, bins } => {
            let trace = load(common)?;
            let table = trace.message_histogram(*bins)?;
            if common.format == OutputFormat::Svg {
                let s = render_stacked_bars(&table.select_columns(&["count"]));
                return write_output(common, &s);
            }
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::CommOverTime { common, bins } => {
            let trace = load(common)?;
            let table = trace.comm_over_time(*bins)?;
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::CommComp { common } => {
            let trace = load(common)?;
            let table = trace.comm_comp_breakdown(&CommPredicate::default())?;
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::Imbalance {
            common,
            metric,
            top_k,
        } => {
            let metric = parse_metric(metric)?;
            let trace = load(common)?;
            let mut table = trace.load_imbalance(&metric)?;
            if let Some(k) = top_k {
                table.truncate_rows(*k);
            }
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::Idle { common } => {
            let trace = load(common)?;
            let table = trace.idle_time(&IdlePredicate::default())?;
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::Lateness { common } => {
            let trace = load(common)?;
            let table = trace.lateness()?;
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::CriticalPath { common } => {
            let trace = load(common)?;
            let path = trace.critical_path()?;
            if path.truncated {
                eprintln!("note: the walk hit missing data (e.g. an unmatched receive) and stopped early");
            }
            let table = trace.critical_path_table()?;
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::Patterns {
            common,
            start_event,
            window,
            threshold,
        } => {
            let trace = load(common)?;
            let opts = PatternOptions {
                window: *window,
                threshold: *threshold,
                exclusion: None,
            };
            let result = pattern_detection(&trace, start_event, &opts)?;
            if result.periodic {
                eprintln!(
                    "process {}: {} occurrences, exactly periodic",
                    result.process,
                    result.occurrence_ts.len()
                );
            } else {
                eprintln!(
                    "process {}: {} occurrences, window {}, threshold {:.4}",
                    result.process,
                    result.occurrence_ts.len(),
                    result.window,
                    result.threshold
                );
            }
            emit_table(common, &spans_table(&result), SvgRender::No)
        }
        Cmd::Filter {
            common,
            expr,
            no_pair_preserving,
            time_clip,
        } => {
            let parsed = parse_filter(expr).map_err(|e| usage(e.to_string()))?;
            let trace = load(common)?;
            let opts = FilterOptions {
                pair_preserving: !no_pair_preserving,
                time_clip: *time_clip,
            };
            let out = filter_trace(&trace, &parsed, &opts)?;
            match common.format {
                OutputFormat::Text | OutputFormat::Csv => {
                    write_output(common, &write_csv_string(&out))
                }
                _ => Err(usage("filter writes a trace; use --format csv")),
            }
        }
        Cmd::Multirun {
            common,
            labels,
            metric,
        } => {
            let metric = parse_metric(metric)?;
            let labels: Option<Vec<String>> = labels
                .as_ref()
                .map(|l| l.split(',').map(|s| s.trim().to_owned()).collect());
            let opts = ReadOptions {
                strict: common.strict,
            };
            let mut runs = Vec::with_capacity(common.input.len());
            for path in &common.input {
                let run = read_trace(path, common.input_format.map(Into::into), &opts)?;
                runs.push(prefilter(run, common)?);
            }
            let table = multi_run_table(&runs, labels.as_deref(), &metric)?;
            emit_table(common, &table, SvgRender::No)
        }
        Cmd::Timeline {
            common,
            time_range,
            no_messages,
            critical_path,
            max_bars,
        } => {
            let trace = load(common)?;
            if !matches!(common.format, OutputFormat::Svg | OutputFormat::Text) {
                return Err(usage("timeline renders only SVG"));
            }
            let opts = TimelineOptions {
                time_range: time_range
                    .as_ref()
                    .map(|s| parse_time_range(s))
                    .transpose()?,
                show_messages: !no_messages,
                critical_path: *critical_path,
                spans: Vec::new(),
                max_bars: *max_bars,
            };
            let s = render_timeline(&trace, &opts)?;
            write_output(common, &s)
        }
        Cmd::Convert { common } => {
            let trace = load(common)?;
            match common.format {
                OutputFormat::Text | OutputFormat::Csv => {
                    write_output(common, &write_csv_string(&trace))
                }
                _ => Err(usage("convert writes a trace; use --format csv")),
            }
        }
    }
}

fn parse_metric(spec: &str) -> CliResult<Metric> {
    Metric::parse(spec).map_err(|e| usage(e.to_string()))
}

fn parse_time_range(s: &str) -> CliResult<(i64, i64)> {
    let err = || usage(format!("bad time range `{s}`; expected LO:HI in integer ns"));
    let (lo, hi) = s.split_once(':').ok_or_else(err)?;
    let lo: i64 = lo.trim().parse().map_err(|_| err())?;
    let hi: i64 = hi.trim().parse().map_err(|_| err())?;
    if lo >= hi {
        return Err(usage(format!("empty time range `{s}`")));
    }
    Ok((lo, hi))
}

fn parse_process_list(s: &str) -> CliResult<Vec<u32>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("bad process list entry `{}`", part.trim())))
        })
        .collect()
}

fn effective_workers(requested: Option<usize>) -> usize {
    if let Some(n) = requested {
        return n.max(1);
    }
    if let Ok(env) = std::env::var("TRACE_WORKERS") {
        if let Ok(n) = env.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, usize::from)
}

/// Applies `--filter` and `--processes` to a freshly read trace.
fn prefilter(trace: Trace, common: &Common) -> CliResult<Trace> {
    let mut expr: Option<FilterExpr> = None;
    if let Some(text) = &common.filter {
        expr = Some(parse_filter(text).map_err(|e| usage(e.to_string()))?);
    }
    if let Some(list) = &common.processes {
        let procs = parse_process_list(list)?;
        let in_set = FilterExpr::InSet {
            field: FieldRef::Process,
            values: procs
                .into_iter()
                .map(|p| AttrValue::Int(p as i64))
                .collect(),
        };
        expr = Some(match expr {
            Some(prev) => FilterExpr::And(Box::new(prev), Box::new(in_set)),
            None => in_set,
        });
    }
    match expr {
        Some(e) => Ok(filter_trace(&trace, &e, &FilterOptions::default())?),
        None => Ok(trace),
    }
}

fn load(common: &Common) -> CliResult<Trace> {
    let opts = ReadOptions {
        strict: common.strict,
    };
    let workers = effective_workers(common.workers);
    let trace = read_parallel(
        &common.input,
        common.input_format.map(Into::into),
        workers,
        &opts,
    )?;
    prefilter(trace, common)
}

enum SvgRender {
    /// This analysis has no plot; `--format svg` is a usage error.
    No,
    Heatmap(Colormap),
    Bars,
}

fn emit_table(common: &Common, table: &AnalysisTable, svg: SvgRender) -> CliResult<()> {
    let text = match common.format {
        OutputFormat::Text => to_text_string(table),
        OutputFormat::Csv => to_csv_string(table),
        OutputFormat::Json => {
            let mut s = to_json_string(table);
            s.push('\n');
            s
        }
        OutputFormat::Svg => match svg {
            SvgRender::No => {
                return Err(usage(
                    "this command has no SVG rendering; use text, csv, or json",
                ))
            }
            SvgRender::Heatmap(map) => render_heatmap(table, map),
            SvgRender::Bars => render_stacked_bars(table),
        },
    };
    write_output(common, &text)
}

fn write_output(common: &Common, s: &str) -> CliResult<()> {
    match &common.output {
        Some(path) => std::fs::write(path, s)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(s.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_info(common: &Common) -> CliResult<()> {
    use crate::table::Cell;
    let trace = load(common)?;
    let ev = trace.events();

    let mut table = AnalysisTable::new("field");
    table.add_column("value", None);
    let mut put = |k: &str, v: Cell| table.push_row(k, vec![v]);
    put("events", Cell::Int(ev.len() as i64));
    put("processes", Cell::Int(ev.processes().len() as i64));
    put("streams", Cell::Int(ev.streams().len() as i64));
    if !ev.is_empty() {
        let (lo, hi) = trace.time_span()?;
        put("first_ts", Cell::Int(lo));
        put("last_ts", Cell::Int(hi));
        put("span_ns", Cell::Int(hi - lo));
    }
    put("names", Cell::Int(ev.name_count() as i64));
    let msgs = trace.messages();
    put("messages_matched", Cell::Int(msgs.records.len() as i64));
    put(
        "unmatched_sends",
        Cell::Int(msgs.unmatched_sends.len() as i64),
    );
    put(
        "unmatched_recvs",
        Cell::Int(msgs.unmatched_recvs.len() as i64),
    );
    put(
        "approx_heap_bytes",
        Cell::Int(ev.approx_heap_bytes() as i64),
    );
    for (k, v) in trace.metadata() {
        put(&format!("meta:{k}"), Cell::Text(v.clone()));
    }
    emit_table(common, &table, SvgRender::No)
}
