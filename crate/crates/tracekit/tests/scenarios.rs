//! Library-level scenarios and property tests: a synthetic ring-exchange
//! application driven through the whole analysis stack, plus randomized
//! round-trip and invariant checks over arbitrary event soups.

use proptest::prelude::*;

use tracekit::comm::{CommUnit, MSG_RECV, MSG_SEND};
use tracekit::diagnostics::{IdlePredicate, PathSegment};
use tracekit::model::{AttrValue, EventKind, Trace, TraceBuilder};
use tracekit::patterns::{pattern_detection, PatternOptions};
use tracekit::profiles::{flat_profile, time_profile, Metric};
use tracekit::query::{filter_str, multi_run_table, FilterOptions};
use tracekit::readers::{read_chrome_str, read_csv_str, write_csv_string, ReadOptions};

fn msg_attrs(partner: u32, size: i64) -> Vec<(String, AttrValue)> {
    vec![
        ("partner".to_owned(), AttrValue::Int(partner as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
        ("tag".to_owned(), AttrValue::Int(0)),
    ]
}

/// Four ranks, six iterations of compute + ring exchange, with rank 2
/// slowed down by `slow_extra` nanoseconds per iteration.
fn ring_app(slow_extra: i64) -> Trace {
    const RANKS: u32 = 4;
    const ITERS: i64 = 6;
    let mut b = TraceBuilder::new();
    for r in 0..RANKS {
        let ri = r as i64;
        b.push(ri, EventKind::Enter, "main", r, 0);
        b.push(ri + 2, EventKind::Enter, "init", r, 0);
        b.push(ri + 502, EventKind::Leave, "init", r, 0);
        for k in 0..ITERS {
            let t0 = 1_000 + 2_000 * k + ri;
            b.push(t0, EventKind::Instant, "iteration_start", r, 0);
            let dur = 800 + if r == 2 { slow_extra } else { 0 };
            b.push(t0 + 10, EventKind::Enter, "compute", r, 0);
            b.push(t0 + 10 + dur, EventKind::Leave, "compute", r, 0);
            let send_ts = t0 + 15 + dur;
            b.push_with_attrs(
                send_ts,
                EventKind::Instant,
                MSG_SEND,
                r,
                0,
                msg_attrs((r + 1) % RANKS, 1024),
            );
            b.push(send_ts + 5, EventKind::Enter, "MPI_Wait", r, 0);
            b.push_with_attrs(
                2_000 * k + 2_500 + ri,
                EventKind::Instant,
                MSG_RECV,
                r,
                0,
                msg_attrs((r + 3) % RANKS, 1024),
            );
            b.push(2_000 * k + 2_600 + ri, EventKind::Leave, "MPI_Wait", r, 0);
        }
        b.push(13_000 + ri, EventKind::Enter, "finalize", r, 0);
        b.push(13_400 + ri, EventKind::Leave, "finalize", r, 0);
        b.push(13_500 + ri, EventKind::Leave, "main", r, 0);
    }
    b.finish()
}

#[test]
fn ring_app_flat_and_time_profiles_agree() {
    let trace = ring_app(600);
    let flat = flat_profile(&trace, &Metric::ExcNs).unwrap();
    // compute: 3 ranks x 6 x 800 + 1 rank x 6 x 1400.
    assert_eq!(flat.lookup("compute", "exc_ns").unwrap().as_i64(), Some(22_800));
    assert_eq!(flat.lookup("init", "exc_ns").unwrap().as_i64(), Some(2_000));
    assert_eq!(flat.lookup("finalize", "exc_ns").unwrap().as_i64(), Some(1_600));

    let tp = time_profile(&trace, 27).unwrap();
    let c = tp.column_index("compute").unwrap();
    assert_eq!(tp.column_sum_i64(c), Some(22_800));
}

#[test]
fn ring_app_communication_is_a_ring() {
    let trace = ring_app(600);
    let mat = trace.comm_matrix(CommUnit::Count).unwrap();
    assert_eq!(mat.n_rows(), 4);
    for s in 0..4usize {
        for d in 0..4usize {
            let want = if d == (s + 1) % 4 { 6 } else { 0 };
            assert_eq!(mat.cell(s, d).as_i64(), Some(want), "{s}->{d}");
        }
    }
    let by_proc = trace.comm_by_process(CommUnit::Bytes).unwrap();
    for r in 0..4 {
        let label = r.to_string();
        assert_eq!(by_proc.lookup(&label, "sent").unwrap().as_i64(), Some(6 * 1024));
        assert_eq!(by_proc.lookup(&label, "received").unwrap().as_i64(), Some(6 * 1024));
    }
    let msgs = trace.messages();
    assert_eq!(msgs.records.len(), 24);
    assert!(msgs.unmatched_sends.is_empty() && msgs.unmatched_recvs.is_empty());
}

#[test]
fn ring_app_imbalance_points_at_the_slow_rank() {
    let trace = ring_app(600);
    let table = trace.load_imbalance(&Metric::ExcNs).unwrap();
    assert_eq!(table.lookup("compute", "top_process").unwrap().as_i64(), Some(2));
    assert_eq!(table.lookup("compute", "max").unwrap().as_i64(), Some(6 * 1_400));
    assert_eq!(
        table.lookup("compute", "imbalance").unwrap().as_f64(),
        Some(8_400.0 / 5_700.0)
    );
}

#[test]
fn ring_app_idle_time_shrinks_on_the_slow_rank() {
    let trace = ring_app(600);
    let idle = trace.idle_time(&IdlePredicate::default()).unwrap();
    // MPI_Wait spans 780 ns per iteration, 180 on the late rank.
    for r in 0..4u32 {
        let want = if r == 2 { 6 * 180 } else { 6 * 780 };
        let label = r.to_string();
        assert_eq!(idle.lookup(&label, "idle_ns").unwrap().as_i64(), Some(want));
        assert_eq!(idle.lookup(&label, "span_ns").unwrap().as_i64(), Some(13_500));
    }
    // Sorted by idle time descending: the slow rank comes last.
    assert_eq!(idle.row_label(3), "2");
}

#[test]
fn ring_app_lateness_blames_the_slow_rank() {
    let trace = ring_app(600);
    let table = trace.lateness().unwrap();
    assert_eq!(table.row_label(0), "2");
    assert_eq!(table.lookup("2", "max_lateness_ns").unwrap().as_i64(), Some(602));
    // Ops per rank: init, then 5 per iteration; the first compute is op 2.
    assert_eq!(table.lookup("2", "at_step").unwrap().as_i64(), Some(2));
    // MPI_Wait wraps the receive it completes, so it shares the receive's
    // step; every rank's wait leave trails the earliest receive by 100.
    assert_eq!(table.lookup("0", "max_lateness_ns").unwrap().as_i64(), Some(100));
    assert_eq!(table.lookup("0", "at_step").unwrap().as_i64(), Some(5));
}

#[test]
fn ring_app_critical_path_runs_through_the_slow_rank() {
    let trace = ring_app(600);
    let path = trace.critical_path().unwrap();
    assert!(!path.truncated);
    assert_eq!(path.total_ns, 13_501);
    assert_eq!(path.segments.len(), 3);
    match (&path.segments[0], &path.segments[1], &path.segments[2]) {
        (
            PathSegment::Local { process: 2, start_ts: 2, .. },
            PathSegment::MessageHop { from: 2, to: 3, .. },
            PathSegment::Local { process: 3, end_ts: 13_503, .. },
        ) => {}
        other => panic!("unexpected path shape: {other:?}"),
    }
}

#[test]
fn ring_app_iterations_are_detected_as_periodic() {
    let trace = ring_app(600);
    let r = pattern_detection(&trace, "iteration_start", &PatternOptions::default()).unwrap();
    assert_eq!(r.process, 0, "occurrence ties resolve to the lowest rank");
    assert!(r.periodic);
    assert_eq!(r.occurrence_ts.len(), 6);
    assert_eq!(r.spans.len(), 5);
    for (k, s) in r.spans.iter().enumerate() {
        assert_eq!(s.start_ts, 1_000 + 2_000 * k as i64);
        assert_eq!(s.end_ts, 3_000 + 2_000 * k as i64);
    }
}

#[test]
fn multi_run_comparison_shows_the_fix() {
    let runs = vec![ring_app(600), ring_app(0)];
    let labels = vec!["slow".to_owned(), "even".to_owned()];
    let table = multi_run_table(&runs, Some(&labels), &Metric::ExcNs).unwrap();
    assert_eq!(table.columns()[0].label, "slow");
    assert_eq!(table.columns()[1].label, "even");
    assert_eq!(table.lookup("compute", "slow").unwrap().as_i64(), Some(22_800));
    assert_eq!(table.lookup("compute", "even").unwrap().as_i64(), Some(19_200));
    // Every function present in either run gets a row in both columns.
    assert!(table.lookup("MPI_Wait", "even").is_some());
}

#[test]
fn chrome_trace_flows_into_the_same_analyses() {
    let json = r#"[
        {"ph":"M","name":"process_name","pid":7,"args":{"name":"worker"}},
        {"ph":"B","name":"main","pid":7,"tid":1,"ts":0.5},
        {"ph":"X","name":"solve","pid":7,"tid":1,"ts":2,"dur":10},
        {"ph":"i","name":"mark","pid":7,"tid":1,"ts":20},
        {"ph":"E","name":"main","pid":7,"tid":1,"ts":100}
    ]"#;
    let trace = read_chrome_str(json, &ReadOptions::strict()).unwrap();
    let ev = trace.events();
    assert_eq!(ev.len(), 5);
    // Microsecond inputs land as nanoseconds.
    assert_eq!(ev.ts(0), 500);
    assert_eq!(ev.kind(1), EventKind::Enter);
    assert_eq!(ev.name(1), "solve");
    assert_eq!(ev.ts(2), 12_000);
    assert!(trace.metadata().iter().any(|(_, v)| v == "worker"));

    let flat = flat_profile(&trace, &Metric::ExcNs).unwrap();
    assert_eq!(flat.lookup("solve", "exc_ns").unwrap().as_i64(), Some(10_000));
    assert_eq!(flat.lookup("main", "exc_ns").unwrap().as_i64(), Some(89_500));
}

// ---------------------------------------------------------------------------
// Property tests over arbitrary event soups
// ---------------------------------------------------------------------------

const NAMES: [&str; 6] = ["alpha", "beta", "sol,ve", "tick \"q\"", "データ", "x;y=z\\w"];
const KEYS: [&str; 3] = ["size", "k e;y=1\\", "ключ"];

fn value_strategy() -> impl Strategy<Value = AttrValue> {
    prop_oneof![
        (-1_000_000i64..1_000_000).prop_map(AttrValue::Int),
        (-1e9f64..1e9).prop_map(AttrValue::Float),
        Just(AttrValue::Float(0.0)),
        Just(AttrValue::Float(1.5e-300)),
        prop::sample::select(vec!["", "123", "-4.5", "abc", "a;b=c\\d", "two\nlines"])
            .prop_map(|s| AttrValue::Str(s.to_owned())),
    ]
}

#[derive(Debug, Clone)]
struct SoupEvent {
    ts: i64,
    kind: EventKind,
    name: &'static str,
    process: u32,
    thread: u32,
    attrs: Vec<(String, AttrValue)>,
}

fn event_strategy() -> impl Strategy<Value = SoupEvent> {
    (
        // The interchange format defines timestamps as non-negative
        // nanoseconds since trace start.
        0i64..1_000,
        0usize..3,
        0usize..NAMES.len(),
        0u32..3,
        0u32..2,
        prop::collection::btree_map(prop::sample::select(KEYS.to_vec()), value_strategy(), 0..3),
    )
        .prop_map(|(ts, kind, name, process, thread, attrs)| SoupEvent {
            ts,
            kind: [EventKind::Enter, EventKind::Leave, EventKind::Instant][kind],
            name: NAMES[name],
            process,
            thread,
            attrs: attrs
                .into_iter()
                .map(|(k, v)| (k.to_owned(), v))
                .collect(),
        })
}

fn build_soup(events: &[SoupEvent]) -> Trace {
    let mut b = TraceBuilder::new();
    for e in events {
        b.push_with_attrs(e.ts, e.kind, e.name, e.process, e.thread, e.attrs.clone());
    }
    b.finish()
}

proptest! {
    /// Canonical CSV preserves every column and every attribute exactly.
    #[test]
    fn csv_roundtrip_is_lossless(events in prop::collection::vec(event_strategy(), 0..40)) {
        let a = build_soup(&events);
        let b = read_csv_str(&write_csv_string(&a), &ReadOptions::default()).unwrap();
        let (ea, eb) = (a.events(), b.events());
        prop_assert_eq!(ea.len(), eb.len());
        for i in 0..ea.len() {
            prop_assert_eq!(ea.ts(i), eb.ts(i));
            prop_assert_eq!(ea.kind(i), eb.kind(i));
            prop_assert_eq!(ea.name(i), eb.name(i));
            prop_assert_eq!(ea.process(i), eb.process(i));
            prop_assert_eq!(ea.thread(i), eb.thread(i));
            let attrs_a: Vec<(String, AttrValue)> = ea
                .row_attrs(i)
                .into_iter()
                .map(|(k, v)| (k.to_owned(), v.clone()))
                .collect();
            let attrs_b: Vec<(String, AttrValue)> = eb
                .row_attrs(i)
                .into_iter()
                .map(|(k, v)| (k.to_owned(), v.clone()))
                .collect();
            prop_assert_eq!(attrs_a, attrs_b, "row {}", i);
        }
    }

    /// Lenient matching pairs rows symmetrically and accounts for every
    /// unmatched row in its defect counters.
    #[test]
    fn matching_is_a_symmetric_partial_pairing(
        events in prop::collection::vec(event_strategy(), 0..40)
    ) {
        let t = build_soup(&events);
        let ev = t.events();
        let m = t.matching().unwrap();

        let mut unmatched_leaves = 0u32;
        let mut unmatched_enters = 0u32;
        for i in 0..ev.len() {
            match (ev.kind(i), m.matching[i]) {
                (EventKind::Enter, Some(j)) => {
                    let j = j as usize;
                    prop_assert!(i < j);
                    prop_assert_eq!(ev.kind(j), EventKind::Leave);
                    prop_assert_eq!(m.matching[j], Some(i as u32));
                    prop_assert_eq!(ev.name_id(i), ev.name_id(j));
                    prop_assert_eq!(ev.stream_of(i), ev.stream_of(j));
                    prop_assert_eq!(m.depth[i], m.depth[j]);
                }
                (EventKind::Enter, None) => unmatched_enters += 1,
                (EventKind::Leave, None) => unmatched_leaves += 1,
                (EventKind::Leave, Some(j)) => {
                    prop_assert_eq!(m.matching[j as usize], Some(i as u32));
                }
                (EventKind::Instant, pair) => prop_assert_eq!(pair, None),
            }
        }
        prop_assert_eq!(m.mismatched_leaves, unmatched_leaves);
        prop_assert_eq!(m.unclosed_enters, unmatched_enters);
    }

    /// A process filter keeps exactly that process's rows and is
    /// idempotent.
    #[test]
    fn process_filter_is_exact_and_idempotent(
        events in prop::collection::vec(event_strategy(), 0..40),
        target in 0u32..3,
    ) {
        let t = build_soup(&events);
        let expr = format!("process == {target}");
        let once = filter_str(&t, &expr, &FilterOptions::default()).unwrap();
        let ev = once.events();
        for i in 0..ev.len() {
            prop_assert_eq!(ev.process(i), target);
        }
        let want: usize = (0..t.events().len())
            .filter(|&i| t.events().process(i) == target)
            .count();
        prop_assert_eq!(ev.len(), want);
        let twice = filter_str(&once, &expr, &FilterOptions::default()).unwrap();
        prop_assert_eq!(write_csv_string(&twice), write_csv_string(&once));
    }

    /// With pair preservation off, a name filter is a plain row filter.
    #[test]
    fn raw_name_filter_selects_exactly_matching_rows(
        events in prop::collection::vec(event_strategy(), 0..40)
    ) {
        let t = build_soup(&events);
        let opts = FilterOptions { pair_preserving: false, time_clip: false };
        let kept = filter_str(&t, "name == \"alpha\"", &opts).unwrap();
        let want: usize = (0..t.events().len())
            .filter(|&i| t.events().name(i) == "alpha")
            .count();
        prop_assert_eq!(kept.events().len(), want);
    }
}
