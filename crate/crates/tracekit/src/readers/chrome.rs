//! Chrome trace-event JSON reader.
//!
//! Accepts both the bare-array form and the `{"traceEvents": [...]}` object
//! form. Microsecond timestamps are normalized to integer nanoseconds
//! (`round(ts * 1000)`). Phase handling:
//!
//! * `B`/`E` become Enter/Leave (per-stream name stacks; an `E` may omit
//!   its name, which closes the innermost open call),
//! * `X` expands to an Enter/Leave pair (`dur` rounded separately so the
//!   duration is preserved),
//! * `i`/`I` become Instants,
//! * `M` metadata records process/thread names in the trace metadata,
//! * `s`/`f` flow pairs become `MpiSend`/`MpiRecv` instants carrying
//!   `partner`, `size`, and `tag` attributes,
//! * anything else is skipped and counted.
//!
//! `args` objects are flattened onto the event with dotted keys; on `X`
//! events they attach to the Enter row.

use std::collections::{HashMap, VecDeque};

use serde_json::Value;

use crate::comm::{MSG_RECV, MSG_SEND};
use crate::error::{Result, TraceError};
use crate::model::{AttrValue, EventKind, Trace, TraceBuilder};
use crate::readers::ReadOptions;
use crate::util::fnv1a64;

/// One side of a pending flow pair.
struct FlowSide {
    pid: u32,
    tid: u32,
    ts_ns: i64,
    size: Option<i64>,
    flow_name: Option<String>,
}

/// Parses a Chrome trace from a JSON string.
pub fn read_chrome_str(text: &str, opts: &ReadOptions) -> Result<Trace> {
    let root: Value = serde_json::from_str(text).map_err(|e| TraceError::MalformedJson {
        msg: e.to_string(),
    })?;
    let events = match &root {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("traceEvents")
            .and_then(Value::as_array)
            .ok_or_else(|| TraceError::MalformedJson {
                msg: "object form requires a `traceEvents` array".to_owned(),
            })?,
        _ => {
            return Err(TraceError::MalformedJson {
                msg: "root must be an array or an object with `traceEvents`".to_owned(),
            })
        }
    };

    let mut b = TraceBuilder::new().strict(opts.strict);
    let mut skipped: u64 = 0;
    let mut stacks: HashMap<(u32, u32), Vec<String>> = HashMap::new();
    let mut pending_s: HashMap<String, VecDeque<FlowSide>> = HashMap::new();
    let mut pending_f: HashMap<String, VecDeque<FlowSide>> = HashMap::new();

    for ev in events {
        let Some(obj) = ev.as_object() else {
            if opts.strict {
                return Err(TraceError::MalformedJson {
                    msg: "trace event is not an object".to_owned(),
                });
            }
            skipped += 1;
            continue;
        };
        let ph = obj.get("ph").and_then(Value::as_str).unwrap_or("");

        // Location defaults to (0, 0) when pid/tid are absent.
        let loc = match (read_u32(obj.get("pid")), read_u32(obj.get("tid"))) {
            (Some(p), Some(t)) => Some((p, t)),
            _ => None,
        };

        macro_rules! defect {
            ($err:expr) => {{
                if opts.strict {
                    return Err($err);
                }
                skipped += 1;
                continue;
            }};
        }

        match ph {
            "B" => {
                let Some((pid, tid)) = loc else {
                    defect!(malformed("B event with bad pid/tid"));
                };
                let (Some(name), Some(ts)) = (
                    obj.get("name").and_then(Value::as_str),
                    obj.get("ts").and_then(Value::as_f64),
                ) else {
                    defect!(malformed("B event missing name or ts"));
                };
                stacks.entry((pid, tid)).or_default().push(name.to_owned());
                b.push_with_attrs(us_to_ns(ts), EventKind::Enter, name, pid, tid, flatten_args(obj));
            }
            "E" => {
                let Some((pid, tid)) = loc else {
                    defect!(malformed("E event with bad pid/tid"));
                };
                let Some(ts) = obj.get("ts").and_then(Value::as_f64) else {
                    defect!(malformed("E event missing ts"));
                };
                let stack = stacks.entry((pid, tid)).or_default();
                let top_matches = match (stack.last(), obj.get("name").and_then(Value::as_str)) {
                    (None, _) => false,
                    (Some(_), None) => true,
                    (Some(top), Some(n)) => top == n,
                };
                if !top_matches {
                    defect!(TraceError::UnbalancedBeginEnd {
                        process: pid,
                        thread: tid,
                    });
                }
                let name = stack.pop().unwrap();
                b.push_with_attrs(us_to_ns(ts), EventKind::Leave, &name, pid, tid, flatten_args(obj));
            }
            "X" => {
                let Some((pid, tid)) = loc else {
                    defect!(malformed("X event with bad pid/tid"));
                };
                let (Some(name), Some(ts), Some(dur)) = (
                    obj.get("name").and_then(Value::as_str),
                    obj.get("ts").and_then(Value::as_f64),
                    obj.get("dur").and_then(Value::as_f64),
                ) else {
                    defect!(malformed("X event missing name, ts, or dur"));
                };
                let enter = us_to_ns(ts);
                let leave = enter + us_to_ns(dur);
                b.push_with_attrs(enter, EventKind::Enter, name, pid, tid, flatten_args(obj));
                b.push(leave, EventKind::Leave, name, pid, tid);
            }
            "i" | "I" => {
                let Some((pid, tid)) = loc else {
                    defect!(malformed("instant event with bad pid/tid"));
                };
                let (Some(name), Some(ts)) = (
                    obj.get("name").and_then(Value::as_str),
                    obj.get("ts").and_then(Value::as_f64),
                ) else {
                    defect!(malformed("instant event missing name or ts"));
                };
                b.push_with_attrs(us_to_ns(ts), EventKind::Instant, name, pid, tid, flatten_args(obj));
            }
            "M" => {
                let name = obj.get("name").and_then(Value::as_str).unwrap_or("");
                let label = obj
                    .get("args")
                    .and_then(Value::as_object)
                    .and_then(|a| a.get("name"))
                    .and_then(Value::as_str);
                if let (Some(label), Some((pid, tid))) = (label, loc) {
                    match name {
                        "process_name" => b.set_metadata(&format!("process_name.{pid}"), label),
                        "thread_name" => {
                            b.set_metadata(&format!("thread_name.{pid}.{tid}"), label)
                        }
                        _ => {}
                    }
                }
            }
            "s" | "f" => {
                let Some((pid, tid)) = loc else {
                    defect!(malformed("flow event with bad pid/tid"));
                };
                let Some(ts) = obj.get("ts").and_then(Value::as_f64) else {
                    defect!(malformed("flow event missing ts"));
                };
                let Some(key) = flow_key(obj.get("id")) else {
                    defect!(malformed("flow event missing id"));
                };
                let side = FlowSide {
                    pid,
                    tid,
                    ts_ns: us_to_ns(ts),
                    size: obj
                        .get("args")
                        .and_then(Value::as_object)
                        .and_then(|a| a.get("size"))
                        .and_then(Value::as_f64)
                        .map(|v| v.round().max(0.0) as i64),
                    flow_name: obj.get("name").and_then(Value::as_str).map(str::to_owned),
                };
                if ph == "s" {
                    match pending_f.get_mut(&key).and_then(VecDeque::pop_front) {
                        Some(fin) => emit_flow_pair(&mut b, &key, side, fin),
                        None => pending_s.entry(key).or_default().push_back(side),
                    }
                } else {
                    match pending_s.get_mut(&key).and_then(VecDeque::pop_front) {
                        Some(start) => emit_flow_pair(&mut b, &key, start, side),
                        None => pending_f.entry(key).or_default().push_back(side),
                    }
                }
            }
            _ => {
                // Counters, async spans, samples, object lifecycles, ...
                skipped += 1;
            }
        }
    }

    if opts.strict {
        // Deterministic: report the smallest unbalanced (pid, tid).
        let mut open: Vec<(u32, u32)> = stacks
            .iter()
            .filter(|(_, stack)| !stack.is_empty())
            .map(|(&k, _)| k)
            .collect();
        open.sort_unstable();
        if let Some(&(process, thread)) = open.first() {
            return Err(TraceError::UnbalancedBeginEnd { process, thread });
        }
    }

    let dropped_flows: u64 = pending_s
        .values()
        .chain(pending_f.values())
        .map(|q| q.len() as u64)
        .sum();

    b.set_metadata("source_format", "chrome");
    b.set_metadata("skipped_events", &skipped.to_string());
    b.set_metadata("dropped_flows", &dropped_flows.to_string());
    Ok(b.finish())
}

fn malformed(msg: &str) -> TraceError {
    TraceError::MalformedJson {
        msg: msg.to_owned(),
    }
}

/// Microseconds (possibly fractional) to integer nanoseconds, rounding
/// half away from zero.
fn us_to_ns(us: f64) -> i64 {
    (us * 1000.0).round() as i64
}

/// pid/tid extraction: JSON numbers or numeric strings; absent means 0.
fn read_u32(v: Option<&Value>) -> Option<u32> {
    match v {
        None => Some(0),
        Some(Value::Number(n)) => {
            let x = n.as_i64()?;
            u32::try_from(x).ok()
        }
        Some(Value::String(s)) => s.trim().parse::<u32>().ok(),
        Some(_) => None,
    }
}

/// Normalizes a flow id (number or string) to a map key.
fn flow_key(id: Option<&Value>) -> Option<String> {
    match id? {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Numeric flow ids become the message tag directly; other ids hash.
fn tag_from_key(key: &str) -> i64 {
    key.parse::<i64>()
        .unwrap_or_else(|_| fnv1a64(key.as_bytes()) as i64)
}

fn emit_flow_pair(b: &mut TraceBuilder, key: &str, start: FlowSide, fin: FlowSide) {
    let tag = tag_from_key(key);
    let size = start.size.or(fin.size).unwrap_or(0);
    let mut send_attrs = vec![
        ("partner".to_owned(), AttrValue::Int(fin.pid as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
        ("tag".to_owned(), AttrValue::Int(tag)),
    ];
    if let Some(n) = &start.flow_name {
        send_attrs.push(("flow_name".to_owned(), AttrValue::Str(n.clone())));
    }
    b.push_with_attrs(
        start.ts_ns,
        EventKind::Instant,
        MSG_SEND,
        start.pid,
        start.tid,
        send_attrs,
    );

    let mut recv_attrs = vec![
        ("partner".to_owned(), AttrValue::Int(start.pid as i64)),
        ("size".to_owned(), AttrValue::Int(size)),
        ("tag".to_owned(), AttrValue::Int(tag)),
    ];
    if let Some(n) = fin.flow_name.as_ref().or(start.flow_name.as_ref()) {
        recv_attrs.push(("flow_name".to_owned(), AttrValue::Str(n.clone())));
    }
    b.push_with_attrs(
        fin.ts_ns,
        EventKind::Instant,
        MSG_RECV,
        fin.pid,
        fin.tid,
        recv_attrs,
    );
}

/// Flattens an `args` object into dotted attribute keys. Numbers become
/// `Int` when integral, `Float` otherwise; booleans become 0/1; nulls are
/// dropped; arrays are stored as their JSON text.
fn flatten_args(obj: &serde_json::Map<String, Value>) -> Vec<(String, AttrValue)> {
    let mut out = Vec::new();
    if let Some(args) = obj.get("args").and_then(Value::as_object) {
        for (k, v) in args {
            flatten_value(k, v, &mut out);
        }
    }
    out
}

fn flatten_value(key: &str, v: &Value, out: &mut Vec<(String, AttrValue)>) {
    match v {
        Value::Null => {}
        Value::Bool(x) => out.push((key.to_owned(), AttrValue::Int(*x as i64))),
        Value::Number(n) => {
            let attr = if let Some(i) = n.as_i64() {
                AttrValue::Int(i)
            } else {
                AttrValue::Float(n.as_f64().unwrap_or(f64::NAN))
            };
            out.push((key.to_owned(), attr));
        }
        Value::String(s) => out.push((key.to_owned(), AttrValue::Str(s.clone()))),
        Value::Array(_) => out.push((
            key.to_owned(),
            AttrValue::Str(serde_json::to_string(v).unwrap_or_default()),
        )),
        Value::Object(o) => {
            for (k, inner) in o {
                flatten_value(&format!("{key}.{k}"), inner, out);
            }
        }
    }
}
