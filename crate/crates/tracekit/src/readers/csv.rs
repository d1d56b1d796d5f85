//! The canonical CSV trace format.
//!
//! Layout: `timestamp,event_type,name,process[,thread[,attributes]]`.
//! Timestamps are non-negative integer nanoseconds; `event_type` is one of
//! `Enter`/`Leave`/`Instant`; a missing `thread` column means thread 0.
//!
//! The `attributes` column packs typed key/value pairs as `k=v;k2=v2`.
//! Within keys and values, `;`, `=`, and `\` are escaped with a backslash.
//! Value typing is sniffed from the raw (pre-unescape) token: all digits
//! (with optional sign) is an integer, anything `f64`-parseable is a float,
//! everything else is a string. The writer protects string values that
//! would sniff numeric (e.g. the string `"123"`) with a leading backslash,
//! so types survive a round trip exactly.

use ::csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::error::{Result, TraceError};
use crate::model::{AttrValue, EventKind, Trace, TraceBuilder};
use crate::readers::ReadOptions;

const BASE_HEADER: [&str; 4] = ["timestamp", "event_type", "name", "process"];

/// Parses a canonical-CSV trace from a string.
///
/// Lenient mode skips malformed rows and records the count in the
/// `skipped_events` metadata key; strict mode fails on the first one.
pub fn read_csv_str(text: &str, opts: &ReadOptions) -> Result<Trace> {
    let mut rdr = ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .from_reader(text.as_bytes());

    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(|e| TraceError::MalformedHeader {
            found: e.to_string(),
        })?,
        None => {
            return Err(TraceError::MalformedHeader {
                found: String::new(),
            })
        }
    };
    let n_cols = validate_header(&header)?;

    let mut b = TraceBuilder::new().strict(opts.strict);
    let mut skipped: u64 = 0;

    for rec in records {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                if opts.strict {
                    return Err(TraceError::MalformedRow {
                        line: e
                            .position()
                            .map(|p| p.line())
                            .unwrap_or(0),
                        msg: e.to_string(),
                    });
                }
                skipped += 1;
                continue;
            }
        };
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        match parse_row(&rec, n_cols) {
            Ok((ts, kind, name, process, thread, attrs)) => {
                b.push_with_attrs(ts, kind, &name, process, thread, attrs);
            }
            Err(msg) => {
                if opts.strict {
                    return Err(TraceError::MalformedRow { line, msg });
                }
                skipped += 1;
            }
        }
    }

    b.set_metadata("source_format", "csv");
    b.set_metadata("skipped_events", &skipped.to_string());
    Ok(b.finish())
}

/// Checks the header against the accepted layouts and returns the column
/// count (4, 5, or 6).
fn validate_header(header: &StringRecord) -> Result<usize> {
    let cells: Vec<String> = header
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let c = if i == 0 {
                c.trim_start_matches('\u{feff}')
            } else {
                c
            };
            c.trim().to_owned()
        })
        .collect();

    let ok = match cells.len() {
        4 => cells == BASE_HEADER,
        5 => cells[..4] == BASE_HEADER && cells[4] == "thread",
        6 => cells[..4] == BASE_HEADER && cells[4] == "thread" && cells[5] == "attributes",
        _ => false,
    };
    if !ok {
        return Err(TraceError::MalformedHeader {
            found: cells.join(","),
        });
    }
    Ok(cells.len())
}

type ParsedRow = (i64, EventKind, String, u32, u32, Vec<(String, AttrValue)>);

fn parse_row(rec: &StringRecord, n_cols: usize) -> std::result::Result<ParsedRow, String> {
    if rec.len() != n_cols {
        return Err(format!("expected {n_cols} fields, found {}", rec.len()));
    }
    let ts: i64 = rec[0]
        .trim()
        .parse()
        .map_err(|_| format!("bad timestamp `{}`", &rec[0]))?;
    if ts < 0 {
        return Err(format!("negative timestamp {ts}"));
    }
    let kind = EventKind::from_str_exact(rec[1].trim())
        .ok_or_else(|| format!("unknown event_type `{}`", &rec[1]))?;
    let name = rec[2].to_owned();
    let process: u32 = rec[3]
        .trim()
        .parse()
        .map_err(|_| format!("bad process `{}`", &rec[3]))?;
    let thread: u32 = if n_cols >= 5 {
        rec[4]
            .trim()
            .parse()
            .map_err(|_| format!("bad thread `{}`", &rec[4]))?
    } else {
        0
    };
    let attrs = if n_cols >= 6 {
        parse_attrs(&rec[5])?
    } else {
        Vec::new()
    };
    Ok((ts, kind, name, process, thread, attrs))
}

/// Parses the `k=v;k2=v2` attribute encoding.
fn parse_attrs(raw: &str) -> std::result::Result<Vec<(String, AttrValue)>, String> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for token in split_unescaped(raw, b';') {
        if token.is_empty() {
            continue; // tolerate stray separators
        }
        let (raw_key, raw_val) = split_first_unescaped(token, b'=')
            .ok_or_else(|| format!("attribute `{token}` has no `=`"))?;
        let key = unescape(raw_key);
        if key.is_empty() {
            return Err(format!("attribute `{token}` has an empty key"));
        }
        out.push((key, decode_value(raw_val)));
    }
    Ok(out)
}

/// Serializes a trace to the canonical CSV layout: always six columns,
/// attributes sorted by key, LF line endings.
pub fn write_csv_string(trace: &Trace) -> String {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["timestamp", "event_type", "name", "process", "thread", "attributes"])
        .expect("write to Vec cannot fail");

    let ev = trace.events();
    for i in 0..ev.len() {
        let attrs: Vec<String> = ev
            .row_attrs(i) // sorted by key
            .into_iter()
            .map(|(k, v)| format!("{}={}", escape_token(k), encode_value(v)))
            .collect();
        w.write_record([
            ev.ts(i).to_string(),
            ev.kind(i).as_str().to_owned(),
            ev.name(i).to_owned(),
            ev.process(i).to_string(),
            ev.thread(i).to_string(),
            attrs.join(";"),
        ])
        .expect("write to Vec cannot fail");
    }
    String::from_utf8(w.into_inner().expect("no flush error on Vec")).expect("output is UTF-8")
}

// ---- attribute token encoding ----------------------------------------

/// Splits on every unescaped `sep` byte. Separators are ASCII, so byte
/// scanning is UTF-8 safe.
fn split_unescaped(s: &str, sep: u8) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if escaped {
            escaped = false;
        } else if b == b'\\' {
            escaped = true;
        } else if b == sep {
            out.push(&s[start..i]);
            start = i + 1;
        }
    }
    out.push(&s[start..]);
    out
}

/// Splits at the first unescaped `sep`, if any.
fn split_first_unescaped(s: &str, sep: u8) -> Option<(&str, &str)> {
    let bytes = s.as_bytes();
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if escaped {
            escaped = false;
        } else if b == b'\\' {
            escaped = true;
        } else if b == sep {
            return Some((&s[..i], &s[i + 1..]));
        }
    }
    None
}

/// Removes one level of backslash escaping. A backslash before any
/// character yields that character; a trailing backslash is literal.
fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(next) => out.push(next),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Escapes `\`, `;`, and `=` in a key or string value.
fn escape_token(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, '\\' | ';' | '=') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// True if the raw token would be read back as an integer.
fn sniffs_as_int(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// True if the raw token would be read back as any number.
fn sniffs_numeric(s: &str) -> bool {
    sniffs_as_int(s) || s.parse::<f64>().is_ok()
}

/// Types a raw value token: integer, float, or (unescaped) string.
fn decode_value(raw: &str) -> AttrValue {
    if sniffs_as_int(raw) {
        if let Ok(v) = raw.parse::<i64>() {
            return AttrValue::Int(v);
        }
        // Digits beyond i64 range degrade to float.
        if let Ok(v) = raw.parse::<f64>() {
            return AttrValue::Float(v);
        }
    } else if let Ok(v) = raw.parse::<f64>() {
        return AttrValue::Float(v);
    }
    AttrValue::Str(unescape(raw))
}

/// Encodes a value so `decode_value` recovers both type and content.
///
/// Floats use Rust's `{:?}` formatting (shortest round-trip, always
/// distinguishable from an integer). A string that would sniff numeric is
/// protected with a leading backslash.
fn encode_value(v: &AttrValue) -> String {
    match v {
        AttrValue::Int(x) => x.to_string(),
        AttrValue::Float(x) => format!("{x:?}"),
        AttrValue::Str(s) => {
            let escaped = escape_token(s);
            if sniffs_numeric(&escaped) {
                format!("\\{escaped}")
            } else {
                escaped
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SYNTHETIC_LEAVE_ATTR;

    fn roundtrip(trace: &Trace) -> Trace {
        read_csv_str(&write_csv_string(trace), &ReadOptions::default()).unwrap()
    }

    fn tables_equal(a: &Trace, b: &Trace) -> bool {
        let (ea, eb) = (a.events(), b.events());
        ea.len() == eb.len()
            && (0..ea.len()).all(|i| {
                ea.ts(i) == eb.ts(i)
                    && ea.kind(i) == eb.kind(i)
                    && ea.name(i) == eb.name(i)
                    && ea.process(i) == eb.process(i)
                    && ea.thread(i) == eb.thread(i)
                    && ea.row_attrs(i) == eb.row_attrs(i)
            })
    }

    #[test]
    fn minimal_four_column_trace() {
        let t = read_csv_str(
            "timestamp,event_type,name,process\n0,Enter,main,0\n100,Leave,main,0\n",
            &ReadOptions::default(),
        )
        .unwrap();
        assert_eq!(t.events().len(), 2);
        assert_eq!(t.events().thread(0), 0);
        assert_eq!(t.metadata().get("skipped_events").unwrap(), "0");
        assert_eq!(t.metadata().get("source_format").unwrap(), "csv");
    }

    #[test]
    fn attribute_types_survive_a_round_trip() {
        let mut b = TraceBuilder::new().repair(false);
        b.push_with_attrs(
            0,
            EventKind::Instant,
            "msg",
            0,
            0,
            vec![
                ("int".into(), AttrValue::Int(123)),
                ("int_str".into(), AttrValue::Str("123".into())),
                ("float".into(), AttrValue::Float(123.0)),
                ("neg".into(), AttrValue::Int(-7)),
                ("sci".into(), AttrValue::Str("1e9".into())),
                ("real_sci".into(), AttrValue::Float(1e9)),
                ("plain".into(), AttrValue::Str("hello world".into())),
            ],
        );
        let t = b.finish();
        let back = roundtrip(&t);
        assert!(tables_equal(&t, &back), "typed attrs must round-trip");
        assert_eq!(back.events().attr(0, "int"), Some(&AttrValue::Int(123)));
        assert_eq!(
            back.events().attr(0, "int_str"),
            Some(&AttrValue::Str("123".into()))
        );
        assert_eq!(
            back.events().attr(0, "float"),
            Some(&AttrValue::Float(123.0))
        );
    }

    #[test]
    fn separators_and_quotes_survive_a_round_trip() {
        let mut b = TraceBuilder::new().repair(false);
        b.push_with_attrs(
            5,
            EventKind::Instant,
            "name, with \"quotes\"\nand newline",
            1,
            2,
            vec![
                ("k;ey=1".into(), AttrValue::Str("a;b=c\\d".into())),
                ("uni".into(), AttrValue::Str("héllo→world".into())),
            ],
        );
        let t = b.finish();
        let back = roundtrip(&t);
        assert!(tables_equal(&t, &back));
    }

    #[test]
    fn writer_emits_sorted_attrs_and_lf() {
        let mut b = TraceBuilder::new().repair(false);
        b.push_with_attrs(
            1,
            EventKind::Instant,
            "x",
            0,
            0,
            vec![
                ("zeta".into(), AttrValue::Int(1)),
                ("alpha".into(), AttrValue::Int(2)),
            ],
        );
        let out = write_csv_string(&b.finish());
        assert_eq!(
            out,
            "timestamp,event_type,name,process,thread,attributes\n1,Instant,x,0,0,alpha=2;zeta=1\n"
        );
    }

    #[test]
    fn empty_trace_writes_header_only() {
        let t = TraceBuilder::new().finish();
        let out = write_csv_string(&t);
        assert_eq!(out, "timestamp,event_type,name,process,thread,attributes\n");
        let back = read_csv_str(&out, &ReadOptions::default()).unwrap();
        assert!(back.events().is_empty());
    }

    #[test]
    fn lenient_mode_skips_and_counts_bad_rows() {
        let text = "timestamp,event_type,name,process\n\
                    0,Enter,main,0\n\
                    oops,Enter,bad,0\n\
                    5,Sideways,bad,0\n\
                    -3,Enter,bad,0\n\
                    9,Leave,main,0\n";
        let t = read_csv_str(text, &ReadOptions::default()).unwrap();
        assert_eq!(t.events().len(), 2);
        assert_eq!(t.metadata().get("skipped_events").unwrap(), "3");
    }

    #[test]
    fn strict_mode_reports_the_offending_line() {
        let text = "timestamp,event_type,name,process\n0,Enter,main,0\noops,Enter,bad,0\n";
        match read_csv_str(text, &ReadOptions::strict()) {
            Err(TraceError::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected MalformedRow, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_is_always_an_error() {
        let err = read_csv_str("time,kind,who,rank\n", &ReadOptions::default()).unwrap_err();
        assert!(matches!(err, TraceError::MalformedHeader { .. }));
        let err = read_csv_str("", &ReadOptions::default()).unwrap_err();
        assert!(matches!(err, TraceError::MalformedHeader { .. }));
    }

    #[test]
    fn five_and_six_column_headers_parse() {
        let t5 = read_csv_str(
            "timestamp,event_type,name,process,thread\n1,Instant,x,0,7\n",
            &ReadOptions::default(),
        )
        .unwrap();
        assert_eq!(t5.events().thread(0), 7);
        let t6 = read_csv_str(
            "timestamp,event_type,name,process,thread,attributes\n1,Instant,x,0,7,k=2\n",
            &ReadOptions::default(),
        )
        .unwrap();
        assert_eq!(t6.events().attr(0, "k"), Some(&AttrValue::Int(2)));
    }

    #[test]
    fn reader_repairs_unclosed_calls() {
        let text = "timestamp,event_type,name,process\n0,Enter,main,0\n10,Enter,step,0\n";
        let t = read_csv_str(text, &ReadOptions::default()).unwrap();
        assert_eq!(t.events().len(), 4);
        let ev = t.events();
        assert_eq!(ev.kind(2), EventKind::Leave);
        assert_eq!(ev.name(2), "step");
        assert_eq!(ev.ts(2), 10);
        assert_eq!(ev.attr(2, SYNTHETIC_LEAVE_ATTR), Some(&AttrValue::Int(1)));
        // Matching now succeeds.
        assert!(t.matching().unwrap().unclosed_enters == 0);
    }

    #[test]
    fn float_encoding_distinguishes_whole_floats() {
        assert_eq!(encode_value(&AttrValue::Float(2.0)), "2.0");
        assert_eq!(decode_value("2.0"), AttrValue::Float(2.0));
        assert_eq!(decode_value("2"), AttrValue::Int(2));
        assert_eq!(decode_value("\\2"), AttrValue::Str("2".into()));
        // Digit strings beyond i64 degrade to float rather than failing.
        assert_eq!(
            decode_value("99999999999999999999"),
            AttrValue::Float(1e20)
        );
    }
}
