//! Rendering analysis tables: CSV, JSON, aligned plain text, and SVG
//! plots (see [`svg`]).
//!
//! All three textual emitters are exact: integer cells print in decimal,
//! float cells use shortest-roundtrip formatting, nothing is rounded.

pub mod svg;

use crate::table::{AnalysisTable, Cell};

/// CSV with a header row: the row-key column first, then one column per
/// table column (units are not part of the CSV header).
pub fn to_csv_string(table: &AnalysisTable) -> String {
    let mut w = ::csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header: Vec<String> = vec![table.row_key().to_owned()];
    header.extend(table.columns().iter().map(|c| c.label.clone()));
    w.write_record(&header).expect("writing to memory");
    for r in 0..table.n_rows() {
        let mut rec: Vec<String> = vec![table.row_label(r).to_owned()];
        rec.extend((0..table.n_columns()).map(|c| table.cell(r, c).to_string()));
        w.write_record(&rec).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("valid utf8")
}

/// JSON array of row objects. Each object starts with the row key, then
/// the columns in table order. Integers stay JSON integers.
pub fn to_json_string(table: &AnalysisTable) -> String {
    use serde_json::{Map, Number, Value};
    let mut rows: Vec<Value> = Vec::with_capacity(table.n_rows());
    for r in 0..table.n_rows() {
        let mut obj = Map::new();
        obj.insert(
            table.row_key().to_owned(),
            Value::String(table.row_label(r).to_owned()),
        );
        for (c, col) in table.columns().iter().enumerate() {
            let v = match table.cell(r, c) {
                Cell::Int(x) => Value::Number(Number::from(*x)),
                Cell::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
                Cell::Text(s) => Value::String(s.clone()),
            };
            obj.insert(col.label.clone(), v);
        }
        rows.push(Value::Object(obj));
    }
    serde_json::to_string_pretty(&Value::Array(rows)).expect("tables serialize cleanly")
}

/// Space-aligned text: row labels and text cells left-aligned, numbers
/// right-aligned. Units show in the header as `label(unit)`.
pub fn to_text_string(table: &AnalysisTable) -> String {
    let n_cols = table.n_columns();
    let mut headers: Vec<String> = vec![table.row_key().to_owned()];
    for col in table.columns() {
        match &col.unit {
            Some(u) => headers.push(format!("{}({u})", col.label)),
            None => headers.push(col.label.clone()),
        }
    }

    let mut cells: Vec<Vec<String>> = Vec::with_capacity(table.n_rows());
    let mut numeric = vec![true; n_cols + 1];
    numeric[0] = false; // row labels stay left-aligned
    for r in 0..table.n_rows() {
        let mut row = vec![table.row_label(r).to_owned()];
        for c in 0..n_cols {
            let cell = table.cell(r, c);
            if matches!(cell, Cell::Text(_)) {
                numeric[c + 1] = false;
            }
            row.push(cell.to_string());
        }
        cells.push(row);
    }

    let mut width: Vec<usize> = headers.iter().map(String::len).collect();
    for row in &cells {
        for (c, text) in row.iter().enumerate() {
            width[c] = width[c].max(text.len());
        }
    }

    let mut out = String::new();
    let render = |out: &mut String, row: &[String]| {
        for (c, text) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            if numeric[c] {
                out.push_str(&" ".repeat(width[c] - text.len()));
                out.push_str(text);
            } else if c + 1 == row.len() {
                out.push_str(text); // no trailing padding
            } else {
                out.push_str(text);
                out.push_str(&" ".repeat(width[c] - text.len()));
            }
        }
        out.push('\n');
    };
    render(&mut out, &headers);
    for row in &cells {
        render(&mut out, row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::AnalysisTable;

    fn sample() -> AnalysisTable {
        let mut t = AnalysisTable::new("name");
        t.add_column("exc_ns", Some("ns"));
        t.add_column("share", None);
        t.push_row("main", vec![Cell::Int(17), Cell::Float(0.5)]);
        t.push_row("a,b\"q\"", vec![Cell::Int(-3), Cell::Float(1e-9)]);
        t
    }

    #[test]
    fn csv_quotes_and_stays_exact() {
        let csv = to_csv_string(&sample());
        assert_eq!(
            csv,
            "name,exc_ns,share\nmain,17,0.5\n\"a,b\"\"q\"\"\",-3,0.000000001\n"
        );
    }

    #[test]
    fn json_preserves_types_and_order() {
        let json = to_json_string(&sample());
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["name"], "main");
        assert_eq!(v[0]["exc_ns"], 17);
        assert_eq!(v[0]["share"], 0.5);
        assert_eq!(v[1]["exc_ns"], -3);
        // Key order: row key first, then columns in table order.
        let text = json.lines().map(str::trim).collect::<Vec<_>>().join("");
        let name_pos = text.find("\"name\"").unwrap();
        let exc_pos = text.find("\"exc_ns\"").unwrap();
        let share_pos = text.find("\"share\"").unwrap();
        assert!(name_pos < exc_pos && exc_pos < share_pos);
    }

    #[test]
    fn text_aligns_numbers_right() {
        let text = to_text_string(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "name    exc_ns(ns)        share");
        assert_eq!(lines[1], "main            17          0.5");
        assert_eq!(lines[2], "a,b\"q\"          -3  0.000000001");
    }

    #[test]
    fn empty_table_renders_headers_only() {
        let mut t = AnalysisTable::new("process");
        t.add_column("idle_ns", Some("ns"));
        assert_eq!(to_csv_string(&t), "process,idle_ns\n");
        assert_eq!(to_json_string(&t), "[]");
        assert_eq!(to_text_string(&t), "process  idle_ns(ns)\n");
    }
}
