//! Tabular analysis results.
//!
//! Every analysis returns an [`AnalysisTable`]: labeled rows, typed columns,
//! and exact cells (integer nanoseconds stay integers; ratios are `f64`).
//! The report module turns tables into CSV, JSON, plain text, or SVG without
//! rounding any data value.

/// One table cell. Time totals are `Int` nanoseconds; ratios and
/// attribute-derived metrics are `Float`; labels are `Text`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Numeric view of the cell, if it has one.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Cell::Int(v) => Some(*v),
            _ => None,
        }
    }
}

impl std::fmt::Display for Cell {
    /// Exact rendering: integers in decimal, floats via Rust's
    /// shortest-roundtrip formatting, text verbatim.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// A typed column: display label plus an optional unit (e.g. `ns`).
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub label: String,
    pub unit: Option<String>,
}

/// A rectangular analysis result with labeled rows.
///
/// Invariant: every row has exactly one cell per column.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisTable {
    /// Header for the row-label column ("name", "process", "bin_start", ...).
    row_key: String,
    row_labels: Vec<String>,
    columns: Vec<Column>,
    /// Row-major cells; `cells[r][c]` belongs to `row_labels[r]` and
    /// `columns[c]`.
    cells: Vec<Vec<Cell>>,
}

impl AnalysisTable {
    pub fn new(row_key: &str) -> Self {
        AnalysisTable {
            row_key: row_key.to_owned(),
            row_labels: Vec::new(),
            columns: Vec::new(),
            cells: Vec::new(),
        }
    }

    /// Declares a column. Must be called before any rows are pushed.
    pub fn add_column(&mut self, label: &str, unit: Option<&str>) -> &mut Self {
        assert!(
            self.cells.is_empty(),
            "columns must be declared before rows"
        );
        self.columns.push(Column {
            label: label.to_owned(),
            unit: unit.map(str::to_owned),
        });
        self
    }

    /// Appends a row; panics if the cell count does not match the columns.
    pub fn push_row(&mut self, label: &str, cells: Vec<Cell>) {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "row width must equal column count"
        );
        self.row_labels.push(label.to_owned());
        self.cells.push(cells);
    }

    pub fn row_key(&self) -> &str {
        &self.row_key
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_labels.is_empty()
    }

    pub fn row_label(&self, row: usize) -> &str {
        &self.row_labels[row]
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row][col]
    }

    pub fn row(&self, row: usize) -> &[Cell] {
        &self.cells[row]
    }

    /// Index of the column with the given label.
    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.label == label)
    }

    /// Looks a cell up by row label and column label.
    pub fn lookup(&self, row_label: &str, col_label: &str) -> Option<&Cell> {
        let r = self.row_labels.iter().position(|l| l == row_label)?;
        let c = self.column_index(col_label)?;
        Some(&self.cells[r][c])
    }

    /// Sum of a numeric column as `f64` (text cells count as 0).
    pub fn column_sum(&self, col: usize) -> f64 {
        self.cells
            .iter()
            .map(|row| row[col].as_f64().unwrap_or(0.0))
            .sum()
    }

    /// Sum of an integer column; `None` if any cell is non-integer.
    pub fn column_sum_i64(&self, col: usize) -> Option<i64> {
        let mut total = 0i64;
        for row in &self.cells {
            total = total.checked_add(row[col].as_i64()?)?;
        }
        Some(total)
    }

    /// Keeps only the first `k` rows (tables are built pre-sorted by
    /// relevance, so this is "top k").
    pub fn truncate_rows(&mut self, k: usize) {
        self.row_labels.truncate(k);
        self.cells.truncate(k);
    }

    /// A copy containing only the named columns (in the given order).
    /// Unknown labels are ignored.
    pub fn select_columns(&self, labels: &[&str]) -> AnalysisTable {
        let picked: Vec<usize> = labels
            .iter()
            .filter_map(|l| self.column_index(l))
            .collect();
        let mut out = AnalysisTable::new(&self.row_key);
        for &c in &picked {
            out.add_column(&self.columns[c].label, self.columns[c].unit.as_deref());
        }
        for r in 0..self.n_rows() {
            out.push_row(
                &self.row_labels[r],
                picked.iter().map(|&c| self.cell(r, c).clone()).collect(),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> AnalysisTable {
        let mut t = AnalysisTable::new("name");
        t.add_column("exc_ns", Some("ns"));
        t.add_column("share", None);
        t.push_row("main", vec![Cell::Int(17), Cell::Float(0.5)]);
        t.push_row("foo", vec![Cell::Int(5), Cell::Float(0.25)]);
        t
    }

    #[test]
    fn lookup_by_labels() {
        let t = sample();
        assert_eq!(t.lookup("foo", "exc_ns"), Some(&Cell::Int(5)));
        assert_eq!(t.lookup("foo", "nope"), None);
        assert_eq!(t.lookup("bar", "exc_ns"), None);
    }

    #[test]
    fn sums_are_exact() {
        let t = sample();
        assert_eq!(t.column_sum_i64(0), Some(22));
        assert_eq!(t.column_sum_i64(1), None); // float column
        assert!((t.column_sum(1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cell_display_is_exact() {
        assert_eq!(Cell::Int(-5).to_string(), "-5");
        assert_eq!(Cell::Float(1.5).to_string(), "1.5");
        assert_eq!(Cell::Float(1.0 / 3.0).to_string(), "0.3333333333333333");
        assert_eq!(Cell::Text("x y".into()).to_string(), "x y");
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn row_width_mismatch_panics() {
        let mut t = AnalysisTable::new("name");
        t.add_column("a", None);
        t.push_row("r", vec![]);
    }
}
