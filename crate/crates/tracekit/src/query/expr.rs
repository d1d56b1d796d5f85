//! Filter expression tree and row-wise evaluation.
//!
//! Atoms compare one event field against literal values. Missing
//! attributes and type-incompatible comparisons make the *atom* false
//! (negation still inverts: `!(attr:x == 5)` is true on rows without
//! `x`).

use crate::model::{AttrValue, Trace};

/// Comparison operator of a filter atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// The event field an atom inspects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldRef {
    Name,
    Process,
    Thread,
    Timestamp,
    Kind,
    Attr(String),
}

/// A parsed filter expression.
#[derive(Debug, Clone, PartialEq)]
pub enum FilterExpr {
    Cmp {
        field: FieldRef,
        op: CmpOp,
        value: AttrValue,
    },
    /// `field in (v1, v2, ...)`: any equality holds.
    InSet {
        field: FieldRef,
        values: Vec<AttrValue>,
    },
    /// `field between lo and hi`: half-open, `lo <= field < hi`.
    Between {
        field: FieldRef,
        lo: AttrValue,
        hi: AttrValue,
    },
    /// `field matches "glob"` with `*` and `?` wildcards.
    Matches { field: FieldRef, pattern: String },
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
}

impl FilterExpr {
    /// Evaluates the expression against one row.
    pub fn matches_row(&self, trace: &Trace, row: usize) -> bool {
        eval_row(self, trace, row, None)
    }

    /// Number of `timestamp between` atoms in the tree.
    pub(crate) fn count_time_between(&self) -> usize {
        match self {
            FilterExpr::Between {
                field: FieldRef::Timestamp,
                ..
            } => 1,
            FilterExpr::Cmp { .. }
            | FilterExpr::InSet { .. }
            | FilterExpr::Between { .. }
            | FilterExpr::Matches { .. } => 0,
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.count_time_between() + b.count_time_between()
            }
            FilterExpr::Not(a) => a.count_time_between(),
        }
    }

    /// The unique `timestamp between` atom's bounds, if there is exactly
    /// one such atom.
    pub(crate) fn time_between_bounds(&self) -> Option<(&AttrValue, &AttrValue)> {
        match self {
            FilterExpr::Between {
                field: FieldRef::Timestamp,
                lo,
                hi,
            } => Some((lo, hi)),
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.time_between_bounds().or_else(|| b.time_between_bounds())
            }
            FilterExpr::Not(a) => a.time_between_bounds(),
            _ => None,
        }
    }
}

/// A field's value on one row, borrowed where possible.
enum FieldVal<'a> {
    I(i64),
    F(f64),
    S(&'a str),
    Missing,
}

fn field_val<'a>(trace: &'a Trace, row: usize, field: &FieldRef) -> FieldVal<'a> {
    let ev = trace.events();
    match field {
        FieldRef::Name => FieldVal::S(ev.name(row)),
        FieldRef::Process => FieldVal::I(ev.process(row) as i64),
        FieldRef::Thread => FieldVal::I(ev.thread(row) as i64),
        FieldRef::Timestamp => FieldVal::I(ev.ts(row)),
        FieldRef::Kind => FieldVal::S(ev.kind(row).as_str()),
        FieldRef::Attr(key) => match ev.attr(row, key) {
            Some(AttrValue::Int(v)) => FieldVal::I(*v),
            Some(AttrValue::Float(v)) => FieldVal::F(*v),
            Some(AttrValue::Str(s)) => FieldVal::S(s),
            None => FieldVal::Missing,
        },
    }
}

fn cmp_value(lhs: &FieldVal<'_>, op: CmpOp, rhs: &AttrValue) -> bool {
    use std::cmp::Ordering;
    let ord: Option<Ordering> = match (lhs, rhs) {
        (FieldVal::I(a), AttrValue::Int(b)) => Some(a.cmp(b)),
        (FieldVal::I(a), AttrValue::Float(b)) => (*a as f64).partial_cmp(b),
        (FieldVal::F(a), AttrValue::Int(b)) => a.partial_cmp(&(*b as f64)),
        (FieldVal::F(a), AttrValue::Float(b)) => a.partial_cmp(b),
        (FieldVal::S(a), AttrValue::Str(b)) => Some((*a).cmp(b.as_str())),
        _ => None, // missing field or type mismatch
    };
    match ord {
        None => false,
        Some(o) => match op {
            CmpOp::Eq => o == Ordering::Equal,
            CmpOp::Ne => o != Ordering::Equal,
            CmpOp::Lt => o == Ordering::Less,
            CmpOp::Le => o != Ordering::Greater,
            CmpOp::Gt => o == Ordering::Greater,
            CmpOp::Ge => o != Ordering::Less,
        },
    }
}

/// Row-wise evaluation. When `time_override` is set, the unique
/// `timestamp between` atom yields that value instead of testing the
/// row's own timestamp (used by window-clipped filtering, where a call
/// counts as inside the window if any part of it overlaps).
pub(crate) fn eval_row(
    expr: &FilterExpr,
    trace: &Trace,
    row: usize,
    time_override: Option<bool>,
) -> bool {
    match expr {
        FilterExpr::Cmp { field, op, value } => {
            cmp_value(&field_val(trace, row, field), *op, value)
        }
        FilterExpr::InSet { field, values } => {
            let v = field_val(trace, row, field);
            values.iter().any(|x| cmp_value(&v, CmpOp::Eq, x))
        }
        FilterExpr::Between { field, lo, hi } => {
            if *field == FieldRef::Timestamp {
                if let Some(b) = time_override {
                    return b;
                }
            }
            let v = field_val(trace, row, field);
            cmp_value(&v, CmpOp::Ge, lo) && cmp_value(&v, CmpOp::Lt, hi)
        }
        FilterExpr::Matches { field, pattern } => match field_val(trace, row, field) {
            FieldVal::S(s) => glob_match(pattern, s),
            _ => false,
        },
        FilterExpr::And(a, b) => {
            eval_row(a, trace, row, time_override) && eval_row(b, trace, row, time_override)
        }
        FilterExpr::Or(a, b) => {
            eval_row(a, trace, row, time_override) || eval_row(b, trace, row, time_override)
        }
        FilterExpr::Not(a) => !eval_row(a, trace, row, time_override),
    }
}

/// Glob match with `*` (any run) and `?` (any one character), by
/// two-pointer scan with star backtracking.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0usize, 0usize);
    let mut star: Option<usize> = None;
    let mut mark = 0usize;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some(pi);
            mark = ti;
            pi += 1;
        } else if let Some(s) = star {
            pi = s + 1;
            mark += 1;
            ti = mark;
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EventKind, TraceBuilder};

    fn sample() -> Trace {
        let mut b = TraceBuilder::new().repair(false);
        b.push(0, EventKind::Enter, "main", 0, 0);
        b.push_with_attrs(
            5,
            EventKind::Instant,
            "marker",
            0,
            0,
            vec![
                ("size".into(), AttrValue::Int(100)),
                ("label".into(), AttrValue::Str("warm".into())),
            ],
        );
        b.push(20, EventKind::Leave, "main", 0, 0);
        b.push(3, EventKind::Enter, "main", 1, 0);
        b.push(9, EventKind::Leave, "main", 1, 0);
        b.finish()
    }

    fn atom(field: FieldRef, op: CmpOp, value: AttrValue) -> FilterExpr {
        FilterExpr::Cmp { field, op, value }
    }

    #[test]
    fn field_comparisons() {
        let t = sample();
        let name_is_main = atom(FieldRef::Name, CmpOp::Eq, AttrValue::Str("main".into()));
        assert!(name_is_main.matches_row(&t, 0));
        assert!(!name_is_main.matches_row(&t, 1));
        let p1 = atom(FieldRef::Process, CmpOp::Eq, AttrValue::Int(1));
        assert!(p1.matches_row(&t, 3));
        assert!(!p1.matches_row(&t, 0));
        let late = atom(FieldRef::Timestamp, CmpOp::Ge, AttrValue::Int(9));
        assert!(late.matches_row(&t, 2)); // Leave at 20
        let kind = atom(FieldRef::Kind, CmpOp::Eq, AttrValue::Str("Instant".into()));
        assert!(kind.matches_row(&t, 1));
    }

    #[test]
    fn attr_comparisons_and_missing_semantics() {
        let t = sample();
        let big = atom(FieldRef::Attr("size".into()), CmpOp::Gt, AttrValue::Int(50));
        assert!(big.matches_row(&t, 1));
        assert!(!big.matches_row(&t, 0)); // attr missing: atom is false
        let ne = atom(FieldRef::Attr("size".into()), CmpOp::Ne, AttrValue::Int(1));
        assert!(!ne.matches_row(&t, 0)); // still false when missing
        assert!(FilterExpr::Not(Box::new(ne)).matches_row(&t, 0));
        // Int attr compares against float literals numerically.
        let f = atom(
            FieldRef::Attr("size".into()),
            CmpOp::Lt,
            AttrValue::Float(100.5),
        );
        assert!(f.matches_row(&t, 1));
        // Type mismatch (string attr vs number) is false.
        let m = atom(FieldRef::Attr("label".into()), CmpOp::Eq, AttrValue::Int(3));
        assert!(!m.matches_row(&t, 1));
    }

    #[test]
    fn set_between_and_boolean_operators() {
        let t = sample();
        let in_set = FilterExpr::InSet {
            field: FieldRef::Process,
            values: vec![AttrValue::Int(1), AttrValue::Int(7)],
        };
        assert!(in_set.matches_row(&t, 3));
        assert!(!in_set.matches_row(&t, 0));
        let window = FilterExpr::Between {
            field: FieldRef::Timestamp,
            lo: AttrValue::Int(5),
            hi: AttrValue::Int(20),
        };
        assert!(window.matches_row(&t, 1)); // ts 5 included
        assert!(!window.matches_row(&t, 2)); // ts 20 excluded (half-open)
        let both = FilterExpr::And(
            Box::new(in_set.clone()),
            Box::new(FilterExpr::Not(Box::new(window.clone()))),
        );
        assert!(!both.matches_row(&t, 1));
        let either = FilterExpr::Or(Box::new(in_set), Box::new(window));
        assert!(either.matches_row(&t, 1));
    }

    #[test]
    fn glob_matching() {
        assert!(glob_match("MPI_*", "MPI_Send"));
        assert!(glob_match("*loss*", "compute_loss_fn"));
        assert!(glob_match("step?", "step7"));
        assert!(!glob_match("step?", "step12"));
        assert!(glob_match("*", ""));
        assert!(glob_match("a*b*c", "a__b__b__c"));
        assert!(!glob_match("a*b*c", "a__c__b"));
        assert!(!glob_match("", "x"));
        assert!(glob_match("", ""));
    }

    #[test]
    fn time_between_atom_counting() {
        let w = |lo: i64, hi: i64| FilterExpr::Between {
            field: FieldRef::Timestamp,
            lo: AttrValue::Int(lo),
            hi: AttrValue::Int(hi),
        };
        assert_eq!(w(0, 5).count_time_between(), 1);
        let two = FilterExpr::Or(Box::new(w(0, 5)), Box::new(w(9, 12)));
        assert_eq!(two.count_time_between(), 2);
        let none = FilterExpr::Between {
            field: FieldRef::Attr("size".into()),
            lo: AttrValue::Int(0),
            hi: AttrValue::Int(5),
        };
        assert_eq!(none.count_time_between(), 0);
        assert_eq!(w(3, 8).time_between_bounds().unwrap().0, &AttrValue::Int(3));
    }
}
