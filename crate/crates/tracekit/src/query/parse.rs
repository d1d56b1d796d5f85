//! Text syntax for filter expressions.
//!
//! ```text
//! expr  := or
//! or    := and (('||' | 'or') and)*
//! and   := unary (('&&' | 'and') unary)*
//! unary := ('!' | 'not') unary | '(' expr ')' | atom
//! atom  := field ('==' '!=' '<' '<=' '>' '>=') value
//!        | field 'in' '(' value (',' value)* ')'
//!        | field 'between' value 'and' value     -- half-open
//!        | field 'matches' string-or-bareword    -- glob: * and ?
//! field := name | process | thread | timestamp | time
//!        | event_type | type | attr:KEY
//! value := number | "quoted" | 'quoted' | bareword
//! ```
//!
//! `time` is an alias for `timestamp`, `type` for `event_type`. Numbers
//! without a dot or exponent are integers; anything else is a float.

use crate::error::{Result, TraceError};
use crate::model::AttrValue;
use crate::query::expr::{CmpOp, FieldRef, FilterExpr};

/// Parses a filter expression, requiring the whole input to be consumed.
pub fn parse_filter(input: &str) -> Result<FilterExpr> {
    let tokens = lex(input)?;
    let mut p = Parser { tokens, pos: 0 };
    let expr = p.parse_or()?;
    if p.pos != p.tokens.len() {
        return Err(p.error(&format!("unexpected `{}`", p.tokens[p.pos].text())));
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    AttrKey(String),
    Str(String),
    Int(i64),
    Float(f64),
    Sym(&'static str),
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::AttrKey(k) => format!("attr:{k}"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Int(v) => v.to_string(),
            Tok::Float(v) => v.to_string(),
            Tok::Sym(s) => (*s).to_owned(),
        }
    }
}

fn bad(msg: String) -> TraceError {
    TraceError::BadExpr { msg }
}

fn lex(input: &str) -> Result<Vec<Tok>> {
    let b: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < b.len() {
        let c = b[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // Quoted strings with simple escapes.
        if c == '"' || c == '\'' {
            let quote = c;
            i += 1;
            let mut s = String::new();
            loop {
                let Some(&ch) = b.get(i) else {
                    return Err(bad("unterminated string".to_owned()));
                };
                i += 1;
                if ch == quote {
                    break;
                }
                if ch == '\\' {
                    let Some(&esc) = b.get(i) else {
                        return Err(bad("dangling escape in string".to_owned()));
                    };
                    i += 1;
                    s.push(match esc {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                } else {
                    s.push(ch);
                }
            }
            out.push(Tok::Str(s));
            continue;
        }
        // Numbers, including negative and scientific notation.
        let starts_number = c.is_ascii_digit()
            || (c == '-' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit()));
        if starts_number {
            let start = i;
            i += 1; // sign or first digit
            let mut is_float = false;
            while let Some(&d) = b.get(i) {
                if d.is_ascii_digit() {
                    i += 1;
                } else if d == '.' && b.get(i + 1).is_some_and(|x| x.is_ascii_digit()) {
                    is_float = true;
                    i += 1;
                } else if (d == 'e' || d == 'E')
                    && b.get(i + 1).is_some_and(|x| {
                        x.is_ascii_digit()
                            || (*x == '-' || *x == '+')
                                && b.get(i + 2).is_some_and(|y| y.is_ascii_digit())
                    })
                {
                    is_float = true;
                    i += 2; // 'e' plus sign or first digit
                } else {
                    break;
                }
            }
            let text: String = b[start..i].iter().collect();
            if is_float {
                let v: f64 = text
                    .parse()
                    .map_err(|_| bad(format!("bad number `{text}`")))?;
                out.push(Tok::Float(v));
            } else {
                match text.parse::<i64>() {
                    Ok(v) => out.push(Tok::Int(v)),
                    Err(_) => {
                        let v: f64 = text
                            .parse()
                            .map_err(|_| bad(format!("bad number `{text}`")))?;
                        out.push(Tok::Float(v));
                    }
                }
            }
            continue;
        }
        // Identifiers, keywords, and attr:KEY.
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while b
                .get(i)
                .is_some_and(|&d| d.is_alphanumeric() || d == '_' || d == '.')
            {
                i += 1;
            }
            let word: String = b[start..i].iter().collect();
            if word == "attr" && b.get(i) == Some(&':') {
                i += 1;
                let kstart = i;
                while b
                    .get(i)
                    .is_some_and(|&d| d.is_alphanumeric() || matches!(d, '_' | '.' | '-'))
                {
                    i += 1;
                }
                if i == kstart {
                    return Err(bad("empty attribute key after `attr:`".to_owned()));
                }
                out.push(Tok::AttrKey(b[kstart..i].iter().collect()));
            } else {
                out.push(Tok::Ident(word));
            }
            continue;
        }
        // Symbols, longest first.
        let two: String = b[i..(i + 2).min(b.len())].iter().collect();
        let sym = match two.as_str() {
            "==" | "!=" | "<=" | ">=" | "&&" | "||" => Some(
                ["==", "!=", "<=", ">=", "&&", "||"]
                    .into_iter()
                    .find(|s| *s == two)
                    .unwrap(),
            ),
            _ => None,
        };
        if let Some(s) = sym {
            out.push(Tok::Sym(s));
            i += 2;
            continue;
        }
        let one = match c {
            '<' => "<",
            '>' => ">",
            '!' => "!",
            '(' => "(",
            ')' => ")",
            ',' => ",",
            '=' => return Err(bad("single `=`; use `==`".to_owned())),
            other => return Err(bad(format!("unexpected character `{other}`"))),
        };
        out.push(Tok::Sym(one));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> TraceError {
        bad(format!("{msg} (token {})", self.pos))
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        match self.peek() {
            Some(Tok::Sym(x)) if *x == s => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        match self.peek() {
            Some(Tok::Ident(w)) if w == kw => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    fn parse_or(&mut self) -> Result<FilterExpr> {
        let mut left = self.parse_and()?;
        while self.eat_sym("||") || self.eat_keyword("or") {
            let right = self.parse_and()?;
            left = FilterExpr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<FilterExpr> {
        let mut left = self.parse_unary()?;
        while self.eat_sym("&&") || self.eat_keyword("and") {
            let right = self.parse_unary()?;
            left = FilterExpr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<FilterExpr> {
        if self.eat_sym("!") || self.eat_keyword("not") {
            let inner = self.parse_unary()?;
            return Ok(FilterExpr::Not(Box::new(inner)));
        }
        if self.eat_sym("(") {
            let inner = self.parse_or()?;
            if !self.eat_sym(")") {
                return Err(self.error("expected `)`"));
            }
            return Ok(inner);
        }
        self.parse_atom()
    }

    fn parse_field(&mut self) -> Result<FieldRef> {
        match self.next() {
            Some(Tok::Ident(w)) => match w.as_str() {
                "name" => Ok(FieldRef::Name),
                "process" => Ok(FieldRef::Process),
                "thread" => Ok(FieldRef::Thread),
                "timestamp" | "time" => Ok(FieldRef::Timestamp),
                "event_type" | "type" => Ok(FieldRef::Kind),
                other => Err(self.error(&format!("unknown field `{other}`"))),
            },
            Some(Tok::AttrKey(k)) => Ok(FieldRef::Attr(k)),
            Some(t) => Err(self.error(&format!("expected a field, found `{}`", t.text()))),
            None => Err(self.error("expected a field")),
        }
    }

    fn parse_value(&mut self) -> Result<AttrValue> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(AttrValue::Int(v)),
            Some(Tok::Float(v)) => Ok(AttrValue::Float(v)),
            Some(Tok::Str(s)) => Ok(AttrValue::Str(s)),
            Some(Tok::Ident(w)) => Ok(AttrValue::Str(w)), // bareword string
            Some(t) => Err(self.error(&format!("expected a value, found `{}`", t.text()))),
            None => Err(self.error("expected a value")),
        }
    }

    fn parse_atom(&mut self) -> Result<FilterExpr> {
        let field = self.parse_field()?;

        if self.eat_keyword("in") {
            if !self.eat_sym("(") {
                return Err(self.error("expected `(` after `in`"));
            }
            let mut values = vec![self.parse_value()?];
            while self.eat_sym(",") {
                values.push(self.parse_value()?);
            }
            if !self.eat_sym(")") {
                return Err(self.error("expected `)` to close the `in` set"));
            }
            return Ok(FilterExpr::InSet { field, values });
        }

        if self.eat_keyword("between") {
            let lo = self.parse_value()?;
            if !self.eat_keyword("and") {
                return Err(self.error("expected `and` between the bounds"));
            }
            let hi = self.parse_value()?;
            return Ok(FilterExpr::Between { field, lo, hi });
        }

        if self.eat_keyword("matches") {
            let pattern = match self.parse_value()? {
                AttrValue::Str(s) => s,
                other => {
                    return Err(self.error(&format!(
                        "`matches` needs a string pattern, found `{other:?}`"
                    )))
                }
            };
            return Ok(FilterExpr::Matches { field, pattern });
        }

        let op = match self.next() {
            Some(Tok::Sym("==")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            Some(t) => return Err(self.error(&format!("expected an operator, found `{}`", t.text()))),
            None => return Err(self.error("expected an operator")),
        };
        let value = self.parse_value()?;
        Ok(FilterExpr::Cmp { field, op, value })
    }
}
