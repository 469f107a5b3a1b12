//! Recursive-descent parser for the rule language.
//!
//! ```text
//! or      := and ("or" and)*
//! and     := not ("and" not)*
//! not     := "not" not | atom
//! atom    := "(" or ")" | "answered" "(" ident ")" | term cmp term
//! term    := int | ident | "sum" "(" item ("," item)* ")"
//! item    := ident | ident ".." ident
//! cmp     := "<" | "<=" | "==" | "!=" | ">=" | ">"
//! ```

use super::ast::{CompareOp, Condition, Term};
use super::RuleError;

/// Upper bound on the number of variables a single `a1..aN` range may expand to.
pub const MAX_RANGE_LEN: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    And,
    Or,
    Not,
    Sum,
    Answered,
    Op(CompareOp),
    LParen,
    RParen,
    Comma,
    Range,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::And => "`and`".into(),
            Tok::Or => "`or`".into(),
            Tok::Not => "`not`".into(),
            Tok::Sum => "`sum`".into(),
            Tok::Answered => "`answered`".into(),
            Tok::Op(op) => format!("`{}`", op.symbol()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Range => "`..`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> RuleError {
    RuleError::Syntax { offset, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, RuleError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                toks.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((start, Tok::RParen));
                i += 1;
            }
            b',' => {
                toks.push((start, Tok::Comma));
                i += 1;
            }
            b'.' if bytes.get(i + 1) == Some(&b'.') => {
                toks.push((start, Tok::Range));
                i += 2;
            }
            b'<' | b'>' | b'=' | b'!' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                let op = match (c, eq) {
                    (b'<', true) => CompareOp::Le,
                    (b'<', false) => CompareOp::Lt,
                    (b'>', true) => CompareOp::Ge,
                    (b'>', false) => CompareOp::Gt,
                    (b'=', true) => CompareOp::Eq,
                    (b'!', true) => CompareOp::Ne,
                    _ => return Err(syntax(start, format!("unexpected character `{}`", c as char))),
                };
                toks.push((start, Tok::Op(op)));
                i += if eq { 2 } else { 1 };
            }
            b'-' | b'0'..=b'9' => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                if text == "-" {
                    return Err(syntax(start, "expected digits after `-`"));
                }
                let n = text
                    .parse::<i64>()
                    .map_err(|_| syntax(start, format!("integer literal {text} out of range")))?;
                toks.push((start, Tok::Int(n)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = match word {
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "sum" => Tok::Sum,
                    "answered" => Tok::Answered,
                    _ if crate::model::is_valid_variable(word) => Tok::Ident(word.to_string()),
                    _ => return Err(syntax(start, format!("invalid variable name `{word}`"))),
                };
                toks.push((start, tok));
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        }
    }
    toks.push((src.len(), Tok::End));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> RuleError {
        syntax(self.offset(), format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), RuleError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn or(&mut self) -> Result<Condition, RuleError> {
        let mut items = vec![self.and()?];
        while *self.peek() == Tok::Or {
            self.bump();
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { Condition::Or(items) })
    }

    fn and(&mut self) -> Result<Condition, RuleError> {
        let mut items = vec![self.not()?];
        while *self.peek() == Tok::And {
            self.bump();
            items.push(self.not()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { Condition::And(items) })
    }

    fn not(&mut self) -> Result<Condition, RuleError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Condition::Not(Box::new(self.not()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Condition, RuleError> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let inner = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Answered => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let var = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Condition::Answered(var))
            }
            _ => {
                let lhs = self.term()?;
                let op = match self.peek() {
                    Tok::Op(op) => *op,
                    _ => return Err(self.unexpected("comparison operator")),
                };
                self.bump();
                let rhs = self.term()?;
                if let Tok::Op(_) = self.peek() {
                    return Err(syntax(self.offset(), "comparisons cannot be chained"));
                }
                Ok(Condition::Compare { op, lhs, rhs })
            }
        }
    }

    fn ident(&mut self) -> Result<String, RuleError> {
        match self.peek() {
            Tok::Ident(_) => match self.bump() {
                Tok::Ident(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.unexpected("variable name")),
        }
    }

    fn term(&mut self) -> Result<Term, RuleError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Ident(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Sum => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let mut vars = Vec::new();
                loop {
                    let at = self.offset();
                    let first = self.ident()?;
                    if *self.peek() == Tok::Range {
                        self.bump();
                        let last = self.ident()?;
                        vars.extend(expand_range(&first, &last).map_err(|m| syntax(at, m))?);
                    } else {
                        vars.push(first);
                    }
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::RParen => {
                            self.bump();
                            break;
                        }
                        _ => return Err(self.unexpected("`,` or `)`")),
                    }
                }
                Ok(Term::Sum(vars))
            }
            _ => Err(self.unexpected("integer, variable or `sum(...)`")),
        }
    }
}

fn split_numeric_suffix(name: &str) -> (&str, &str) {
    let cut = name.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    name.split_at(cut)
}

/// Expands `phq1..phq4` into `phq1, phq2, phq3, phq4`. Zero-padded bounds of
/// equal width (`q01..q12`) keep their padding.
fn expand_range(first: &str, last: &str) -> Result<Vec<String>, String> {
    let (prefix_a, digits_a) = split_numeric_suffix(first);
    let (prefix_b, digits_b) = split_numeric_suffix(last);
    if digits_a.is_empty() || digits_b.is_empty() {
        return Err(format!("range bounds `{first}..{last}` must end in a number"));
    }
    if prefix_a != prefix_b {
        return Err(format!("range bounds `{first}..{last}` have different prefixes"));
    }
    let a: u64 = digits_a.parse().map_err(|_| format!("range bound `{first}` too large"))?;
    let b: u64 = digits_b.parse().map_err(|_| format!("range bound `{last}` too large"))?;
    if b < a {
        return Err(format!("range `{first}..{last}` is descending"));
    }
    if b - a >= MAX_RANGE_LEN as u64 {
        return Err(format!("range `{first}..{last}` expands to more than {MAX_RANGE_LEN} variables"));
    }
    let width = if digits_a.len() > 1 && digits_a.starts_with('0') { digits_a.len() } else { 0 };
    Ok((a..=b).map(|n| format!("{prefix_a}{n:0width$}")).collect())
}

/// Parses a rule condition. Error offsets are byte offsets into `src`.
pub fn parse_rule(src: &str) -> Result<Condition, RuleError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let cond = p.or()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(cond)
}
