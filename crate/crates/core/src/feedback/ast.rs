use std::collections::BTreeSet;
use std::fmt;

/// Numeric operand of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Var(String),
    /// Sum over the listed variables. Range shorthand is expanded at parse
    /// time, so the list is always explicit.
    Sum(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CompareOp {
    pub const ALL: [CompareOp; 6] = [Self::Lt, Self::Le, Self::Eq, Self::Ne, Self::Ge, Self::Gt];

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Lt => "<",
            Self::Le => "<=",
            Self::Eq => "==",
            Self::Ne => "!=",
            Self::Ge => ">=",
            Self::Gt => ">",
        }
    }

    pub fn apply<T: Ord>(self, lhs: T, rhs: T) -> bool {
        match self {
            Self::Lt => lhs < rhs,
            Self::Le => lhs <= rhs,
            Self::Eq => lhs == rhs,
            Self::Ne => lhs != rhs,
            Self::Ge => lhs >= rhs,
            Self::Gt => lhs > rhs,
        }
    }
}

/// Boolean rule condition.
///
/// Numeric and boolean positions are separate types, so every value of
/// this type is well-typed by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Compare { op: CompareOp, lhs: Term, rhs: Term },
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Not(Box<Condition>),
    Answered(String),
}

impl Term {
    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Int(_) => {}
            Term::Var(v) => {
                out.insert(v);
            }
            Term::Sum(vs) => out.extend(vs.iter().map(String::as_str)),
        }
    }
}

impl Condition {
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Condition::Compare { lhs, rhs, .. } => {
                lhs.collect_variables(out);
                rhs.collect_variables(out);
            }
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.collect_variables(out)),
            Condition::Not(c) => c.collect_variables(out),
            Condition::Answered(v) => {
                out.insert(v);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Var(v) => f.write_str(v),
            Term::Sum(vs) => write!(f, "sum({})", vs.join(", ")),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Compare { op, lhs, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Condition::And(cs) => write_joined(f, cs, " and ", |c| matches!(c, Condition::And(_) | Condition::Or(_))),
            Condition::Or(cs) => write_joined(f, cs, " or ", |c| matches!(c, Condition::Or(_))),
            Condition::Not(c) => {
                if matches!(**c, Condition::And(_) | Condition::Or(_)) {
                    write!(f, "not ({c})")
                } else {
                    write!(f, "not {c}")
                }
            }
            Condition::Answered(v) => write!(f, "answered({v})"),
        }
    }
}

fn write_joined(
    f: &mut fmt::Formatter<'_>,
    items: &[Condition],
    sep: &str,
    needs_parens: impl Fn(&Condition) -> bool,
) -> fmt::Result {
    for (i, c) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        if needs_parens(c) {
            write!(f, "({c})")?;
        } else {
            write!(f, "{c}")?;
        }
    }
    Ok(())
}
