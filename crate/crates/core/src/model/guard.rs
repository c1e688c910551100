use std::fmt;

use serde::{Deserialize, Serialize};

use super::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

/// `var op value`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub var: String,
    pub op: CmpOp,
    pub value: Value,
}

/// Boolean expression over state variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Guard {
    True,
    Cmp(Comparison),
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    pub fn eq(var: &str, value: &str) -> Guard {
        Guard::cmp(var, CmpOp::Eq, Value::Sym(value.to_string()))
    }

    pub fn ne(var: &str, value: &str) -> Guard {
        Guard::cmp(var, CmpOp::Ne, Value::Sym(value.to_string()))
    }

    pub fn int(var: &str, op: CmpOp, value: i64) -> Guard {
        Guard::cmp(var, op, Value::Int(value))
    }

    pub fn cmp(var: &str, op: CmpOp, value: Value) -> Guard {
        Guard::Cmp(Comparison {
            var: var.to_string(),
            op,
            value,
        })
    }

    /// `var` takes one of `values`; a single value yields a plain comparison.
    pub fn is_in(var: &str, values: &[&str]) -> Guard {
        Guard::or(values.iter().map(|v| Guard::eq(var, v)).collect())
    }

    pub fn and(mut parts: Vec<Guard>) -> Guard {
        match parts.len() {
            0 => Guard::True,
            1 => parts.pop().unwrap(),
            _ => Guard::And(parts),
        }
    }

    pub fn or(mut parts: Vec<Guard>) -> Guard {
        match parts.len() {
            1 => parts.pop().unwrap(),
            _ => Guard::Or(parts),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Guard) -> Guard {
        Guard::Not(Box::new(inner))
    }

    /// Comparisons in pre-order, which is also their textual order.
    pub fn atoms(&self) -> Vec<&Comparison> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Comparison>) {
        match self {
            Guard::True => {}
            Guard::Cmp(c) => out.push(c),
            Guard::Not(g) => g.collect_atoms(out),
            Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| g.collect_atoms(out)),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parenthesize: bool) -> fmt::Result {
        if parenthesize {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.var, self.op.as_str(), self.value)
    }
}

// Parenthesization keeps the tree shape recoverable by the parser:
// `&&` binds tighter than `||`, nested same-operator groups stay grouped.
impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::True => f.write_str("true"),
            Guard::Cmp(c) => write!(f, "{c}"),
            Guard::Not(g) => {
                f.write_str("!")?;
                g.fmt_child(f, true)
            }
            Guard::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" && ")?;
                    }
                    g.fmt_child(f, matches!(g, Guard::And(_) | Guard::Or(_)))?;
                }
                Ok(())
            }
            Guard::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" || ")?;
                    }
                    g.fmt_child(f, matches!(g, Guard::Or(_)))?;
                }
                Ok(())
            }
        }
    }
}
