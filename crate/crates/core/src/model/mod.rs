//! Declarative model formalism: finite variables, guarded timed and
//! immediate transitions, and state labels.
//!
//! A [`Model`] is plain data. It is checked by [`validate_model`] and
//! compiled into a [`System`], which carries the firing semantics.

mod guard;
mod system;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use guard::{CmpOp, Comparison, Guard};
pub use system::{DomainPoints, FireError, Predicate, StateVector, System, TransitionId, TransitionKind};
pub use validate::{validate_model, GuardOwner, IssueCode, Location, Severity, ValidationIssue, ValidationReport};

/// Domain of a state variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// Named values; a state stores the value's index.
    Enum(Vec<String>),
    /// Inclusive integer range.
    Range { lo: i64, hi: i64 },
}

impl Domain {
    pub fn size(&self) -> usize {
        match self {
            Domain::Enum(values) => values.len(),
            Domain::Range { lo, hi } => {
                if hi < lo {
                    0
                } else {
                    (hi - lo + 1) as usize
                }
            }
        }
    }

    pub fn is_enum(&self) -> bool {
        matches!(self, Domain::Enum(_))
    }
}

/// Initial value of a variable as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Value {
    Sym(String),
    Int(i64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Sym(s) => f.write_str(s),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Domain,
    pub init: Value,
}

impl VariableDecl {
    pub fn enumeration(name: &str, values: &[&str], init: &str) -> Self {
        VariableDecl {
            name: name.to_string(),
            domain: Domain::Enum(values.iter().map(|v| v.to_string()).collect()),
            init: Value::Sym(init.to_string()),
        }
    }

    pub fn counter(name: &str, lo: i64, hi: i64, init: i64) -> Self {
        VariableDecl {
            name: name.to_string(),
            domain: Domain::Range { lo, hi },
            init: Value::Int(init),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: f64,
}

/// Rate of a timed transition: a literal, a parameter, or a literal
/// multiple of a parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RateExpr {
    Literal(f64),
    Param(String),
    Scaled(f64, String),
}

impl RateExpr {
    pub fn param(name: &str) -> Self {
        RateExpr::Param(name.to_string())
    }

    pub fn scaled(factor: f64, name: &str) -> Self {
        RateExpr::Scaled(factor, name.to_string())
    }

    pub fn param_name(&self) -> Option<&str> {
        match self {
            RateExpr::Literal(_) => None,
            RateExpr::Param(p) | RateExpr::Scaled(_, p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kind {
    Timed { rate: RateExpr },
    Immediate { priority: u32, weight: f64 },
}

/// Right-hand side of an assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rhs {
    /// Enum value name or integer literal.
    Literal(Value),
    /// `src + 1`
    Inc(String),
    /// `src - 1`
    Dec(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub target: String,
    pub rhs: Rhs,
}

impl Assignment {
    pub fn set(target: &str, value: &str) -> Self {
        Assignment {
            target: target.to_string(),
            rhs: Rhs::Literal(Value::Sym(value.to_string())),
        }
    }

    pub fn set_int(target: &str, value: i64) -> Self {
        Assignment {
            target: target.to_string(),
            rhs: Rhs::Literal(Value::Int(value)),
        }
    }

    pub fn inc(target: &str) -> Self {
        Assignment {
            target: target.to_string(),
            rhs: Rhs::Inc(target.to_string()),
        }
    }

    pub fn dec(target: &str) -> Self {
        Assignment {
            target: target.to_string(),
            rhs: Rhs::Dec(target.to_string()),
        }
    }
}

/// Failure-class tags carried by transitions. They have no semantics of
/// their own and exist for reporting and filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Cascading,
    Escalating,
    CommonCause,
    Restoration,
    Attack,
    Internal,
}

impl Tag {
    pub const ALL: [Tag; 6] = [
        Tag::Cascading,
        Tag::Escalating,
        Tag::CommonCause,
        Tag::Restoration,
        Tag::Attack,
        Tag::Internal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Cascading => "cascading",
            Tag::Escalating => "escalating",
            Tag::CommonCause => "common_cause",
            Tag::Restoration => "restoration",
            Tag::Attack => "attack",
            Tag::Internal => "internal",
        }
    }

    pub fn from_name(name: &str) -> Option<Tag> {
        Tag::ALL.into_iter().find(|t| t.as_str() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub name: String,
    pub kind: Kind,
    pub guard: Guard,
    pub update: Vec<Assignment>,
    pub tags: BTreeSet<Tag>,
}

impl Transition {
    pub fn timed(name: &str, rate: RateExpr, guard: Guard, update: Vec<Assignment>) -> Self {
        Transition {
            name: name.to_string(),
            kind: Kind::Timed { rate },
            guard,
            update,
            tags: BTreeSet::new(),
        }
    }

    pub fn immediate(name: &str, priority: u32, weight: f64, guard: Guard, update: Vec<Assignment>) -> Self {
        Transition {
            name: name.to_string(),
            kind: Kind::Immediate { priority, weight },
            guard,
            update,
            tags: BTreeSet::new(),
        }
    }

    pub fn tagged(mut self, tags: &[Tag]) -> Self {
        self.tags.extend(tags.iter().copied());
        self
    }

    pub fn is_immediate(&self) -> bool {
        matches!(self.kind, Kind::Immediate { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub name: String,
    pub predicate: Guard,
}

impl Label {
    pub fn new(name: &str, predicate: Guard) -> Self {
        Label {
            name: name.to_string(),
            predicate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub parameters: Vec<Parameter>,
    pub variables: Vec<VariableDecl>,
    pub transitions: Vec<Transition>,
    pub labels: Vec<Label>,
}

impl Model {
    pub fn new(name: &str) -> Self {
        Model {
            name: name.to_string(),
            parameters: Vec::new(),
            variables: Vec::new(),
            transitions: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn transition(&self, name: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.name == name)
    }

    pub fn label(&self, name: &str) -> Option<&Label> {
        self.labels.iter().find(|l| l.name == name)
    }

    /// Sets an existing parameter. Returns false if no such parameter exists.
    pub fn set_parameter(&mut self, name: &str, value: f64) -> bool {
        match self.parameters.iter_mut().find(|p| p.name == name) {
            Some(p) => {
                p.value = value;
                true
            }
            None => false,
        }
    }

    /// Effective rate of a rate expression after parameter substitution.
    pub fn eval_rate(&self, rate: &RateExpr) -> Option<f64> {
        match rate {
            RateExpr::Literal(v) => Some(*v),
            RateExpr::Param(p) => self.parameter(p),
            RateExpr::Scaled(f, p) => self.parameter(p).map(|v| f * v),
        }
    }
}
