use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{validate_model, CmpOp, Domain, Guard, Kind, Model, Rhs, ValidationReport, Value};

/// One value per declared variable, in declaration order. Enum values are
/// stored as their index in the enum, counters as their integer value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateVector(pub Vec<i64>);

impl StateVector {
    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TransitionKind {
    Timed { rate: f64 },
    Immediate { priority: u32, weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FireError {
    #[error("GUARD_VIOLATION: `{transition}` is not enabled in {state}")]
    GuardViolation { transition: String, state: String },
    #[error("OUT_OF_DOMAIN: `{transition}` drives `{variable}` to {value}")]
    OutOfDomain { transition: String, variable: String, value: i64 },
}

impl FireError {
    pub fn code(&self) -> &'static str {
        match self {
            FireError::GuardViolation { .. } => "GUARD_VIOLATION",
            FireError::OutOfDomain { .. } => "OUT_OF_DOMAIN",
        }
    }
}

/// A guard resolved against a model's variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    True,
    Cmp { var: usize, op: CmpOp, value: i64 },
    Not(Box<Predicate>),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
}

impl Predicate {
    pub fn holds(&self, s: &StateVector) -> bool {
        match self {
            Predicate::True => true,
            Predicate::Cmp { var, op, value } => op.holds(s.0[*var], *value),
            Predicate::Not(p) => !p.holds(s),
            Predicate::And(ps) => ps.iter().all(|p| p.holds(s)),
            Predicate::Or(ps) => ps.iter().any(|p| p.holds(s)),
        }
    }
}

#[derive(Debug, Clone)]
struct CompiledVar {
    name: String,
    domain: Domain,
    lo: i64,
    hi: i64,
}

#[derive(Debug, Clone)]
enum Effect {
    Const(i64),
    Shift { src: usize, delta: i64 },
}

#[derive(Debug, Clone)]
struct CompiledTransition {
    name: String,
    kind: TransitionKind,
    guard: Predicate,
    update: Vec<(usize, Effect)>,
}

/// A validated model compiled for fast guard evaluation and firing.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct System {
    model: Model,
    vars: Vec<CompiledVar>,
    transitions: Vec<CompiledTransition>,
    labels: Vec<(String, Predicate)>,
    initial: StateVector,
}

impl System {
    /// Compiles `model`; fails with the validation report if it has errors.
    pub fn new(model: &Model) -> Result<System, ValidationReport> {
        let report = validate_model(model);
        if !report.is_ok() {
            return Err(report);
        }
        let vars: Vec<CompiledVar> = model
            .variables
            .iter()
            .map(|v| {
                let (lo, hi) = match &v.domain {
                    Domain::Enum(values) => (0, values.len() as i64 - 1),
                    Domain::Range { lo, hi } => (*lo, *hi),
                };
                CompiledVar {
                    name: v.name.clone(),
                    domain: v.domain.clone(),
                    lo,
                    hi,
                }
            })
            .collect();
        let mut system = System {
            model: model.clone(),
            vars,
            transitions: Vec::new(),
            labels: Vec::new(),
            initial: StateVector(Vec::new()),
        };
        // validation guarantees every lookup below succeeds
        let initial = model
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| system.encode(i, &v.init).expect("validated init"))
            .collect();
        system.initial = StateVector(initial);
        for t in &model.transitions {
            let kind = match &t.kind {
                Kind::Timed { rate } => TransitionKind::Timed {
                    rate: model.eval_rate(rate).expect("validated rate"),
                },
                Kind::Immediate { priority, weight } => TransitionKind::Immediate {
                    priority: *priority,
                    weight: *weight,
                },
            };
            let guard = system.predicate(&t.guard).expect("validated guard");
            let update = t
                .update
                .iter()
                .map(|a| {
                    let target = system.var_index(&a.target).expect("validated target");
                    let effect = match &a.rhs {
                        Rhs::Literal(v) => Effect::Const(system.encode(target, v).expect("validated literal")),
                        Rhs::Inc(src) => Effect::Shift {
                            src: system.var_index(src).expect("validated source"),
                            delta: 1,
                        },
                        Rhs::Dec(src) => Effect::Shift {
                            src: system.var_index(src).expect("validated source"),
                            delta: -1,
                        },
                    };
                    (target, effect)
                })
                .collect();
            system.transitions.push(CompiledTransition {
                name: t.name.clone(),
                kind,
                guard,
                update,
            });
        }
        system.labels = model
            .labels
            .iter()
            .map(|l| (l.name.clone(), system.predicate(&l.predicate).expect("validated label")))
            .collect();
        Ok(system)
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn initial_state(&self) -> StateVector {
        self.initial.clone()
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn var_name(&self, var: usize) -> &str {
        &self.vars[var].name
    }

    /// Inclusive bounds of the encoded values of `var`.
    pub fn var_bounds(&self, var: usize) -> (i64, i64) {
        (self.vars[var].lo, self.vars[var].hi)
    }

    pub fn transition_id(&self, name: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.name == name).map(TransitionId)
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.0].name
    }

    pub fn transition_kind(&self, t: TransitionId) -> TransitionKind {
        self.transitions[t.0].kind
    }

    pub fn is_immediate(&self, t: TransitionId) -> bool {
        matches!(self.transitions[t.0].kind, TransitionKind::Immediate { .. })
    }

    pub fn guard_holds(&self, t: TransitionId, s: &StateVector) -> bool {
        self.transitions[t.0].guard.holds(s)
    }

    pub fn labels(&self) -> impl Iterator<Item = (&str, &Predicate)> {
        self.labels.iter().map(|(n, p)| (n.as_str(), p))
    }

    pub fn label(&self, name: &str) -> Option<&Predicate> {
        self.labels.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    /// Encodes a literal for variable `var`.
    pub fn encode(&self, var: usize, value: &Value) -> Option<i64> {
        let v = &self.vars[var];
        match (&v.domain, value) {
            (Domain::Enum(values), Value::Sym(s)) => values.iter().position(|x| x == s).map(|i| i as i64),
            (Domain::Range { lo, hi }, Value::Int(i)) if (lo..=hi).contains(&i) => Some(*i),
            _ => None,
        }
    }

    /// Human-readable value of `var` in `s`.
    pub fn value_name(&self, var: usize, value: i64) -> String {
        match &self.vars[var].domain {
            Domain::Enum(values) => values.get(value as usize).cloned().unwrap_or_else(|| format!("#{value}")),
            Domain::Range { .. } => value.to_string(),
        }
    }

    /// `(name, value)` pairs of `s` in declaration order.
    pub fn assignments(&self, s: &StateVector) -> Vec<(String, String)> {
        (0..self.vars.len()).map(|i| (self.vars[i].name.clone(), self.value_name(i, s.0[i]))).collect()
    }

    pub fn format_state(&self, s: &StateVector) -> String {
        self.assignments(s).iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(",")
    }

    /// Resolves a free-standing guard (e.g. a measure target) against this
    /// model's variables.
    pub fn predicate(&self, guard: &Guard) -> Result<Predicate, String> {
        Ok(match guard {
            Guard::True => Predicate::True,
            Guard::Cmp(c) => {
                let var = self.var_index(&c.var).ok_or_else(|| format!("undeclared variable `{}`", c.var))?;
                let value = match (&self.vars[var].domain, &c.value) {
                    (Domain::Enum(values), Value::Sym(s)) => {
                        if !matches!(c.op, CmpOp::Eq | CmpOp::Ne) {
                            return Err(format!("enum variable `{}` only supports == and !=", c.var));
                        }
                        values.iter().position(|x| x == s).ok_or_else(|| format!("`{s}` is not a value of `{}`", c.var))? as i64
                    }
                    (Domain::Range { .. }, Value::Int(i)) => *i,
                    _ => return Err(format!("type mismatch in `{c}`")),
                };
                Predicate::Cmp { var, op: c.op, value }
            }
            Guard::Not(g) => Predicate::Not(Box::new(self.predicate(g)?)),
            Guard::And(gs) => Predicate::And(gs.iter().map(|g| self.predicate(g)).collect::<Result<_, _>>()?),
            Guard::Or(gs) => Predicate::Or(gs.iter().map(|g| self.predicate(g)).collect::<Result<_, _>>()?),
        })
    }

    /// Transitions that may fire in `s`. If any immediate transition is
    /// enabled, only the enabled immediates of the highest priority are
    /// returned. Order is declaration order.
    pub fn enabled_transitions(&self, s: &StateVector) -> Vec<TransitionId> {
        let mut timed = Vec::new();
        let mut immediate = Vec::new();
        let mut top = 0u32;
        for (i, t) in self.transitions.iter().enumerate() {
            if !t.guard.holds(s) {
                continue;
            }
            match t.kind {
                TransitionKind::Timed { .. } => timed.push(TransitionId(i)),
                TransitionKind::Immediate { priority, .. } => {
                    if immediate.is_empty() || priority > top {
                        if priority > top {
                            immediate.clear();
                        }
                        top = priority;
                    }
                    if priority == top {
                        immediate.push(TransitionId(i));
                    }
                }
            }
        }
        if immediate.is_empty() {
            timed
        } else {
            immediate
        }
    }

    /// A state is vanishing when an immediate transition is enabled in it.
    pub fn is_vanishing(&self, s: &StateVector) -> bool {
        self.transitions
            .iter()
            .any(|t| matches!(t.kind, TransitionKind::Immediate { .. }) && t.guard.holds(s))
    }

    /// Fires `t` in `s`. All right-hand sides read the pre-state.
    pub fn apply_transition(&self, s: &StateVector, t: TransitionId) -> Result<StateVector, FireError> {
        let tr = &self.transitions[t.0];
        if !tr.guard.holds(s) {
            return Err(FireError::GuardViolation {
                transition: tr.name.clone(),
                state: self.format_state(s),
            });
        }
        let mut next = s.clone();
        for (target, effect) in &tr.update {
            let value = match effect {
                Effect::Const(v) => *v,
                Effect::Shift { src, delta } => s.0[*src] + delta,
            };
            let var = &self.vars[*target];
            if value < var.lo || value > var.hi {
                return Err(FireError::OutOfDomain {
                    transition: tr.name.clone(),
                    variable: var.name.clone(),
                    value,
                });
            }
            next.0[*target] = value;
        }
        Ok(next)
    }

    /// Iterates over every point of the variable-domain product.
    pub fn domain_points(&self) -> DomainPoints<'_> {
        DomainPoints {
            system: self,
            current: Some(self.vars.iter().map(|v| v.lo).collect()),
        }
    }
}

pub struct DomainPoints<'a> {
    system: &'a System,
    current: Option<Vec<i64>>,
}

impl Iterator for DomainPoints<'_> {
    type Item = StateVector;

    fn next(&mut self) -> Option<StateVector> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        let mut carried = true;
        for i in (0..next.len()).rev() {
            let var = &self.system.vars[i];
            if next[i] < var.hi {
                next[i] += 1;
                carried = false;
                break;
            }
            next[i] = var.lo;
        }
        if !carried {
            self.current = Some(next);
        }
        Some(StateVector(cur))
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
