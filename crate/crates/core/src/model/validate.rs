//! Static checks on a [`Model`]: naming, typing, rate positivity, and an
//! exact interval analysis proving counter updates stay in range.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{CmpOp, Comparison, Domain, Guard, Kind, Model, Rhs, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    DuplicateName,
    UndeclaredIdent,
    TypeMismatch,
    EmptyDomain,
    InitOutOfDomain,
    NonPositiveParam,
    NonPositiveRate,
    NonPositiveWeight,
    DuplicateAssignment,
    OutOfDomainUpdate,
    NoTransitions,
    UnsatisfiableGuard,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::DuplicateName => "DUPLICATE_NAME",
            IssueCode::UndeclaredIdent => "UNDECLARED_IDENT",
            IssueCode::TypeMismatch => "TYPE_MISMATCH",
            IssueCode::EmptyDomain => "EMPTY_DOMAIN",
            IssueCode::InitOutOfDomain => "INIT_OUT_OF_DOMAIN",
            IssueCode::NonPositiveParam => "NON_POSITIVE_PARAM",
            IssueCode::NonPositiveRate => "NON_POSITIVE_RATE",
            IssueCode::NonPositiveWeight => "NON_POSITIVE_WEIGHT",
            IssueCode::DuplicateAssignment => "DUPLICATE_ASSIGNMENT",
            IssueCode::OutOfDomainUpdate => "OUT_OF_DOMAIN_UPDATE",
            IssueCode::NoTransitions => "NO_TRANSITIONS",
            IssueCode::UnsatisfiableGuard => "UNSATISFIABLE_GUARD",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GuardOwner {
    Transition(usize),
    Label(usize),
}

/// Model element an issue refers to. Indices are declaration positions;
/// guard atoms are numbered in textual order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Location {
    Model,
    Parameter(usize),
    Variable(usize),
    Transition(usize),
    Rate(usize),
    GuardAtom { owner: GuardOwner, atom: usize },
    Assignment { transition: usize, index: usize },
    Label(usize),
}

impl Location {
    /// The enclosing declaration, used when no finer position is known.
    pub fn parent(self) -> Location {
        match self {
            Location::Rate(t) | Location::Assignment { transition: t, .. } => Location::Transition(t),
            Location::GuardAtom { owner: GuardOwner::Transition(t), .. } => Location::Transition(t),
            Location::GuardAtom { owner: GuardOwner::Label(l), .. } => Location::Label(l),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationIssue {
    pub code: IssueCode,
    pub severity: Severity,
    pub message: String,
    pub location: Location,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    fn error(&mut self, code: IssueCode, location: Location, message: String) {
        self.issues.push(ValidationIssue {
            code,
            severity: Severity::Error,
            message,
            location,
        });
    }

    fn warning(&mut self, code: IssueCode, location: Location, message: String) {
        self.issues.push(ValidationIssue {
            code,
            severity: Severity::Warning,
            message,
            location,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            let sev = match issue.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{sev}[{}]: {}", issue.code, issue.message)?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of `model`. Never fails: all findings
/// are returned as report entries.
pub fn validate_model(model: &Model) -> ValidationReport {
    let mut report = ValidationReport::default();
    let vars = check_declarations(model, &mut report);

    if model.transitions.is_empty() {
        report.warning(IssueCode::NoTransitions, Location::Model, "model declares no transitions; its initial state is absorbing".into());
    }

    let mut seen = HashSet::new();
    for (ti, t) in model.transitions.iter().enumerate() {
        if !seen.insert(t.name.as_str()) {
            report.error(IssueCode::DuplicateName, Location::Transition(ti), format!("duplicate transition `{}`", t.name));
        }
        match &t.kind {
            Kind::Timed { rate } => {
                if let Some(p) = rate.param_name() {
                    if model.parameter(p).is_none() {
                        report.error(IssueCode::UndeclaredIdent, Location::Rate(ti), format!("undeclared parameter `{p}` in rate of `{}`", t.name));
                    }
                }
                match model.eval_rate(rate) {
                    Some(r) if r > 0.0 && r.is_finite() => {}
                    Some(r) => report.error(IssueCode::NonPositiveRate, Location::Rate(ti), format!("rate of `{}` is {r}, must be positive", t.name)),
                    None => {}
                }
            }
            Kind::Immediate { weight, .. } => {
                if !(*weight > 0.0 && weight.is_finite()) {
                    report.error(IssueCode::NonPositiveWeight, Location::Transition(ti), format!("weight of `{}` is {weight}, must be positive", t.name));
                }
            }
        }

        let guard_ok = check_guard(&t.guard, GuardOwner::Transition(ti), &vars, &mut report);
        let update_ok = check_update(model, ti, &vars, &mut report);
        if !guard_ok {
            continue;
        }
        let boxes = match guard_boxes(&t.guard, &vars) {
            Some(b) => b,
            None => continue,
        };
        if boxes.is_empty() {
            report.warning(IssueCode::UnsatisfiableGuard, Location::Transition(ti), format!("guard of `{}` is unsatisfiable; the transition can never fire", t.name));
            continue;
        }
        if update_ok {
            check_update_ranges(model, ti, &vars, &boxes, &mut report);
        }
    }

    let mut seen = HashSet::new();
    for (li, l) in model.labels.iter().enumerate() {
        if !seen.insert(l.name.as_str()) {
            report.error(IssueCode::DuplicateName, Location::Label(li), format!("duplicate label `{}`", l.name));
        }
        check_guard(&l.predicate, GuardOwner::Label(li), &vars, &mut report);
    }
    report
}

/// Resolved view of a variable used by the checks.
pub(crate) struct VarInfo<'a> {
    pub index: usize,
    pub domain: &'a Domain,
}

impl VarInfo<'_> {
    /// Bounds of the encoded value (enum index or integer).
    pub fn bounds(&self) -> (i64, i64) {
        match self.domain {
            Domain::Enum(values) => (0, values.len() as i64 - 1),
            Domain::Range { lo, hi } => (*lo, *hi),
        }
    }
}

fn check_declarations<'a>(model: &'a Model, report: &mut ValidationReport) -> HashMap<&'a str, VarInfo<'a>> {
    let mut params = HashSet::new();
    for (pi, p) in model.parameters.iter().enumerate() {
        if !params.insert(p.name.as_str()) {
            report.error(IssueCode::DuplicateName, Location::Parameter(pi), format!("duplicate parameter `{}`", p.name));
        }
        if !(p.value > 0.0 && p.value.is_finite()) {
            report.error(IssueCode::NonPositiveParam, Location::Parameter(pi), format!("parameter `{}` = {} must be a positive real", p.name, p.value));
        }
    }

    let mut vars = HashMap::new();
    for (vi, v) in model.variables.iter().enumerate() {
        let loc = Location::Variable(vi);
        if vars.contains_key(v.name.as_str()) {
            report.error(IssueCode::DuplicateName, loc, format!("duplicate variable `{}`", v.name));
            continue;
        }
        match &v.domain {
            Domain::Enum(values) => {
                if values.is_empty() {
                    report.error(IssueCode::EmptyDomain, loc, format!("enum variable `{}` has no values", v.name));
                    continue;
                }
                let mut seen = HashSet::new();
                for val in values {
                    if !seen.insert(val.as_str()) {
                        report.error(IssueCode::DuplicateName, loc, format!("value `{val}` repeated in `{}`", v.name));
                    }
                }
                match &v.init {
                    Value::Sym(s) if values.contains(s) => {}
                    Value::Sym(s) => report.error(IssueCode::TypeMismatch, loc, format!("init `{s}` is not a value of `{}`", v.name)),
                    Value::Int(i) => report.error(IssueCode::TypeMismatch, loc, format!("enum variable `{}` initialised with integer {i}", v.name)),
                }
            }
            Domain::Range { lo, hi } => {
                if lo > hi {
                    report.error(IssueCode::EmptyDomain, loc, format!("counter `{}` has empty range [{lo}..{hi}]", v.name));
                    continue;
                }
                match &v.init {
                    Value::Int(i) if (lo..=hi).contains(&i) => {}
                    Value::Int(i) => report.error(IssueCode::InitOutOfDomain, loc, format!("init {i} of `{}` outside [{lo}..{hi}]", v.name)),
                    Value::Sym(s) => report.error(IssueCode::TypeMismatch, loc, format!("counter `{}` initialised with symbol `{s}`", v.name)),
                }
            }
        }
        vars.insert(v.name.as_str(), VarInfo { index: vi, domain: &v.domain });
    }
    vars
}

fn check_comparison(c: &Comparison, loc: Location, vars: &HashMap<&str, VarInfo>, report: &mut ValidationReport) -> bool {
    let Some(info) = vars.get(c.var.as_str()) else {
        report.error(IssueCode::UndeclaredIdent, loc, format!("undeclared variable `{}`", c.var));
        return false;
    };
    match (info.domain, &c.value) {
        (Domain::Enum(values), Value::Sym(s)) => {
            if !values.contains(s) {
                report.error(IssueCode::TypeMismatch, loc, format!("`{s}` is not a value of `{}`", c.var));
                return false;
            }
            if !matches!(c.op, CmpOp::Eq | CmpOp::Ne) {
                report.error(IssueCode::TypeMismatch, loc, format!("enum variable `{}` only supports == and !=", c.var));
                return false;
            }
            true
        }
        (Domain::Enum(_), Value::Int(i)) => {
            report.error(IssueCode::TypeMismatch, loc, format!("enum variable `{}` compared with integer {i}", c.var));
            false
        }
        (Domain::Range { .. }, Value::Sym(s)) => {
            report.error(IssueCode::TypeMismatch, loc, format!("counter `{}` compared with symbol `{s}`", c.var));
            false
        }
        (Domain::Range { .. }, Value::Int(_)) => true,
    }
}

fn check_guard(guard: &Guard, owner: GuardOwner, vars: &HashMap<&str, VarInfo>, report: &mut ValidationReport) -> bool {
    let mut ok = true;
    for (atom, c) in guard.atoms().into_iter().enumerate() {
        ok &= check_comparison(c, Location::GuardAtom { owner, atom }, vars, report);
    }
    ok
}

fn check_update(model: &Model, ti: usize, vars: &HashMap<&str, VarInfo>, report: &mut ValidationReport) -> bool {
    let t = &model.transitions[ti];
    let mut ok = true;
    let mut assigned = HashSet::new();
    for (ai, a) in t.update.iter().enumerate() {
        let loc = Location::Assignment { transition: ti, index: ai };
        let Some(target) = vars.get(a.target.as_str()) else {
            report.error(IssueCode::UndeclaredIdent, loc, format!("undeclared variable `{}`", a.target));
            ok = false;
            continue;
        };
        if !assigned.insert(a.target.as_str()) {
            report.error(IssueCode::DuplicateAssignment, loc, format!("`{}` assigned twice in `{}`", a.target, t.name));
            ok = false;
        }
        match (&a.rhs, target.domain) {
            (Rhs::Literal(Value::Sym(s)), Domain::Enum(values)) => {
                if !values.contains(s) {
                    report.error(IssueCode::TypeMismatch, loc, format!("`{s}` is not a value of `{}`", a.target));
                    ok = false;
                }
            }
            (Rhs::Literal(Value::Int(i)), Domain::Range { lo, hi }) => {
                if !(lo..=hi).contains(&i) {
                    report.error(IssueCode::OutOfDomainUpdate, loc, format!("`{} := {i}` outside [{lo}..{hi}]", a.target));
                    ok = false;
                }
            }
            (Rhs::Inc(src) | Rhs::Dec(src), Domain::Range { .. }) => match vars.get(src.as_str()) {
                None => {
                    report.error(IssueCode::UndeclaredIdent, loc, format!("undeclared variable `{src}`"));
                    ok = false;
                }
                Some(s) if s.domain.is_enum() => {
                    report.error(IssueCode::TypeMismatch, loc, format!("arithmetic on enum variable `{src}`"));
                    ok = false;
                }
                Some(_) => {}
            },
            (rhs, _) => {
                report.error(IssueCode::TypeMismatch, loc, format!("assignment to `{}` does not match its domain: {rhs:?}", a.target));
                ok = false;
            }
        }
    }
    ok
}

fn check_update_ranges(model: &Model, ti: usize, vars: &HashMap<&str, VarInfo>, boxes: &[GuardBox], report: &mut ValidationReport) {
    let t = &model.transitions[ti];
    for (ai, a) in t.update.iter().enumerate() {
        let (src, delta) = match &a.rhs {
            Rhs::Inc(src) => (src, 1),
            Rhs::Dec(src) => (src, -1),
            Rhs::Literal(_) => continue,
        };
        let (lo, hi) = vars[a.target.as_str()].bounds();
        let src_index = vars[src.as_str()].index;
        let escapes = boxes.iter().any(|b| {
            let set = &b.sets[src_index];
            let (smin, smax) = (set.first().unwrap().0, set.last().unwrap().1);
            smax + delta > hi || smin + delta < lo
        });
        if escapes {
            report.error(
                IssueCode::OutOfDomainUpdate,
                Location::Assignment { transition: ti, index: ai },
                format!("`{}` can leave [{lo}..{hi}] when `{}` fires; tighten its guard", a.target, t.name),
            );
        }
    }
}

/// Sorted, disjoint, inclusive intervals of encoded values.
type IntervalSet = Vec<(i64, i64)>;

/// One conjunct of the guard's disjunctive normal form: a product of
/// per-variable value sets, indexed by variable position.
#[derive(Debug, Clone)]
pub(crate) struct GuardBox {
    pub sets: Vec<IntervalSet>,
}

const BOX_LIMIT: usize = 1 << 16;

/// Exact satisfying set of a well-typed guard as a union of boxes. An empty
/// result means unsatisfiable. Returns `None` if the expansion exceeds the
/// box budget.
pub(crate) fn guard_boxes(guard: &Guard, vars: &HashMap<&str, VarInfo>) -> Option<Vec<GuardBox>> {
    let width = vars.values().map(|v| v.index + 1).max().unwrap_or(0);
    let mut full = vec![vec![(0, 0)]; width];
    for info in vars.values() {
        full[info.index] = vec![info.bounds()];
    }
    boxes_of(guard, false, vars, &full)
}

fn boxes_of(guard: &Guard, negated: bool, vars: &HashMap<&str, VarInfo>, full: &[IntervalSet]) -> Option<Vec<GuardBox>> {
    match (guard, negated) {
        (Guard::True, false) => Some(vec![GuardBox { sets: full.to_vec() }]),
        (Guard::True, true) => Some(Vec::new()),
        (Guard::Not(g), n) => boxes_of(g, !n, vars, full),
        (Guard::Cmp(c), n) => {
            let info = &vars[c.var.as_str()];
            let (lo, hi) = info.bounds();
            let value = match (&c.value, info.domain) {
                (Value::Sym(s), Domain::Enum(values)) => values.iter().position(|v| v == s).unwrap() as i64,
                (Value::Int(i), _) => *i,
                _ => unreachable!("guard is type-checked before analysis"),
            };
            let op = if n { c.op.negate() } else { c.op };
            let set: IntervalSet = match op {
                CmpOp::Eq => vec![(value, value)],
                CmpOp::Ne => vec![(lo, value - 1), (value + 1, hi)],
                CmpOp::Lt => vec![(lo, value - 1)],
                CmpOp::Le => vec![(lo, value)],
                CmpOp::Gt => vec![(value + 1, hi)],
                CmpOp::Ge => vec![(value, hi)],
            };
            let clipped = intersect(&set, &[(lo, hi)]);
            if clipped.is_empty() {
                return Some(Vec::new());
            }
            let mut sets = full.to_vec();
            sets[info.index] = clipped;
            Some(vec![GuardBox { sets }])
        }
        // conjunction (And, or negated Or)
        (Guard::And(gs), false) | (Guard::Or(gs), true) => {
            let mut acc = vec![GuardBox { sets: full.to_vec() }];
            for g in gs {
                let part = boxes_of(g, negated, vars, full)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &part {
                        if let Some(m) = meet(a, b) {
                            next.push(m);
                        }
                    }
                }
                if next.len() > BOX_LIMIT {
                    return None;
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            Some(acc)
        }
        (Guard::Or(gs), false) | (Guard::And(gs), true) => {
            let mut acc = Vec::new();
            for g in gs {
                acc.extend(boxes_of(g, negated, vars, full)?);
                if acc.len() > BOX_LIMIT {
                    return None;
                }
            }
            Some(acc)
        }
    }
}

fn meet(a: &GuardBox, b: &GuardBox) -> Option<GuardBox> {
    let mut sets = Vec::with_capacity(a.sets.len());
    for (x, y) in a.sets.iter().zip(&b.sets) {
        let s = intersect(x, y);
        if s.is_empty() {
            return None;
        }
        sets.push(s);
    }
    Some(GuardBox { sets })
}

fn intersect(a: &[(i64, i64)], b: &[(i64, i64)]) -> IntervalSet {
    let mut out = Vec::new();
    for &(alo, ahi) in a {
        for &(blo, bhi) in b {
            let lo = alo.max(blo);
            let hi = ahi.min(bhi);
            if lo <= hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort_unstable();
    out
}
