use std::fmt::Write as _;

use crate::model::{Domain, Kind, Model, RateExpr, Rhs};

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn number(v: f64) -> String {
    format!("{v:?}")
}

fn rate(r: &RateExpr) -> String {
    match r {
        RateExpr::Literal(v) => number(*v),
        RateExpr::Param(p) => p.clone(),
        RateExpr::Scaled(f, p) => format!("{} * {p}", number(*f)),
    }
}

/// Canonical text of `model`: one item per line in declaration order,
/// groups separated by a blank line. Comments are not preserved.
pub fn serialize_model(model: &Model) -> String {
    let mut groups: Vec<Vec<String>> = Vec::new();
    groups.push(model.parameters.iter().map(|p| format!("param {} = {};", p.name, number(p.value))).collect());
    groups.push(
        model
            .variables
            .iter()
            .map(|v| {
                let domain = match &v.domain {
                    Domain::Enum(values) => format!("{{{}}}", values.join(", ")),
                    Domain::Range { lo, hi } => format!("[{lo}..{hi}]"),
                };
                format!("var {} : {domain} init {};", v.name, v.init)
            })
            .collect(),
    );
    groups.push(
        model
            .transitions
            .iter()
            .map(|t| {
                let mut line = match &t.kind {
                    Kind::Timed { rate: r } => format!("timed {} rate {}", t.name, rate(r)),
                    Kind::Immediate { priority, weight } => format!("immediate {} prio {priority} weight {}", t.name, number(*weight)),
                };
                let _ = write!(line, " when {} -> {{", t.guard);
                for a in &t.update {
                    let rhs = match &a.rhs {
                        Rhs::Literal(v) => v.to_string(),
                        Rhs::Inc(src) => format!("{src} + 1"),
                        Rhs::Dec(src) => format!("{src} - 1"),
                    };
                    let _ = write!(line, " {} := {rhs};", a.target);
                }
                line.push_str(if t.update.is_empty() { "}" } else { " }" });
                if !t.tags.is_empty() {
                    let tags: Vec<&str> = t.tags.iter().map(|t| t.as_str()).collect();
                    let _ = write!(line, " tags({})", tags.join(", "));
                }
                line.push(';');
                line
            })
            .collect(),
    );
    groups.push(model.labels.iter().map(|l| format!("label {} := {};", l.name, l.predicate)).collect());

    let mut out = format!("model {} {{\n", model.name);
    let body: Vec<String> = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| g.iter().map(|l| format!("  {l}\n")).collect::<String>())
        .collect();
    out.push_str(&body.join("\n"));
    out.push_str("}\n");
    out
}
