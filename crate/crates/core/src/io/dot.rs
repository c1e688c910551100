use std::fmt::Write as _;

use crate::model::{StateVector, System};
use crate::statespace::{eliminate_vanishing, Annotation, ReachabilityGraph, StateSpaceError};

use super::serialize::number;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DotOptions {
    /// Render the reduced chain: tangible states only, with rates merged
    /// per state pair.
    pub hide_vanishing: bool,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_label(system: &System, s: &StateVector) -> String {
    let mut lines: Vec<String> = system.assignments(s).into_iter().map(|(k, v)| format!("{k}={v}")).collect();
    let labels: Vec<&str> = system.labels().filter(|(_, p)| p.holds(s)).map(|(n, _)| n).collect();
    if !labels.is_empty() {
        lines.push(format!("[{}]", labels.join(", ")));
    }
    lines.join("\n")
}

/// DOT digraph of a reachability graph. Node `sN` is graph state `N`.
/// Tangible states are solid, vanishing ones dashed; timed edges carry
/// `rate=`, immediate edges `p=`.
pub fn export_dot(graph: &ReachabilityGraph, system: &System, options: DotOptions) -> Result<String, StateSpaceError> {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&system.model().name));
    let _ = writeln!(out, "  node [shape=box];");
    if options.hide_vanishing {
        let ctmc = eliminate_vanishing(graph, system)?;
        for (i, s) in ctmc.states.iter().enumerate() {
            let id = ctmc.graph_index[i];
            let _ = writeln!(out, "  s{id} [label={}, style=solid];", quote(&node_label(system, s)));
        }
        for (i, row) in ctmc.rows.iter().enumerate() {
            for &(j, r) in row {
                let _ = writeln!(out, "  s{} -> s{} [label={}];", ctmc.graph_index[i], ctmc.graph_index[j], quote(&format!("rate={}", number(r))));
            }
        }
    } else {
        for (i, s) in graph.states.iter().enumerate() {
            let style = if graph.vanishing[i] { "dashed" } else { "solid" };
            let _ = writeln!(out, "  s{i} [label={}, style={style}];", quote(&node_label(system, s)));
        }
        for e in &graph.edges {
            let ann = match e.annotation {
                Annotation::Rate(r) => format!("rate={}", number(r)),
                Annotation::Probability(p) => format!("p={}", number(p)),
            };
            let label = format!("{} {ann}", system.transition_name(e.transition));
            let _ = writeln!(out, "  s{} -> s{} [label={}];", e.src, e.dst, quote(&label));
        }
    }
    out.push_str("}\n");
    Ok(out)
}
