//! Qualitative claims about the built-in models, phrased as reachability
//! properties of the state graph.
//!
//! State sets are named by a selector: a label of the model, or failing
//! that a guard expression such as `info == i_weakened`. Selectors match
//! tangible states only; vanishing states are passed through in zero time
//! and never count as a source or a destination. Paths may traverse
//! vanishing states.
//!
//! Every check depends on the graph alone, never on rates.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::builtin::{Builtin, ModelParams, ParamError};
use crate::io::parse_guard;
use crate::model::{Predicate, System, TransitionId};
use crate::statespace::{build_reachability_graph_with, BuildOptions, ReachabilityGraph, StateSpaceError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("UNKNOWN_LABEL: `{0}` is neither a label nor a guard over the model's variables")]
    UnknownLabel(String),
    #[error("UNKNOWN_TRANSITION: no transition named `{0}`")]
    UnknownTransition(String),
    #[error("NOT_ATTACK_MODEL: the model lacks variable `{0}`")]
    NotAttackModel(String),
    #[error("VACUOUS_QUERY: `{to}` is unreachable from `{from}`")]
    Vacuous { from: String, to: String },
}

impl CheckError {
    pub fn code(&self) -> &'static str {
        match self {
            CheckError::UnknownLabel(_) => "UNKNOWN_LABEL",
            CheckError::UnknownTransition(_) => "UNKNOWN_TRANSITION",
            CheckError::NotAttackModel(_) => "NOT_ATTACK_MODEL",
            CheckError::Vacuous { .. } => "VACUOUS_QUERY",
        }
    }
}

/// Resolves a selector to a predicate: a label name first, then a guard.
pub fn resolve_selector(system: &System, selector: &str) -> Result<Predicate, CheckError> {
    if let Some(p) = system.label(selector) {
        return Ok(p.clone());
    }
    let guard = parse_guard(selector).map_err(|_| CheckError::UnknownLabel(selector.to_string()))?;
    system.predicate(&guard).map_err(|_| CheckError::UnknownLabel(selector.to_string()))
}

fn tangible_mask(graph: &ReachabilityGraph, system: &System, selector: &str) -> Result<Vec<bool>, CheckError> {
    let p = resolve_selector(system, selector)?;
    Ok(graph.states.iter().enumerate().map(|(i, s)| graph.is_tangible(i) && p.holds(s)).collect())
}

fn transition_ids(system: &System, names: &[String]) -> Result<Vec<TransitionId>, CheckError> {
    names
        .iter()
        .map(|n| system.transition_id(n).ok_or_else(|| CheckError::UnknownTransition(n.clone())))
        .collect()
}

/// One step of a path: the state entered and the transition that entered
/// it (`None` for the first state).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathStep {
    pub via: Option<String>,
    pub state: String,
}

/// Graph path as state indices with the transitions between them;
/// `states.len() == transitions.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub states: Vec<usize>,
    pub transitions: Vec<TransitionId>,
}

impl Path {
    pub fn steps(&self, graph: &ReachabilityGraph, system: &System) -> Vec<PathStep> {
        self.states
            .iter()
            .enumerate()
            .map(|(k, &s)| PathStep {
                via: k.checked_sub(1).map(|k| system.transition_name(self.transitions[k]).to_string()),
                state: system.format_state(&graph.states[s]),
            })
            .collect()
    }
}

/// Outcome of one query. `witness` is a path proving an existential
/// verdict or refuting a universal one; `offenders` lists states that
/// violate a per-state property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Vec<PathStep>>,
    pub offenders: Vec<String>,
}

impl Verdict {
    fn plain(holds: bool) -> Verdict {
        Verdict {
            holds,
            witness: None,
            offenders: Vec::new(),
        }
    }
}

/// Shortest path from any `source` to any `target` that fires `via` as a
/// subsequence, avoiding edges for which `blocked` holds. Search runs on
/// (state, matched prefix length); matching greedily is optimal for
/// subsequences.
fn search(
    graph: &ReachabilityGraph,
    source: &[bool],
    target: &[bool],
    via: &[TransitionId],
    blocked: impl Fn(TransitionId) -> bool,
) -> Option<Path> {
    let n = graph.len();
    let layers = via.len() + 1;
    let node = |s: usize, k: usize| k * n + s;
    let mut parent: Vec<Option<(usize, TransitionId)>> = vec![None; n * layers];
    let mut seen = vec![false; n * layers];
    let mut queue = VecDeque::new();
    for s in (0..n).filter(|&s| source[s]) {
        seen[node(s, 0)] = true;
        queue.push_back((s, 0));
    }
    while let Some((s, k)) = queue.pop_front() {
        if k == via.len() && target[s] {
            let mut states = vec![s];
            let mut transitions = Vec::new();
            let mut cur = node(s, k);
            while let Some((prev, t)) = parent[cur] {
                states.push(prev % n);
                transitions.push(t);
                cur = prev;
            }
            states.reverse();
            transitions.reverse();
            return Some(Path { states, transitions });
        }
        for e in graph.out_edges(s) {
            if blocked(e.transition) {
                continue;
            }
            let k2 = if k < via.len() && via[k] == e.transition { k + 1 } else { k };
            let id = node(e.dst, k2);
            if !seen[id] {
                seen[id] = true;
                parent[id] = Some((node(s, k), e.transition));
                queue.push_back((e.dst, k2));
            }
        }
    }
    None
}

/// Is there a path from `from` to `to` firing `via` in order, other
/// transitions allowed in between? A witness is returned when there is.
pub fn check_path_exists(graph: &ReachabilityGraph, system: &System, from: &str, to: &str, via: &[String]) -> Result<Verdict, CheckError> {
    let source = tangible_mask(graph, system, from)?;
    let target = tangible_mask(graph, system, to)?;
    let via = transition_ids(system, via)?;
    let path = search(graph, &source, &target, &via, |_| false);
    Ok(Verdict {
        holds: path.is_some(),
        witness: path.map(|p| p.steps(graph, system)),
        offenders: Vec::new(),
    })
}

/// Does every path from `from` to `to` fire at least one transition of
/// each group in `required`? Decided per group by deleting the group's
/// edges: the target must become unreachable. A surviving path is the
/// counterexample.
pub fn check_all_paths_contain(
    graph: &ReachabilityGraph,
    system: &System,
    from: &str,
    to: &str,
    required: &[Vec<String>],
) -> Result<Verdict, CheckError> {
    let source = tangible_mask(graph, system, from)?;
    let target = tangible_mask(graph, system, to)?;
    if search(graph, &source, &target, &[], |_| false).is_none() {
        return Err(CheckError::Vacuous {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    for group in required {
        let ids = transition_ids(system, group)?;
        if let Some(p) = search(graph, &source, &target, &[], |t| ids.contains(&t)) {
            return Ok(Verdict {
                holds: false,
                witness: Some(p.steps(graph, system)),
                offenders: Vec::new(),
            });
        }
    }
    Ok(Verdict::plain(true))
}

/// Is there a single edge from `from` to `to`, optionally restricted to
/// one transition? Edges leaving or entering vanishing states do not count.
pub fn check_edge_exists(graph: &ReachabilityGraph, system: &System, from: &str, to: &str, transition: Option<&str>) -> Result<Verdict, CheckError> {
    let source = tangible_mask(graph, system, from)?;
    let target = tangible_mask(graph, system, to)?;
    let only = match transition {
        Some(name) => Some(system.transition_id(name).ok_or_else(|| CheckError::UnknownTransition(name.to_string()))?),
        None => None,
    };
    let edge = graph.edges.iter().find(|e| source[e.src] && target[e.dst] && only.is_none_or(|t| t == e.transition));
    Ok(Verdict {
        holds: edge.is_some(),
        witness: edge.map(|e| {
            Path {
                states: vec![e.src, e.dst],
                transitions: vec![e.transition],
            }
            .steps(graph, system)
        }),
        offenders: Vec::new(),
    })
}

/// Is no state matching `target` reachable from the initial state? If one
/// is, the path to it is the witness.
pub fn set_unreachable(graph: &ReachabilityGraph, system: &System, target: &str) -> Result<Verdict, CheckError> {
    let p = resolve_selector(system, target)?;
    let hits: Vec<bool> = graph.states.iter().map(|s| p.holds(s)).collect();
    let mut source = vec![false; graph.len()];
    source[graph.initial] = true;
    let path = search(graph, &source, &hits, &[], |_| false);
    Ok(Verdict {
        holds: path.is_none(),
        witness: path.map(|p| p.steps(graph, system)),
        offenders: Vec::new(),
    })
}

/// Does every tangible state outside the `exclude` sets have a direct edge
/// into each of the `targets` sets? Offenders are the states lacking one.
pub fn check_direct_edges_into(graph: &ReachabilityGraph, system: &System, exclude: &[String], targets: &[String]) -> Result<Verdict, CheckError> {
    let mut excluded = vec![false; graph.len()];
    for sel in exclude {
        for (i, m) in tangible_mask(graph, system, sel)?.into_iter().enumerate() {
            excluded[i] |= m;
        }
    }
    let masks = targets.iter().map(|t| tangible_mask(graph, system, t)).collect::<Result<Vec<_>, _>>()?;
    let offenders: Vec<String> = (0..graph.len())
        .filter(|&s| graph.is_tangible(s) && !excluded[s])
        .filter(|&s| masks.iter().any(|m| !graph.out_edges(s).iter().any(|e| m[e.dst])))
        .map(|s| system.format_state(&graph.states[s]))
        .collect();
    Ok(Verdict {
        holds: offenders.is_empty(),
        witness: None,
        offenders,
    })
}

/// Do apparent and real statuses agree on every reachable tangible state
/// where no deceptive attack is under way (`attack` is `none` or
/// `detected`)?
pub fn check_apparent_consistency(graph: &ReachabilityGraph, system: &System) -> Result<Verdict, CheckError> {
    let var = |name: &str| system.var_index(name).ok_or_else(|| CheckError::NotAttackModel(name.to_string()));
    let attack = var("attack")?;
    let pairs = [(var("real_info")?, var("app_info")?), (var("real_elec")?, var("app_elec")?)];
    let offenders: Vec<String> = (0..graph.len())
        .filter(|&s| graph.is_tangible(s))
        .map(|s| &graph.states[s])
        .filter(|s| matches!(system.value_name(attack, s.0[attack]).as_str(), "none" | "detected"))
        .filter(|s| pairs.iter().any(|&(real, app)| system.value_name(real, s.0[real]) != system.value_name(app, s.0[app])))
        .map(|s| system.format_state(s))
        .collect();
    Ok(Verdict {
        holds: offenders.is_empty(),
        witness: None,
        offenders,
    })
}

/// A graph property, as stored in claim suites and verdict files.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PathQuery {
    ExistsPath { from: String, to: String, via: Vec<String> },
    AllPathsContain { from: String, to: String, required: Vec<Vec<String>> },
    EdgeExists { from: String, to: String, transition: Option<String> },
    SetUnreachable { target: String },
    DirectEdgesInto { exclude: Vec<String>, targets: Vec<String> },
    ApparentConsistency,
}

impl PathQuery {
    pub fn run(&self, graph: &ReachabilityGraph, system: &System) -> Result<Verdict, CheckError> {
        match self {
            PathQuery::ExistsPath { from, to, via } => check_path_exists(graph, system, from, to, via),
            PathQuery::AllPathsContain { from, to, required } => check_all_paths_contain(graph, system, from, to, required),
            PathQuery::EdgeExists { from, to, transition } => check_edge_exists(graph, system, from, to, transition.as_deref()),
            PathQuery::SetUnreachable { target } => set_unreachable(graph, system, target),
            PathQuery::DirectEdgesInto { exclude, targets } => check_direct_edges_into(graph, system, exclude, targets),
            PathQuery::ApparentConsistency => check_apparent_consistency(graph, system),
        }
    }
}

/// A query together with the verdict it must produce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: String,
    pub description: String,
    pub query: PathQuery,
    pub expected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub id: String,
    pub description: String,
    pub query: PathQuery,
    pub expected: bool,
    pub holds: Option<bool>,
    pub passed: bool,
    pub error: Option<String>,
    pub witness: Option<Vec<PathStep>>,
    pub offenders: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub model: String,
    pub passed: bool,
    pub claims: Vec<ClaimResult>,
}

fn s(x: &str) -> String {
    x.to_string()
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|x| s(x)).collect()
}

fn claim(id: &str, description: &str, query: PathQuery, expected: bool) -> Claim {
    Claim {
        id: s(id),
        description: s(description),
        query,
        expected,
    }
}

fn exists(from: &str, to: &str, via: &[&str]) -> PathQuery {
    PathQuery::ExistsPath {
        from: s(from),
        to: s(to),
        via: strs(via),
    }
}

fn edge(from: &str, to: &str, transition: &str) -> PathQuery {
    PathQuery::EdgeExists {
        from: s(from),
        to: s(to),
        transition: Some(s(transition)),
    }
}

fn all_contain(from: &str, to: &str, required: &[&[&str]]) -> PathQuery {
    PathQuery::AllPathsContain {
        from: s(from),
        to: s(to),
        required: required.iter().map(|g| strs(g)).collect(),
    }
}

const E_RESTORATION: &[&str] = &["e_restoration_fast", "e_restoration_slow"];

fn both_restorations(from: &str) -> Claim {
    claim(
        &format!("{from}-needs-both-restorations"),
        &format!("every return from {from} to state1 needs an i-restoration and an e-restoration"),
        all_contain(from, "state1", &[&["i_restoration"], E_RESTORATION]),
        true,
    )
}

/// The claim suite of a built-in model.
pub fn claims_for(builtin: Builtin) -> Vec<Claim> {
    match builtin {
        Builtin::CascadingOnly => vec![
            claim(
                "blackout-path",
                "a masked i-failure followed by a severity escalation leads from state1 through state2 to state7",
                exists("state1", "state7", &["masked_passive", "e_failure_escal_sev"]),
                true,
            ),
            claim("edge-1-2", "state1 has a direct masked i-failure into state2", edge("state1", "state2", "masked_passive"), true),
            claim("edge-2-7", "state2 has a direct severity escalation into state7", edge("state2", "state7", "e_failure_escal_sev"), true),
            claim(
                "no-i-weakening",
                "without electricity-to-information constraints no i_weakened state is reachable",
                PathQuery::SetUnreachable {
                    target: s("info == i_weakened"),
                },
                true,
            ),
            both_restorations("state6"),
            both_restorations("state8"),
        ],
        Builtin::Accidental => vec![
            claim("reach-state3", "an undue configuration change reaches state3 from state1", exists("state1", "state3", &["cfg_change_first"]), true),
            claim("reach-state7", "state7 is reachable from the latent error states", exists("state2", "state7", &[]), true),
            claim("accumulate-5-7", "accumulated e-failures lead from state5 to state7", edge("state5", "state7", "e_fail_accumulate"), true),
            claim("accumulate-6-8", "accumulated e-failures lead from state6 to state8", edge("state6", "state8", "e_fail_accumulate"), true),
            both_restorations("state6"),
            both_restorations("state7"),
            both_restorations("state8"),
            claim(
                "state2-recovers-without-e-restoration",
                "a latent error can be signalled and repaired with no e-event, so state2 reaches state1 without e-restoration",
                all_contain("state2", "state1", &[E_RESTORATION]),
                false,
            ),
        ],
        Builtin::CommonCause => vec![
            claim(
                "interconnection",
                "every tangible state outside state6 and state8 has direct edges into both",
                PathQuery::DirectEdgesInto {
                    exclude: strs(&["state6", "state8"]),
                    targets: strs(&["state6", "state8"]),
                },
                true,
            ),
            claim("cc-1-8", "a common-cause failure moves state1 directly into state8", exists("state1", "state8", &["cc_to_8"]), true),
            claim("cc-edge-1-6", "a common-cause failure moves state1 directly into state6", edge("state1", "state6", "cc_to_6"), true),
            both_restorations("state6"),
            both_restorations("state8"),
        ],
        Builtin::Attack => vec![
            claim(
                "resync-on-detection",
                "apparent statuses equal real ones whenever no deceptive attack is under way",
                PathQuery::ApparentConsistency,
                true,
            ),
            claim("passive-to-8", "a passive deceptive attack can end in state8", exists("state1", "state8", &["passive_attack", "operator_overflow"]), true),
            claim("active-to-8", "an active deceptive attack can end in state8", exists("state1", "state8", &["active_attack", "ii_overflow"]), true),
            claim("detection-reached", "deception can be detected", exists("state2", "state4", &[]), true),
            claim(
                "recovery-needs-i-restoration",
                "after detection, returning to full operation needs an i-restoration",
                all_contain("state4", "state1", &[&["i_restoration"]]),
                true,
            ),
            claim(
                "deception-ends-by-detection",
                "a deceived state returns to full operation only through detection",
                all_contain("deceived", "state1", &[&["detect_e_working", "detect_e_weakened", "detect_partial_e_outage", "detect_e_lost"]]),
                true,
            ),
        ],
    }
}

/// Runs `claims` on a built graph. Errors count as failures.
pub fn run_claims(model: &str, graph: &ReachabilityGraph, system: &System, claims: &[Claim]) -> ClaimReport {
    let claims: Vec<ClaimResult> = claims
        .iter()
        .map(|c| {
            let (holds, error, witness, offenders) = match c.query.run(graph, system) {
                Ok(v) => (Some(v.holds), None, v.witness, v.offenders),
                Err(e) => (None, Some(e.to_string()), None, Vec::new()),
            };
            ClaimResult {
                id: c.id.clone(),
                description: c.description.clone(),
                query: c.query.clone(),
                expected: c.expected,
                holds,
                passed: holds == Some(c.expected),
                error,
                witness,
                offenders,
            }
        })
        .collect();
    ClaimReport {
        model: model.to_string(),
        passed: claims.iter().all(|c| c.passed),
        claims,
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
}

/// Builds `builtin` with `params` and runs its claim suite.
pub fn run_builtin_claims(builtin: Builtin, params: &ModelParams, options: BuildOptions) -> Result<ClaimReport, SuiteError> {
    let model = builtin.build(params)?;
    let system = System::new(&model).expect("built-in models validate");
    let graph = build_reachability_graph_with(&system, options)?;
    Ok(run_claims(builtin.name(), &graph, &system, &claims_for(builtin)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Assignment, Guard, Model, RateExpr, Transition, VariableDecl};
    use crate::statespace::build_reachability_graph;

    /// a -> b -> c, plus a -> c through `skip`.
    fn diamond() -> (System, ReachabilityGraph) {
        let mut m = Model::new("d");
        m.variables.push(VariableDecl::enumeration("x", &["a", "b", "c"], "a"));
        let step = |name: &str, from: &str, to: &str| Transition::timed(name, RateExpr::Literal(1.0), Guard::eq("x", from), vec![Assignment::set("x", to)]);
        m.transitions = vec![step("ab", "a", "b"), step("bc", "b", "c"), step("skip", "a", "c"), step("back", "c", "a")];
        let sys = System::new(&m).unwrap();
        let g = build_reachability_graph(&sys).unwrap();
        (sys, g)
    }

    #[test]
    fn via_sequence_is_respected() {
        let (sys, g) = diamond();
        let v = check_path_exists(&g, &sys, "x == a", "x == c", &strs(&["ab", "bc"])).unwrap();
        assert!(v.holds);
        let vias: Vec<_> = v.witness.unwrap().into_iter().filter_map(|s| s.via).collect();
        assert_eq!(vias, vec!["ab", "bc"]);
        let v = check_path_exists(&g, &sys, "x == a", "x == c", &strs(&["bc", "ab"])).unwrap();
        assert!(v.holds, "wraps around through `back`");
        let v = check_path_exists(&g, &sys, "x == b", "x == b", &strs(&["skip", "ab"])).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn edge_removal_finds_counterexamples() {
        let (sys, g) = diamond();
        let v = check_all_paths_contain(&g, &sys, "x == a", "x == c", &[strs(&["ab"])]).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness.unwrap()[1].via.as_deref(), Some("skip"));
        assert!(check_all_paths_contain(&g, &sys, "x == a", "x == c", &[strs(&["bc", "skip"])]).unwrap().holds);
    }

    #[test]
    fn errors_have_codes() {
        let (sys, g) = diamond();
        assert_eq!(check_path_exists(&g, &sys, "nosuch", "x == c", &[]).unwrap_err().code(), "UNKNOWN_LABEL");
        assert_eq!(check_path_exists(&g, &sys, "x == zz", "x == c", &[]).unwrap_err().code(), "UNKNOWN_LABEL");
        assert_eq!(check_path_exists(&g, &sys, "x == a", "x == c", &strs(&["nope"])).unwrap_err().code(), "UNKNOWN_TRANSITION");
        assert_eq!(check_apparent_consistency(&g, &sys).unwrap_err().code(), "NOT_ATTACK_MODEL");
    }
}
