//! Reachability graph construction and reduction to a CTMC.
//!
//! States are numbered in breadth-first order from the initial state, with
//! successors expanded in transition declaration order, so numbering is
//! deterministic.

use std::collections::{BTreeMap, HashMap, VecDeque};

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::model::{FireError, StateVector, System, TransitionId, TransitionKind};

pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateSpaceError {
    #[error("STATE_LIMIT: more than {limit} states")]
    StateLimit { limit: usize },
    #[error("IMMEDIATE_CYCLE: vanishing states {states:?} form a cycle of immediate transitions")]
    ImmediateCycle { states: Vec<usize> },
    #[error(transparent)]
    Fire(#[from] FireError),
}

impl StateSpaceError {
    pub fn code(&self) -> &'static str {
        match self {
            StateSpaceError::StateLimit { .. } => "STATE_LIMIT",
            StateSpaceError::ImmediateCycle { .. } => "IMMEDIATE_CYCLE",
            StateSpaceError::Fire(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Annotation {
    Rate(f64),
    Probability(f64),
}

impl Annotation {
    pub fn value(self) -> f64 {
        match self {
            Annotation::Rate(v) | Annotation::Probability(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub src: usize,
    pub transition: TransitionId,
    pub dst: usize,
    pub annotation: Annotation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachabilityGraph {
    pub states: Vec<StateVector>,
    pub vanishing: Vec<bool>,
    /// Grouped by source state, in expansion order.
    pub edges: Vec<Edge>,
    pub initial: usize,
    out_start: Vec<usize>,
}

impl ReachabilityGraph {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn out_edges(&self, s: usize) -> &[Edge] {
        &self.edges[self.out_start[s]..self.out_start[s + 1]]
    }

    pub fn is_tangible(&self, s: usize) -> bool {
        !self.vanishing[s]
    }

    pub fn tangible_count(&self) -> usize {
        self.vanishing.iter().filter(|v| !**v).count()
    }

    pub fn index_of(&self, s: &StateVector) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub state_limit: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }
}

pub fn build_reachability_graph(system: &System) -> Result<ReachabilityGraph, StateSpaceError> {
    build_reachability_graph_with(system, BuildOptions::default())
}

pub fn build_reachability_graph_with(system: &System, options: BuildOptions) -> Result<ReachabilityGraph, StateSpaceError> {
    let mut index: HashMap<StateVector, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut vanishing = Vec::new();
    let mut edges = Vec::new();
    let mut out_start = vec![0];
    let mut queue = VecDeque::new();

    let init = system.initial_state();
    index.insert(init.clone(), 0);
    states.push(init);
    queue.push_back(0usize);

    while let Some(src) = queue.pop_front() {
        let s = states[src].clone();
        let enabled = system.enabled_transitions(&s);
        let is_vanishing = enabled.first().is_some_and(|t| system.is_immediate(*t));
        vanishing.push(is_vanishing);
        let total_weight: f64 = enabled
            .iter()
            .map(|t| match system.transition_kind(*t) {
                TransitionKind::Immediate { weight, .. } => weight,
                TransitionKind::Timed { .. } => 0.0,
            })
            .sum();
        for t in enabled {
            let next = system.apply_transition(&s, t)?;
            let dst = match index.get(&next) {
                Some(&d) => d,
                None => {
                    let d = states.len();
                    if d >= options.state_limit {
                        return Err(StateSpaceError::StateLimit { limit: options.state_limit });
                    }
                    index.insert(next.clone(), d);
                    states.push(next);
                    queue.push_back(d);
                    d
                }
            };
            let annotation = match system.transition_kind(t) {
                TransitionKind::Timed { rate } => Annotation::Rate(rate),
                TransitionKind::Immediate { weight, .. } => Annotation::Probability(weight / total_weight),
            };
            edges.push(Edge {
                src,
                transition: t,
                dst,
                annotation,
            });
        }
        out_start.push(edges.len());
    }

    let graph = ReachabilityGraph {
        states,
        vanishing,
        edges,
        initial: 0,
        out_start,
    };
    if let Some(cycle) = find_vanishing_cycle(&graph) {
        return Err(StateSpaceError::ImmediateCycle { states: cycle });
    }
    Ok(graph)
}

/// Returns the states of one cycle made only of vanishing states, if any.
fn find_vanishing_cycle(g: &ReachabilityGraph) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; g.len()];
    for root in 0..g.len() {
        if !g.vanishing[root] || mark[root] != Mark::New {
            continue;
        }
        // (state, next out-edge offset)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&mut (s, ref mut pos)) = stack.last_mut() {
            let out = g.out_edges(s);
            if *pos < out.len() {
                let d = out[*pos].dst;
                *pos += 1;
                if !g.vanishing[d] {
                    continue;
                }
                match mark[d] {
                    Mark::Open => {
                        let start = stack.iter().position(|(x, _)| *x == d).unwrap();
                        return Some(stack[start..].iter().map(|(x, _)| *x).collect());
                    }
                    Mark::New => {
                        mark[d] = Mark::Open;
                        stack.push((d, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[s] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Tangible-state continuous-time Markov chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ctmc {
    pub states: Vec<StateVector>,
    /// Index of each CTMC state in the reachability graph it came from.
    pub graph_index: Vec<usize>,
    /// Off-diagonal generator entries per row, sorted by column.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Timed rate mass that returns to the same state; it does not enter
    /// the generator.
    pub self_loops: Vec<f64>,
    pub initial: Vec<f64>,
    pub labels: IndexMap<String, Vec<usize>>,
}

impl Ctmc {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `-q_ii`
    pub fn exit_rate(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|(_, r)| r).sum()
    }

    /// Total timed rate leaving `i` in the source graph, self-loops included.
    pub fn total_outflow(&self, i: usize) -> f64 {
        self.exit_rate(i) + self.self_loops[i]
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return -self.exit_rate(i);
        }
        self.rows[i].iter().find(|(c, _)| *c == j).map_or(0.0, |(_, r)| *r)
    }

    pub fn label(&self, name: &str) -> Option<&[usize]> {
        self.labels.get(name).map(|v| v.as_slice())
    }

    /// Dense generator, row-major. Intended for small chains.
    pub fn dense_generator(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut q = vec![vec![0.0; n]; n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, r) in row {
                q[i][j] += r;
            }
            q[i][i] = -self.exit_rate(i);
        }
        q
    }

    /// Chain over anonymous states `0..n` from explicit `(from, to, rate)`
    /// triples, starting in `initial`.
    pub fn from_rates(n: usize, rates: &[(usize, usize, f64)], initial: usize) -> Ctmc {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        let mut self_loops = vec![0.0; n];
        for &(i, j, r) in rates {
            if i == j {
                self_loops[i] += r;
            } else {
                *rows[i].entry(j).or_insert(0.0) += r;
            }
        }
        let mut init = vec![0.0; n];
        init[initial] = 1.0;
        Ctmc {
            states: (0..n).map(|i| StateVector(vec![i as i64])).collect(),
            graph_index: (0..n).collect(),
            rows: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            self_loops,
            initial: init,
            labels: IndexMap::new(),
        }
    }

    pub fn with_label(mut self, name: &str, states: Vec<usize>) -> Ctmc {
        self.labels.insert(name.to_string(), states);
        self
    }
}

/// Removes vanishing states: a timed edge into a vanishing state is split
/// over the tangible states its immediate chains end in, weighted by path
/// probability. Outflow per tangible state is preserved.
pub fn eliminate_vanishing(g: &ReachabilityGraph, system: &System) -> Result<Ctmc, StateSpaceError> {
    if let Some(cycle) = find_vanishing_cycle(g) {
        return Err(StateSpaceError::ImmediateCycle { states: cycle });
    }
    let mut ctmc_index = vec![usize::MAX; g.len()];
    let mut tangible = Vec::new();
    for s in 0..g.len() {
        if g.is_tangible(s) {
            ctmc_index[s] = tangible.len();
            tangible.push(s);
        }
    }
    let resolved = resolve_vanishing(g);

    let n = tangible.len();
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut self_loops = vec![0.0; n];
    for (ci, &s) in tangible.iter().enumerate() {
        for e in g.out_edges(s) {
            let rate = e.annotation.value();
            let mut add = |dst_graph: usize, mass: f64| {
                let cj = ctmc_index[dst_graph];
                if cj == ci {
                    self_loops[ci] += mass;
                } else {
                    *rows[ci].entry(cj).or_insert(0.0) += mass;
                }
            };
            if g.is_tangible(e.dst) {
                add(e.dst, rate);
            } else {
                for &(t, p) in &resolved[&e.dst] {
                    add(t, rate * p);
                }
            }
        }
    }

    let mut initial = vec![0.0; n];
    if g.is_tangible(g.initial) {
        initial[ctmc_index[g.initial]] = 1.0;
    } else {
        for &(t, p) in &resolved[&g.initial] {
            initial[ctmc_index[t]] += p;
        }
    }

    let states: Vec<StateVector> = tangible.iter().map(|&s| g.states[s].clone()).collect();
    let labels = system
        .labels()
        .map(|(name, pred)| {
            let members = states.iter().enumerate().filter(|(_, s)| pred.holds(s)).map(|(i, _)| i).collect();
            (name.to_string(), members)
        })
        .collect();
    Ok(Ctmc {
        states,
        graph_index: tangible,
        rows: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
        self_loops,
        initial,
        labels,
    })
}

/// For each vanishing state, the distribution over the tangible states its
/// immediate chains reach. Requires an acyclic vanishing subgraph.
fn resolve_vanishing(g: &ReachabilityGraph) -> HashMap<usize, Vec<(usize, f64)>> {
    let mut done: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    for root in 0..g.len() {
        if g.is_tangible(root) || done.contains_key(&root) {
            continue;
        }
        let mut stack = vec![root];
        while let Some(&v) = stack.last() {
            let pending: Vec<usize> = g
                .out_edges(v)
                .iter()
                .map(|e| e.dst)
                .filter(|d| g.vanishing[*d] && !done.contains_key(d))
                .collect();
            if !pending.is_empty() {
                stack.extend(pending);
                continue;
            }
            stack.pop();
            if done.contains_key(&v) {
                continue;
            }
            let mut dist: BTreeMap<usize, f64> = BTreeMap::new();
            for e in g.out_edges(v) {
                let p = e.annotation.value();
                if g.is_tangible(e.dst) {
                    *dist.entry(e.dst).or_insert(0.0) += p;
                } else {
                    for &(t, q) in &done[&e.dst] {
                        *dist.entry(t).or_insert(0.0) += p * q;
                    }
                }
            }
            done.insert(v, dist.into_iter().collect());
        }
    }
    done
}

/// Indices of graph states satisfying each label, in label declaration
/// order. Vanishing states are included.
pub fn label_sets(g: &ReachabilityGraph, system: &System) -> IndexMap<String, Vec<usize>> {
    system
        .labels()
        .map(|(name, pred)| {
            let members = g.states.iter().enumerate().filter(|(_, s)| pred.holds(s)).map(|(i, _)| i).collect();
            (name.to_string(), members)
        })
        .collect()
}
