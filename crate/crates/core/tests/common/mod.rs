//! Independent oracles shared by the integration tests. They use dense
//! linear algebra and brute-force enumeration only.
#![allow(dead_code)]

pub mod dot;

use std::collections::HashSet;

use infradep::builtin::{Builtin, ModelParams};
use infradep::model::{StateVector, System};
use infradep::statespace::{build_reachability_graph, eliminate_vanishing, Ctmc, ReachabilityGraph};
use nalgebra::{DMatrix, DVector};

pub struct Built {
    pub system: System,
    pub graph: ReachabilityGraph,
    pub ctmc: Ctmc,
}

pub fn build(b: Builtin) -> Built {
    build_with(b, &ModelParams::default())
}

pub fn build_with(b: Builtin, params: &ModelParams) -> Built {
    let model = b.build(params).unwrap();
    build_model(&model)
}

pub fn build_model(model: &infradep::model::Model) -> Built {
    let system = System::new(model).unwrap();
    let graph = build_reachability_graph(&system).unwrap();
    let ctmc = eliminate_vanishing(&graph, &system).unwrap();
    Built { system, graph, ctmc }
}

pub fn generator(c: &Ctmc) -> DMatrix<f64> {
    let n = c.len();
    let mut q = DMatrix::zeros(n, n);
    for (i, row) in c.rows.iter().enumerate() {
        for &(j, r) in row {
            q[(i, j)] += r;
            q[(i, i)] -= r;
        }
    }
    q
}

/// Solves πQ = 0, Σπ = 1 by LU on Qᵀ with the last equation replaced by
/// normalization.
pub fn dense_steady(c: &Ctmc) -> Vec<f64> {
    let n = c.len();
    let mut a = generator(c).transpose();
    let mut b = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("singular system").iter().copied().collect()
}

/// p(0)·exp(Qt) by scaling and squaring.
pub fn dense_transient(c: &Ctmc, t: f64) -> Vec<f64> {
    let e = (generator(c) * t).exp();
    let p0 = DVector::from_vec(c.initial.clone()).transpose();
    (p0 * e).iter().copied().collect()
}

/// Expected hitting time of `target` from the initial distribution,
/// solving −Q_TT m = 1 over the complement of the target.
pub fn dense_mtta(c: &Ctmc, target: &[usize]) -> f64 {
    let n = c.len();
    let rest: Vec<usize> = (0..n).filter(|i| !target.contains(i)).collect();
    let q = generator(c);
    let m = rest.len();
    let a = DMatrix::from_fn(m, m, |r, s| -q[(rest[r], rest[s])]);
    let times = a.lu().solve(&DVector::from_element(m, 1.0)).expect("singular system");
    rest.iter().enumerate().map(|(k, &i)| c.initial[i] * times[k]).sum()
}

/// Reachable states by fixpoint iteration over the full domain product:
/// a point joins once some reachable point has it as a successor.
pub fn exhaustive_reachable(sys: &System) -> (HashSet<StateVector>, usize) {
    let points: Vec<StateVector> = sys.domain_points().collect();
    let mut reached: HashSet<StateVector> = HashSet::new();
    reached.insert(sys.initial_state());
    loop {
        let before = reached.len();
        for p in &points {
            if !reached.contains(p) {
                continue;
            }
            for t in sys.enabled_transitions(p) {
                reached.insert(sys.apply_transition(p, t).unwrap());
            }
        }
        if reached.len() == before {
            break;
        }
    }
    let tangible = reached.iter().filter(|s| !sys.is_vanishing(s)).count();
    (reached, tangible)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn states_where(b: &Built, f: impl Fn(&[(String, String)]) -> bool) -> Vec<usize> {
    (0..b.ctmc.len()).filter(|&i| f(&b.system.assignments(&b.ctmc.states[i]))).collect()
}

pub fn has(assign: &[(String, String)], var: &str, value: &str) -> bool {
    assign.iter().any(|(k, v)| k == var && v == value)
}

/// Model A with the immediate weakening folded into the timed transitions
/// that can trigger it.
pub fn precomposed_accidental() -> infradep::model::Model {
    let mut m = infradep::builtin::accidental_model(&ModelParams::default()).unwrap();
    m.transitions.retain(|t| !t.is_immediate());
    let outage = infradep::model::Guard::is_in("elec", &["partial_e_outage", "e_lost"]);
    let mut out = Vec::new();
    for t in m.transitions.drain(..) {
        match t.name.as_str() {
            "e_failure_normal" => {
                let mut t = t;
                t.update.push(infradep::model::Assignment::set("info", "i_weakened"));
                out.push(t);
            }
            "i_restoration" => {
                let mut into_outage = t.clone();
                into_outage.name = "i_restoration_weakened".into();
                into_outage.guard = infradep::model::Guard::and(vec![t.guard.clone(), outage.clone()]);
                into_outage.update = vec![infradep::model::Assignment::set("info", "i_weakened")];
                let mut plain = t.clone();
                plain.guard = infradep::model::Guard::and(vec![t.guard.clone(), infradep::model::Guard::not(outage.clone())]);
                out.push(plain);
                out.push(into_outage);
            }
            _ => out.push(t),
        }
    }
    m.transitions = out;
    m
}
