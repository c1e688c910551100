//! Exact numerical measures on a [`Ctmc`]: steady state, transient
//! distribution, mean time to absorption and label probabilities.
//!
//! All solvers are sparse and iterative. They are pure functions of the
//! chain and the options.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::statespace::Ctmc;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("NOT_ERGODIC: {components} terminal strongly connected components")]
    NotErgodic { components: usize },
    #[error("NO_CONVERGENCE: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("UNREACHABLE_TARGET: target is hit with probability {hit_probability}")]
    UnreachableTarget { hit_probability: f64 },
    #[error("INVALID_ARG: {0}")]
    InvalidArg(String),
}

impl SolverError {
    pub fn code(&self) -> &'static str {
        match self {
            SolverError::NotErgodic { .. } => "NOT_ERGODIC",
            SolverError::NoConvergence { .. } => "NO_CONVERGENCE",
            SolverError::UnreachableTarget { .. } => "UNREACHABLE_TARGET",
            SolverError::InvalidArg(_) => "INVALID_ARG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on `‖πQ‖∞` for steady state and on the equation residual for
    /// absorption times. The default is well below 1e-10 because the
    /// solution error can exceed the residual by the chain's time scale.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Poisson mass discarded by uniformization truncation.
    pub poisson_tail: f64,
    /// Uniformization rate as a multiple of the largest exit rate; ≥ 1.
    pub uniformization_factor: f64,
    /// Return the conditional absorption time when the target is hit with
    /// probability below one.
    pub allow_defective: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-13,
            max_iterations: 1_000_000,
            poisson_tail: 1e-9,
            uniformization_factor: 1.0,
            allow_defective: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Steady,
    Transient,
    Mtta,
    Simulation,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Steady => "steady",
            Method::Transient => "transient",
            Method::Mtta => "mtta",
            Method::Simulation => "simulation",
        }
    }
}

/// A named numeric result. Field order is the serialized order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureResult {
    pub name: String,
    pub value: f64,
    pub method: Method,
    pub ci_halfwidth: Option<f64>,
    pub metadata: BTreeMap<String, Json>,
}

/// Probability vector over tangible states. `time` is `None` for the
/// steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub probs: Vec<f64>,
    pub time: Option<f64>,
    pub metadata: BTreeMap<String, Json>,
}

impl Distribution {
    pub fn method(&self) -> Method {
        match self.time {
            Some(_) => Method::Transient,
            None => Method::Steady,
        }
    }

    pub fn mass(&self, states: &[usize]) -> f64 {
        states.iter().map(|&s| self.probs[s]).sum()
    }
}

fn finish(mut probs: Vec<f64>) -> Vec<f64> {
    for p in &mut probs {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    probs
}

/// Incoming edges per state, `(source, rate)`.
fn columns(ctmc: &Ctmc) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); ctmc.len()];
    for (i, row) in ctmc.rows.iter().enumerate() {
        for &(j, r) in row {
            cols[j].push((i, r));
        }
    }
    cols
}

/// Strongly connected components with no edge leaving them, each sorted.
pub fn terminal_components(ctmc: &Ctmc) -> Vec<Vec<usize>> {
    let comp = tarjan(ctmc.len(), |i| ctmc.rows[i].iter().map(|(j, _)| *j));
    let count = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut terminal = vec![true; count];
    for (i, row) in ctmc.rows.iter().enumerate() {
        if row.iter().any(|(j, _)| comp[*j] != comp[i]) {
            terminal[comp[i]] = false;
        }
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (i, c) in comp.iter().enumerate() {
        if terminal[*c] {
            out[*c].push(i);
        }
    }
    let mut out: Vec<Vec<usize>> = out.into_iter().filter(|c| !c.is_empty()).collect();
    out.sort();
    out
}

/// Component index per node.
fn tarjan<I>(n: usize, succ: impl Fn(usize) -> I) -> Vec<usize>
where
    I: Iterator<Item = usize>,
{
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, succ(root).collect(), 0));
        while let Some((v, children, pos)) = call.last_mut() {
            let v = *v;
            if *pos < children.len() {
                let w = children[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w).collect(), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some((parent, _, _)) = call.last() {
                    low[*parent] = low[*parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Stationary distribution by Gauss-Seidel on the unique terminal
/// component; states outside it get probability zero.
pub fn steady_state(ctmc: &Ctmc, opts: &SolverOptions) -> Result<Distribution, SolverError> {
    if ctmc.is_empty() {
        return Err(SolverError::InvalidArg("empty chain".into()));
    }
    let bsccs = terminal_components(ctmc);
    if bsccs.len() != 1 {
        return Err(SolverError::NotErgodic { components: bsccs.len() });
    }
    let support = &bsccs[0];
    let n = ctmc.len();
    let mut pi = vec![0.0; n];
    let mut metadata = BTreeMap::new();
    metadata.insert("support".into(), json!(support.len()));
    if support.len() == 1 {
        pi[support[0]] = 1.0;
        metadata.insert("iterations".into(), json!(0));
        metadata.insert("residual".into(), json!(0.0));
        return Ok(Distribution { probs: pi, time: None, metadata });
    }

    let cols = columns(ctmc);
    let exit: Vec<f64> = (0..n).map(|i| ctmc.exit_rate(i)).collect();
    let uniform = 1.0 / support.len() as f64;
    for &s in support {
        pi[s] = uniform;
    }
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        for &j in support {
            let inflow: f64 = cols[j].iter().map(|&(i, r)| pi[i] * r).sum();
            pi[j] = inflow / exit[j];
        }
        let total: f64 = support.iter().map(|&s| pi[s]).sum();
        for &s in support {
            pi[s] /= total;
        }
        residual = steady_residual(&pi, support, &cols, &exit);
        if residual <= opts.tolerance {
            break;
        }
    }
    if residual > opts.tolerance {
        return Err(SolverError::NoConvergence { iterations, residual });
    }
    metadata.insert("iterations".into(), json!(iterations));
    metadata.insert("residual".into(), json!(residual));
    Ok(Distribution {
        probs: finish(pi),
        time: None,
        metadata,
    })
}

fn steady_residual(pi: &[f64], support: &[usize], cols: &[Vec<(usize, f64)>], exit: &[f64]) -> f64 {
    support
        .iter()
        .map(|&j| {
            let inflow: f64 = cols[j].iter().map(|&(i, r)| pi[i] * r).sum();
            (inflow - pi[j] * exit[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Poisson(q) weights on `[left, right]`, normalized, with the discarded
/// mass on both tails bounded by `eps`.
struct PoissonWeights {
    left: usize,
    weights: Vec<f64>,
    tail_bound: f64,
}

impl PoissonWeights {
    fn right(&self) -> usize {
        self.left + self.weights.len() - 1
    }
}

fn poisson_weights(q: f64, eps: f64) -> PoissonWeights {
    let mode = q.floor() as usize;
    // Weights relative to the mode, which has the largest term. The
    // geometric tail bounds below hold because term ratios are monotone.
    let mut left_terms = Vec::new();
    let mut k = mode;
    let mut w = 1.0;
    let left_tail;
    loop {
        if k == 0 {
            left_tail = 0.0;
            break;
        }
        let ratio = k as f64 / q;
        let next = w * ratio;
        // Everything below k is at most next / (1 - ratio').
        let bound = next / (1.0 - (k - 1) as f64 / q);
        if bound <= eps / 2.0 {
            left_tail = bound;
            break;
        }
        w = next;
        k -= 1;
        left_terms.push(w);
    }
    let left = k;
    let mut right_terms = Vec::new();
    let mut k = mode;
    let mut w = 1.0;
    let right_tail;
    loop {
        let ratio = q / (k + 1) as f64;
        let next = w * ratio;
        if ratio < 1.0 {
            let bound = next / (1.0 - q / (k + 2) as f64);
            if bound <= eps / 2.0 {
                right_tail = bound;
                break;
            }
        }
        w = next;
        k += 1;
        right_terms.push(w);
    }
    let mut weights: Vec<f64> = left_terms.into_iter().rev().collect();
    weights.push(1.0);
    weights.extend(right_terms);
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    PoissonWeights {
        left,
        weights,
        tail_bound: (left_tail + right_tail) / total,
    }
}

/// `p(t) = p(0)·exp(Qt)` by uniformization.
pub fn transient(ctmc: &Ctmc, t: f64, opts: &SolverOptions) -> Result<Distribution, SolverError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(SolverError::InvalidArg(format!("time must be finite and non-negative, got {t}")));
    }
    if opts.uniformization_factor < 1.0 {
        return Err(SolverError::InvalidArg("uniformization factor must be at least 1".into()));
    }
    let n = ctmc.len();
    let max_exit = (0..n).map(|i| ctmc.exit_rate(i)).fold(0.0, f64::max);
    let lambda = max_exit * opts.uniformization_factor;
    let mut metadata = BTreeMap::new();
    metadata.insert("time".into(), json!(t));
    if t == 0.0 || lambda == 0.0 {
        metadata.insert("uniformization_rate".into(), json!(lambda));
        metadata.insert("left".into(), json!(0));
        metadata.insert("right".into(), json!(0));
        return Ok(Distribution {
            probs: ctmc.initial.clone(),
            time: Some(t),
            metadata,
        });
    }
    let pw = poisson_weights(lambda * t, opts.poisson_tail);
    let exit: Vec<f64> = (0..n).map(|i| ctmc.exit_rate(i)).collect();
    let mut v = ctmc.initial.clone();
    let mut next = vec![0.0; n];
    let mut acc = vec![0.0; n];
    for k in 0..=pw.right() {
        if k >= pw.left {
            let w = pw.weights[k - pw.left];
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += w * x;
            }
        }
        if k == pw.right() {
            break;
        }
        // v ← v (I + Q/Λ)
        for (i, x) in v.iter().enumerate() {
            next[i] += x * (1.0 - exit[i] / lambda);
            for &(j, r) in &ctmc.rows[i] {
                next[j] += x * r / lambda;
            }
        }
        std::mem::swap(&mut v, &mut next);
        next.iter_mut().for_each(|x| *x = 0.0);
    }
    metadata.insert("uniformization_rate".into(), json!(lambda));
    metadata.insert("left".into(), json!(pw.left));
    metadata.insert("right".into(), json!(pw.right()));
    metadata.insert("truncated_mass".into(), json!(pw.tail_bound));
    Ok(Distribution {
        probs: finish(acc),
        time: Some(t),
        metadata,
    })
}

/// Mean time until the chain first enters `target`, starting from the
/// initial distribution.
///
/// When the target is missed with positive probability the result is
/// `UNREACHABLE_TARGET`, unless `allow_defective` is set; then the value
/// is the mean conditioned on hitting, and the hit probability is in the
/// metadata.
pub fn mean_time_to_absorption(ctmc: &Ctmc, name: &str, target: &[usize], opts: &SolverOptions) -> Result<MeasureResult, SolverError> {
    let n = ctmc.len();
    if target.is_empty() {
        return Err(SolverError::UnreachableTarget { hit_probability: 0.0 });
    }
    if let Some(bad) = target.iter().find(|&&s| s >= n) {
        return Err(SolverError::InvalidArg(format!("target state {bad} out of range")));
    }
    let mut in_target = vec![false; n];
    for &s in target {
        in_target[s] = true;
    }
    let cols = columns(ctmc);
    let exit: Vec<f64> = (0..n).map(|i| ctmc.exit_rate(i)).collect();

    // States that can reach the target.
    let mut reaches = in_target.clone();
    let mut queue: Vec<usize> = target.to_vec();
    while let Some(j) = queue.pop() {
        for &(i, _) in &cols[j] {
            if !reaches[i] {
                reaches[i] = true;
                queue.push(i);
            }
        }
    }
    // States hitting the target surely: no path avoiding the target leads
    // to a state that cannot reach it.
    let mut doomed = reaches.iter().map(|r| !r).collect::<Vec<bool>>();
    let mut queue: Vec<usize> = (0..n).filter(|&i| doomed[i]).collect();
    while let Some(j) = queue.pop() {
        for &(i, _) in &cols[j] {
            if !in_target[i] && !doomed[i] {
                doomed[i] = true;
                queue.push(i);
            }
        }
    }
    let sure: Vec<bool> = (0..n).map(|i| in_target[i] || !doomed[i]).collect();
    let open: Vec<usize> = (0..n).filter(|&i| !in_target[i] && reaches[i]).collect();

    let mut iterations = 0;
    // h: hit probability, exact 1 or 0 where the structure decides it.
    let mut h: Vec<f64> = (0..n).map(|i| if sure[i] { 1.0 } else { 0.0 }).collect();
    let uncertain: Vec<usize> = open.iter().copied().filter(|&i| !sure[i]).collect();
    let h_residual = gauss_seidel(&uncertain, &mut iterations, opts, |i, h: &[f64]| {
        let flow: f64 = ctmc.rows[i].iter().map(|&(j, r)| r * h[j]).sum();
        (flow / exit[i], (flow - exit[i] * h[i]).abs())
    }, &mut h)?;

    let hit: f64 = ctmc.initial.iter().zip(&h).map(|(p, x)| p * x).sum();
    let defective = ctmc.initial.iter().enumerate().any(|(i, p)| *p > 0.0 && !sure[i]);
    if defective && (!opts.allow_defective || hit <= 0.0) {
        return Err(SolverError::UnreachableTarget { hit_probability: hit });
    }

    // u_i = h_i · E[τ | hit, X0 = i] solves exit_i u_i = h_i + Σ q_ij u_j.
    let mut u = vec![0.0; n];
    let residual = gauss_seidel(&open, &mut iterations, opts, |i, u: &[f64]| {
        let flow: f64 = ctmc.rows[i].iter().map(|&(j, r)| r * u[j]).sum();
        let rhs = h[i] + flow;
        (rhs / exit[i], (rhs - exit[i] * u[i]).abs() / rhs.max(1.0))
    }, &mut u)?;
    let value = ctmc.initial.iter().zip(&u).map(|(p, x)| p * x).sum::<f64>() / hit;

    let mut metadata = BTreeMap::new();
    metadata.insert("iterations".into(), json!(iterations));
    metadata.insert("residual".into(), json!(residual.max(h_residual)));
    metadata.insert("hit_probability".into(), json!(hit));
    metadata.insert("conditional".into(), json!(defective));
    metadata.insert("target_states".into(), json!(target.len()));
    Ok(MeasureResult {
        name: name.to_string(),
        value,
        method: Method::Mtta,
        ci_halfwidth: None,
        metadata,
    })
}

/// Sweeps `update` over `states` in order until the largest equation
/// residual is within tolerance. Absorption-time residuals are relative to
/// the equation's magnitude when it exceeds one. `update` returns the new value and the
/// residual of the old one.
fn gauss_seidel(
    states: &[usize],
    iterations: &mut usize,
    opts: &SolverOptions,
    update: impl Fn(usize, &[f64]) -> (f64, f64),
    x: &mut [f64],
) -> Result<f64, SolverError> {
    if states.is_empty() {
        return Ok(0.0);
    }
    let mut count = 0;
    loop {
        count += 1;
        for &i in states {
            x[i] = update(i, x).0;
        }
        let residual = states.iter().map(|&i| update(i, x).1).fold(0.0, f64::max);
        if residual <= opts.tolerance {
            *iterations += count;
            return Ok(residual);
        }
        if count >= opts.max_iterations {
            return Err(SolverError::NoConvergence { iterations: count, residual });
        }
    }
}

/// Probability mass of `states` under `dist`.
pub fn label_probability(dist: &Distribution, name: &str, states: &[usize]) -> MeasureResult {
    let mut metadata = dist.metadata.clone();
    metadata.insert("states".into(), json!(states.len()));
    MeasureResult {
        name: name.to_string(),
        value: dist.mass(states),
        method: dist.method(),
        ci_halfwidth: None,
        metadata,
    }
}
