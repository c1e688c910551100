//! Discrete-event simulation with reproducible random streams.
//!
//! A tangible state samples one exponential delay per enabled timed
//! transition, in declaration order, and fires the earliest (ties go to
//! the earlier declaration). A vanishing state fires one immediate
//! transition drawn with probability proportional to weight; the
//! categorical cells follow declaration order. Immediate firings carry the
//! timestamp of the timed event that led to them.
//!
//! Replication `r` of a run with master seed `seed` uses the stream
//! `SplitMix64::new(mix64(seed, r))`, see [`rng`]. Replications run in
//! parallel and are merged by index, so results do not depend on thread
//! scheduling.

pub mod rng;
mod trace;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::model::{FireError, Predicate, StateVector, System, TransitionId, TransitionKind};
use crate::solvers::{MeasureResult, Method};
use rng::{mix64, SplitMix64};

pub use trace::{replay, ReplayError};

/// Consecutive immediate firings after which a run is declared cyclic.
pub const IMMEDIATE_LIMIT: usize = 10_000;
pub const DEFAULT_EVENT_CAP: usize = 10_000_000;
/// 97.5% standard normal quantile.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("EVENT_CAP_EXCEEDED: more than {cap} events before time {}", .partial.end_time)]
    EventCapExceeded { cap: usize, partial: Box<Trace> },
    #[error("IMMEDIATE_CYCLE: more than {IMMEDIATE_LIMIT} consecutive immediate firings at time {time}")]
    ImmediateCycle { time: f64 },
    #[error("UNKNOWN_LABEL: {0}")]
    UnknownLabel(String),
    #[error("INVALID_ARG: {0}")]
    InvalidArg(String),
    #[error(transparent)]
    Fire(#[from] FireError),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::EventCapExceeded { .. } => "EVENT_CAP_EXCEEDED",
            SimError::ImmediateCycle { .. } => "IMMEDIATE_CYCLE",
            SimError::UnknownLabel(_) => "UNKNOWN_LABEL",
            SimError::InvalidArg(_) => "INVALID_ARG",
            SimError::Fire(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndReason {
    Horizon,
    Absorbed,
    EventCap,
    /// The run stopped on reaching a target label.
    Target,
}

impl EndReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EndReason::Horizon => "horizon",
            EndReason::Absorbed => "absorbed",
            EndReason::EventCap => "event-cap",
            EndReason::Target => "target",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub transition: TransitionId,
    /// State after firing.
    pub state: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub replication: u64,
    pub seed: u64,
    pub initial: StateVector,
    pub events: Vec<Event>,
    pub end: EndReason,
    /// Horizon for `Horizon`, otherwise the time of the last event.
    pub end_time: f64,
}

impl Trace {
    pub fn final_state(&self) -> &StateVector {
        self.events.last().map_or(&self.initial, |e| &e.state)
    }
}

/// Per-event decision of an observer.
enum Step {
    Continue,
    Stop,
}

struct Run<'a> {
    system: &'a System,
    rng: SplitMix64,
    state: StateVector,
    time: f64,
    events: usize,
    immediates: usize,
}

impl<'a> Run<'a> {
    fn new(system: &'a System, stream_seed: u64) -> Self {
        Run {
            system,
            rng: SplitMix64::new(stream_seed),
            state: system.initial_state(),
            time: 0.0,
            events: 0,
            immediates: 0,
        }
    }

    /// Advances until `horizon`, absorption, the event cap or an observer
    /// stop. `observe` sees every firing with the time of the event and the
    /// state before and after.
    fn drive(&mut self, horizon: f64, event_cap: usize, mut observe: impl FnMut(f64, TransitionId, &StateVector, &StateVector) -> Step) -> Result<EndReason, SimError> {
        let sys = self.system;
        loop {
            let enabled = sys.enabled_transitions(&self.state);
            let Some(&first) = enabled.first() else {
                return Ok(EndReason::Absorbed);
            };
            let chosen = if sys.is_immediate(first) {
                self.immediates += 1;
                if self.immediates > IMMEDIATE_LIMIT {
                    return Err(SimError::ImmediateCycle { time: self.time });
                }
                let weights: Vec<f64> = enabled
                    .iter()
                    .map(|t| match sys.transition_kind(*t) {
                        TransitionKind::Immediate { weight, .. } => weight,
                        TransitionKind::Timed { .. } => 0.0,
                    })
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut u = self.rng.uniform() * total;
                let mut pick = enabled[enabled.len() - 1];
                for (t, w) in enabled.iter().zip(&weights) {
                    if u <= *w {
                        pick = *t;
                        break;
                    }
                    u -= w;
                }
                pick
            } else {
                self.immediates = 0;
                let mut best = (f64::INFINITY, first);
                for &t in &enabled {
                    if let TransitionKind::Timed { rate } = sys.transition_kind(t) {
                        let d = self.rng.exponential(rate);
                        if d < best.0 {
                            best = (d, t);
                        }
                    }
                }
                if self.time + best.0 > horizon {
                    return Ok(EndReason::Horizon);
                }
                self.time += best.0;
                best.1
            };
            if self.events >= event_cap {
                return Ok(EndReason::EventCap);
            }
            let next = sys.apply_transition(&self.state, chosen)?;
            self.events += 1;
            let step = observe(self.time, chosen, &self.state, &next);
            self.state = next;
            if let Step::Stop = step {
                return Ok(EndReason::Target);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub horizon: f64,
    pub seed: u64,
    pub event_cap: usize,
}

/// One replication from the initial state, using `seed` directly as the
/// stream seed.
pub fn simulate(system: &System, opts: &SimOptions) -> Result<Trace, SimError> {
    simulate_stream(system, opts.horizon, opts.seed, 0, opts.event_cap)
}

/// Replication `r` of a run with master seed `seed`.
pub fn simulate_replication(system: &System, horizon: f64, seed: u64, r: u64, event_cap: usize) -> Result<Trace, SimError> {
    simulate_stream(system, horizon, mix64(seed, r), r, event_cap)
}

fn simulate_stream(system: &System, horizon: f64, stream_seed: u64, replication: u64, event_cap: usize) -> Result<Trace, SimError> {
    if !(horizon > 0.0) {
        return Err(SimError::InvalidArg(format!("horizon must be positive, got {horizon}")));
    }
    let mut run = Run::new(system, stream_seed);
    let mut events = Vec::new();
    let end = run.drive(horizon, event_cap, |time, transition, _, after| {
        events.push(Event {
            time,
            transition,
            state: after.clone(),
        });
        Step::Continue
    })?;
    let end_time = match end {
        EndReason::Horizon => horizon,
        _ => run.time,
    };
    let trace = Trace {
        replication,
        seed: stream_seed,
        initial: system.initial_state(),
        events,
        end,
        end_time,
    };
    if end == EndReason::EventCap {
        return Err(SimError::EventCapExceeded {
            cap: event_cap,
            partial: Box::new(trace),
        });
    }
    Ok(trace)
}

/// Replication statistics with a 95% normal-approximation interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub ci_halfwidth: f64,
    /// Sample standard deviation over the contributing replications.
    pub std_dev: f64,
    pub replications: usize,
    /// Replications contributing to `value` (all but the censored ones).
    pub samples: usize,
    pub censored: usize,
    pub seed: u64,
}

impl Estimate {
    fn from_samples(name: &str, samples: &[f64], replications: usize, seed: u64) -> Estimate {
        let n = samples.len();
        let mean = if n == 0 { 0.0 } else { samples.iter().sum::<f64>() / n as f64 };
        let std_dev = if n < 2 {
            0.0
        } else {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let ci_halfwidth = if n < 2 { 0.0 } else { Z95 * std_dev / (n as f64).sqrt() };
        Estimate {
            name: name.to_string(),
            value: mean,
            ci_halfwidth,
            std_dev,
            replications,
            samples: n,
            censored: replications - n,
            seed,
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.samples < 2 {
            0.0
        } else {
            self.std_dev / (self.samples as f64).sqrt()
        }
    }

    /// Whether `x` lies within three standard errors of the estimate.
    pub fn covers_3sigma(&self, x: f64) -> bool {
        (x - self.value).abs() <= 3.0 * self.std_error()
    }

    pub fn to_measure(&self) -> MeasureResult {
        let mut metadata = BTreeMap::new();
        metadata.insert("replications".into(), json!(self.replications));
        metadata.insert("seed".into(), json!(self.seed));
        metadata.insert("std_dev".into(), json!(self.std_dev));
        metadata.insert("censored".into(), json!(self.censored));
        MeasureResult {
            name: self.name.clone(),
            value: self.value,
            method: Method::Simulation,
            ci_halfwidth: Some(self.ci_halfwidth),
            metadata,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyOptions {
    pub horizon: f64,
    /// Defaults to a tenth of the horizon.
    pub burn_in: Option<f64>,
    pub replications: usize,
    pub seed: u64,
    pub event_cap: usize,
}

fn label_predicate<'a>(system: &'a System, label: &str) -> Result<&'a Predicate, SimError> {
    system.label(label).ok_or_else(|| SimError::UnknownLabel(label.to_string()))
}

fn check_replications(n: usize) -> Result<(), SimError> {
    if n < 2 {
        return Err(SimError::InvalidArg(format!("at least 2 replications are required, got {n}")));
    }
    Ok(())
}

/// Runs `f` for replications `0..n` in parallel and returns the results in
/// replication order, or the error of the lowest failing replication.
fn replicate<T: Send>(n: usize, f: impl Fn(u64) -> Result<T, SimError> + Sync) -> Result<Vec<T>, SimError> {
    let results: Vec<Result<T, SimError>> = (0..n as u64).into_par_iter().map(&f).collect();
    results.into_iter().collect()
}

/// Time-average of a label indicator over `[burn_in, horizon]`.
pub fn estimate_occupancy(system: &System, label: &str, opts: &OccupancyOptions) -> Result<Estimate, SimError> {
    let pred = label_predicate(system, label)?;
    estimate_occupancy_of(system, label, pred, opts)
}

/// As [`estimate_occupancy`] for an arbitrary state predicate.
pub fn estimate_occupancy_of(system: &System, name: &str, pred: &Predicate, opts: &OccupancyOptions) -> Result<Estimate, SimError> {
    check_replications(opts.replications)?;
    let burn_in = opts.burn_in.unwrap_or(opts.horizon / 10.0);
    if !(opts.horizon > 0.0) || !(0.0..opts.horizon).contains(&burn_in) {
        return Err(SimError::InvalidArg(format!("need 0 ≤ burn-in < horizon, got {burn_in} and {}", opts.horizon)));
    }
    let window = opts.horizon - burn_in;
    let samples = replicate(opts.replications, |r| {
        let mut run = Run::new(system, mix64(opts.seed, r));
        let mut inside = 0.0f64;
        let mut since = 0.0f64;
        let mut holds = pred.holds(&run.state);
        let end = run.drive(opts.horizon, opts.event_cap, |time, _, _, after| {
            if holds {
                inside += (time.max(burn_in) - since.max(burn_in)).max(0.0);
            }
            since = time;
            holds = pred.holds(after);
            Step::Continue
        })?;
        if end == EndReason::EventCap {
            return Err(cap_error(system, opts.horizon, opts.seed, r, opts.event_cap));
        }
        if holds {
            inside += (opts.horizon - since.max(burn_in)).max(0.0);
        }
        Ok(inside / window)
    })?;
    Ok(Estimate::from_samples(name, &samples, opts.replications, opts.seed))
}

fn cap_error(system: &System, horizon: f64, seed: u64, r: u64, cap: usize) -> SimError {
    match simulate_replication(system, horizon, seed, r, cap) {
        Err(e) => e,
        Ok(_) => unreachable!("replaying a capped replication reaches the cap again"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeToOptions {
    pub replications: usize,
    pub seed: u64,
    /// Replications that have not hit the label by this time are censored.
    pub cap_time: f64,
    pub event_cap: usize,
}

/// Mean first time a tangible state satisfying `label` is entered.
///
/// The mean is over uncensored replications. When every replication is
/// censored the value is `cap_time` with zero half-width and `censored`
/// equal to the replication count.
pub fn estimate_time_to(system: &System, label: &str, opts: &TimeToOptions) -> Result<Estimate, SimError> {
    let pred = label_predicate(system, label)?;
    estimate_time_to_of(system, label, pred, opts)
}

pub fn estimate_time_to_of(system: &System, name: &str, pred: &Predicate, opts: &TimeToOptions) -> Result<Estimate, SimError> {
    check_replications(opts.replications)?;
    if !(opts.cap_time > 0.0) {
        return Err(SimError::InvalidArg(format!("cap time must be positive, got {}", opts.cap_time)));
    }
    let hits = replicate(opts.replications, |r| {
        let mut run = Run::new(system, mix64(opts.seed, r));
        if !system.is_vanishing(&run.state) && pred.holds(&run.state) {
            return Ok(Some(0.0));
        }
        let mut hit = None;
        let end = run.drive(opts.cap_time, opts.event_cap, |time, _, _, after| {
            if pred.holds(after) && !system.is_vanishing(after) {
                hit = Some(time);
                Step::Stop
            } else {
                Step::Continue
            }
        })?;
        if end == EndReason::EventCap {
            return Err(cap_error(system, opts.cap_time, opts.seed, r, opts.event_cap));
        }
        Ok(hit)
    })?;
    let samples: Vec<f64> = hits.iter().flatten().copied().collect();
    let mut est = Estimate::from_samples(name, &samples, opts.replications, opts.seed);
    if samples.is_empty() {
        est.value = opts.cap_time;
    }
    Ok(est)
}
