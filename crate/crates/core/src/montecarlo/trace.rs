//! Trace export and replay.
//!
//! CSV: the first line is the initial state with time `0` and an empty
//! transition field; each further line is one event,
//! `time,transition,var1=val1,...` with the state after firing.
//! JSON lines: one object per line, `{"time":..,"transition":..,"state":{..}}`,
//! the first again holding the initial state with a null transition.
//! Times use the shortest decimal that round-trips.

use std::fmt::Write as _;

use serde_json::{Map, Value as Json};
use thiserror::Error;

use super::Trace;
use crate::model::{StateVector, System};

fn state_json(system: &System, s: &StateVector) -> Json {
    let map: Map<String, Json> = system.assignments(s).into_iter().map(|(k, v)| (k, Json::String(v))).collect();
    Json::Object(map)
}

impl Trace {
    pub fn to_csv(&self, system: &System) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "0,,{}", system.format_state(&self.initial));
        for e in &self.events {
            let _ = writeln!(out, "{:?},{},{}", e.time, system.transition_name(e.transition), system.format_state(&e.state));
        }
        out
    }

    pub fn to_jsonl(&self, system: &System) -> String {
        let mut out = String::new();
        let first = serde_json::json!({"time": 0.0, "transition": null, "state": state_json(system, &self.initial)});
        out.push_str(&first.to_string());
        out.push('\n');
        for e in &self.events {
            let line = serde_json::json!({
                "time": e.time,
                "transition": system.transition_name(e.transition),
                "state": state_json(system, &e.state),
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("event {index}: time {time} precedes {previous}")]
    TimeOrder { index: usize, time: f64, previous: f64 },
    #[error("event {index}: {transition} is not enabled in the preceding state")]
    NotEnabled { index: usize, transition: String },
    #[error("event {index}: recorded state differs from firing {transition}")]
    StateMismatch { index: usize, transition: String },
    #[error("event {index}: immediate firing {transition} advanced time")]
    ImmediateDelay { index: usize, transition: String },
}

/// Checks that every step of `trace` follows from the previous state.
pub fn replay(system: &System, trace: &Trace) -> Result<(), ReplayError> {
    let mut state = trace.initial.clone();
    let mut previous = 0.0;
    for (index, e) in trace.events.iter().enumerate() {
        let name = system.transition_name(e.transition).to_string();
        if e.time < previous {
            return Err(ReplayError::TimeOrder { index, time: e.time, previous });
        }
        if system.is_immediate(e.transition) && e.time != previous {
            return Err(ReplayError::ImmediateDelay { index, transition: name });
        }
        if !system.enabled_transitions(&state).contains(&e.transition) {
            return Err(ReplayError::NotEnabled { index, transition: name });
        }
        match system.apply_transition(&state, e.transition) {
            Ok(next) if next == e.state => state = next,
            _ => return Err(ReplayError::StateMismatch { index, transition: name }),
        }
        previous = e.time;
    }
    Ok(())
}
