//! Replicated simulation of the accidental model next to the exact values.

use infradep::builtin::{Builtin, ModelParams};
use infradep::model::System;
use infradep::montecarlo::{estimate_occupancy, simulate_replication, OccupancyOptions, DEFAULT_EVENT_CAP};
use infradep::solvers::{label_probability, steady_state, SolverOptions};
use infradep::statespace::{build_reachability_graph, eliminate_vanishing};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = Builtin::Accidental.build(&ModelParams::default())?;
    let system = System::new(&model).map_err(|r| format!("{:?}", r.issues))?;
    let ctmc = eliminate_vanishing(&build_reachability_graph(&system)?, &system)?;
    let steady = steady_state(&ctmc, &SolverOptions::default())?;

    let opts = OccupancyOptions {
        horizon: 2000.0,
        burn_in: Some(200.0),
        replications: 200,
        seed: 1,
        event_cap: DEFAULT_EVENT_CAP,
    };
    for label in ["state1", "state2", "state7"] {
        let est = estimate_occupancy(&system, label, &opts)?;
        let exact = label_probability(&steady, label, ctmc.label(label).unwrap()).value;
        let verdict = if est.covers_3sigma(exact) { "covered" } else { "MISSED" };
        println!("{label}: {:.5} ± {:.5}  exact {exact:.5}  {verdict}", est.value, est.ci_halfwidth);
    }

    let trace = simulate_replication(&system, 50.0, 1, 0, DEFAULT_EVENT_CAP)?;
    print!("first replication, 50 time units:\n{}", trace.to_csv(&system));
    Ok(())
}
