//! Steady-state, transient and mean-time-to-blackout measures of the
//! accidental model, computed on the reduced chain.

use infradep::builtin::{accidental_model, ModelParams};
use infradep::model::System;
use infradep::solvers::{label_probability, mean_time_to_absorption, steady_state, transient, SolverOptions};
use infradep::statespace::{build_reachability_graph, eliminate_vanishing};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = accidental_model(&ModelParams::default())?;
    let system = System::new(&model).map_err(|r| format!("{:?}", r.issues))?;
    let ctmc = eliminate_vanishing(&build_reachability_graph(&system)?, &system)?;
    let opts = SolverOptions::default();

    let steady = steady_state(&ctmc, &opts)?;
    let at_10 = transient(&ctmc, 10.0, &opts)?;
    println!("{:<8} {:>12} {:>12}", "label", "p(t=10)", "steady");
    for (name, states) in &ctmc.labels {
        let p = label_probability(&at_10, name, states).value;
        let q = label_probability(&steady, name, states).value;
        println!("{name:<8} {p:>12.6} {q:>12.6}");
    }

    let elec = system.var_index("elec").unwrap();
    let lost: Vec<usize> = (0..ctmc.len()).filter(|&i| system.value_name(elec, ctmc.states[i].0[elec]) == "e_lost").collect();
    let mtta = mean_time_to_absorption(&ctmc, "time to e_lost", &lost, &opts)?;
    println!("mean time to e_lost: {:.4} ({} iterations)", mtta.value, mtta.metadata["iterations"]);
    Ok(())
}
