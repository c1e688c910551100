//! A model written in the text format: a substation with a protection
//! relay whose hidden failure turns a line fault into a blackout.

use infradep::io::parse_model;
use infradep::model::System;
use infradep::solvers::{mean_time_to_absorption, steady_state, SolverOptions};
use infradep::statespace::{build_reachability_graph, eliminate_vanishing};

const MODEL: &str = r#"
model substation {
  param fault = 0.05;
  param hidden = 0.01;
  param repair = 1.0;
  var relay : {ok, hidden_failure} init ok;
  var line : {up, tripped, blackout} init up;

  timed relay_fails rate hidden when relay == ok -> { relay := hidden_failure; };
  timed line_fault rate fault when line == up -> { line := tripped; };
  immediate escalate prio 1 weight 1.0 when relay == hidden_failure && line == tripped -> { line := blackout; };
  timed reclose rate repair when line == tripped -> { line := up; };
  timed restore rate 0.2 * repair when line == blackout -> { line := up; relay := ok; };

  label dark := line == blackout;
}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = parse_model(MODEL)?;
    let system = System::new(&model).map_err(|r| format!("{:?}", r.issues))?;
    let graph = build_reachability_graph(&system)?;
    let ctmc = eliminate_vanishing(&graph, &system)?;
    println!("{} states ({} vanishing), {} tangible", graph.len(), graph.len() - graph.tangible_count(), ctmc.len());
    let opts = SolverOptions::default();
    let pi = steady_state(&ctmc, &opts)?;
    let dark = ctmc.label("dark").unwrap();
    println!("long-run blackout probability {:.6}", pi.mass(dark));
    println!("mean time to first blackout {:.3}", mean_time_to_absorption(&ctmc, "dark", dark, &opts)?.value);
    Ok(())
}
