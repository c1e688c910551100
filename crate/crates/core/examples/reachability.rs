//! Builds the reachability graph and reduced CTMC of every built-in model
//! and prints state, edge and label counts.

use infradep::builtin::{Builtin, ModelParams};
use infradep::model::System;
use infradep::statespace::{build_reachability_graph, eliminate_vanishing};

fn main() {
    let params = ModelParams::default();
    for b in Builtin::ALL {
        let model = b.build(&params).expect("default parameters are valid");
        let system = System::new(&model).expect("built-in models validate");
        let graph = build_reachability_graph(&system).expect("bounded state space");
        let ctmc = eliminate_vanishing(&graph, &system).expect("no immediate cycles");
        println!(
            "{:<15} states={:<4} vanishing={:<3} edges={:<5} tangible={}",
            b.name(),
            graph.len(),
            graph.len() - graph.tangible_count(),
            graph.edges.len(),
            ctmc.len()
        );
        for (label, members) in &ctmc.labels {
            println!("    {label:<10} {}", members.len());
        }
    }
}
