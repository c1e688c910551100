//! Writes the common-cause state graph as DOT, with and without vanishing
//! states. Pipe into `dot -Tsvg` to render.

use infradep::builtin::{Builtin, ModelParams};
use infradep::io::{export_dot, DotOptions};
use infradep::model::System;
use infradep::statespace::build_reachability_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hide = std::env::args().any(|a| a == "--hide-vanishing");
    let model = Builtin::CommonCause.build(&ModelParams::default())?;
    let system = System::new(&model).map_err(|r| format!("{:?}", r.issues))?;
    let graph = build_reachability_graph(&system)?;
    print!("{}", export_dot(&graph, &system, DotOptions { hide_vanishing: hide })?);
    Ok(())
}
