//! Runs the qualitative claim suite of every built-in model and prints one
//! verdict per claim, with a witness path for existential claims.

use infradep::builtin::{Builtin, ModelParams};
use infradep::checks::run_builtin_claims;
use infradep::statespace::BuildOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for b in Builtin::ALL {
        let report = run_builtin_claims(b, &ModelParams::default(), BuildOptions::default())?;
        println!("{b}");
        for c in &report.claims {
            println!("  {} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.id, c.description);
            if let Some(w) = c.witness.as_ref().filter(|_| c.expected) {
                for step in w {
                    println!("      {:<22} {}", step.via.as_deref().unwrap_or("start"), step.state);
                }
            }
        }
    }
    Ok(())
}
