//! Serializes each built-in model, parses it back and checks the result is
//! the same model. With `--write DIR` the texts are also written to
//! `DIR/<model_name>.gsts`.

use infradep::builtin::{Builtin, ModelParams};
use infradep::io::{parse_model, serialize_model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let out_dir = args.iter().position(|a| a == "--write").and_then(|i| args.get(i + 1));
    for b in Builtin::ALL {
        let model = b.build(&ModelParams::default())?;
        let text = serialize_model(&model);
        let back = parse_model(&text)?;
        let same = back == model && serialize_model(&back) == text;
        println!("{:<16} {:>5} bytes  round-trip {}", b.name(), text.len(), if same { "ok" } else { "MISMATCH" });
        if let Some(dir) = out_dir {
            std::fs::write(format!("{dir}/{}.gsts", b.model_name()), &text)?;
        }
    }
    Ok(())
}
