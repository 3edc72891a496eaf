// Driving the command layer from code.
//
// Parses a config, runs `minimize`, then feeds the written points back into
// `diagnose`, exactly as the `repulse` binary would.

use repulse::cli::{cmd_diagnose, cmd_minimize, RunConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("repulse-batch-{}", std::process::id()));
    let mut config = RunConfig::parse(
        "manifold = torus\n\
         manifold.periods = 1.0\n\
         kernel.t = 0.05\n\
         n = 2\n\
         optimizer.restarts = 4\n",
    )
    .map_err(|e| e.to_string())?;
    config.output_dir = dir.clone();
    let minimized = cmd_minimize(&config).map_err(|e| e.to_string())?;
    println!("{}", minimized.summary);
    let diagnosed = cmd_diagnose(&config, &dir.join("points.csv")).map_err(|e| e.to_string())?;
    println!("{}", diagnosed.summary);
    for f in minimized.files.iter().chain(&diagnosed.files) {
        println!("  wrote {}", f.display());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() {
    run().expect("batch example failed");
}
