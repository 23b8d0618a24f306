//! Running console commands against a live model.

use sosim::config::SimConfig;
use sosim::sim::Simulation;

fn main() -> sosim::error::Result<()> {
    let mut sim = Simulation::new(&SimConfig::new("flocking").with_seed(6))?;
    sim.setup()?;
    for text in [
        "count nodes",
        "ask nodes with [power < 0.5] [set color green]",
        "count nodes with [ color = green ]",
        "ask nodes [ fd 1 ] [",
    ] {
        match sim.command(text) {
            Ok(values) => println!("> {text}\n  {values:?}"),
            Err(e) => println!("> {text}\n  error: {e}"),
        }
    }
    Ok(())
}
