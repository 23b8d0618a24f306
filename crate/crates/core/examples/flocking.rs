//! Nodes drifting until they come within range of a tower.

use sosim::config::SimConfig;
use sosim::sim::{run_headless, StopRule};

fn main() -> sosim::error::Result<()> {
    let cfg = SimConfig::new("flocking").with_seed(2);
    let sim = run_headless(&cfg, &StopRule::ticks(500))?;
    print!("{}", sim.state().series().to_csv().map_err(|e| sosim::error::SimError::Other(e.to_string()))?
        .lines().step_by(50).map(|l| format!("{l}\n")).collect::<String>());
    Ok(())
}
