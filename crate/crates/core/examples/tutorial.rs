//! Random walkers on the torus: set up, run, print the reporters.

use sosim::config::SimConfig;
use sosim::sim::Simulation;

fn main() -> sosim::error::Result<()> {
    let cfg = SimConfig::new("tutorial").with_seed(1).with_param("n", 500.0).with_param("turn_bound", 30.0);
    let mut sim = Simulation::new(&cfg)?;
    sim.setup()?;
    sim.run(100)?;
    let s = sim.state();
    println!("tick {} with {} agents, digest {}", s.tick, s.agent_count(), s.digest());
    for r in s.reporters() {
        println!("  {} = {}", r.name, s.report(&r.name).unwrap_or(f64::NAN));
    }
    Ok(())
}
