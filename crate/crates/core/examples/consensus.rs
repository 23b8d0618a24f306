//! Average consensus among mobile nodes.

use sosim::config::SimConfig;
use sosim::sim::Simulation;

fn main() -> sosim::error::Result<()> {
    let cfg = SimConfig::new("consensus").with_seed(3).with_param("n", 300.0);
    let mut sim = Simulation::new(&cfg)?;
    sim.setup()?;
    for _ in 0..10 {
        sim.run(50)?;
        let s = sim.state();
        let row: Vec<String> = s.reporters().iter().map(|r| format!("{}={:.6}", r.name, s.report(&r.name).unwrap_or(f64::NAN))).collect();
        println!("tick {:4}  {}", s.tick, row.join("  "));
    }
    Ok(())
}
