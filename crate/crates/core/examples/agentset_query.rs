//! Selecting agents by predicate and by distance, then recoloring them.

use rand::SeedableRng;
use sosim::agentset::{self, CmpOp, Predicate};
use sosim::color;
use sosim::rng::SimRng;
use sosim::world::{Position, SimState, WorldConfig};

fn main() -> sosim::error::Result<()> {
    let mut state = SimState::new(WorldConfig::default().with_seed(4))?;
    sosim::console::run(&mut state, "crt 200 [ setxy random-pxcor random-pycor set power random-float 1 ]")
        .map_err(|e| sosim::error::SimError::Other(e.to_string()))?;

    let weak = agentset::select_with(&state, Some("node"), &Predicate::var("power", CmpOp::Lt, 0.5))?;
    let near = agentset::in_radius(&state, Position { x: 0.0, y: 0.0 }, 6.0, Some("node"))?;
    println!("{} weak nodes, {} within 6 of the origin", weak.len(), near.len());

    let both = agentset::filter(&state, &near, &Predicate::var("power", CmpOp::Lt, 0.5))?;
    let mut rng = SimRng::seed_from_u64(0);
    agentset::ask(&mut state, &both, &mut rng, |s, _, id| s.set_color(id, color::GREEN))?;
    if let Ok(id) = agentset::min_one_of(&state, &both, |a| Ok(a.var("power").unwrap_or(1.0))) {
        println!("weakest nearby node: {id}");
    }
    println!("{} recolored green", both.len());
    Ok(())
}
