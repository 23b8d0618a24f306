//! Lowest-id cluster election over a unit-disk graph.

use sosim::selforg::{cluster_election, cluster_setup, ClusterParams};
use sosim::world::{SimState, WorldConfig};

fn main() -> sosim::error::Result<()> {
    let params = ClusterParams { n_nodes: 60, sensing_radius: 5.0 };
    let mut state = SimState::new(WorldConfig::default().with_seed(5))?;
    state.with_root_rng(|s, rng| cluster_setup(s, rng, &params))?;
    let c = cluster_election(&mut state, &params)?;
    println!("{} heads after {} rounds", c.heads.len(), c.rounds);
    for h in &c.heads {
        let members = c.membership.values().filter(|&&m| m == *h).count();
        println!("  head {h}: {members} members");
    }
    Ok(())
}
