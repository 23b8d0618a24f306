//! Expanding-ring flooding against k random walkers on the same overlay.

use std::collections::BTreeSet;

use rand::SeedableRng;
use sosim::rng::SimRng;
use sosim::search::{build_overlay, expanding_ring_search, k_random_walk, OverlayKind, QueryConfig, WalkConfig};

fn main() -> sosim::error::Result<()> {
    let kind = OverlayKind::Random { n: 200, p: 0.03, require_connected: true };
    let g = build_overlay(&kind, 9)?;
    let (source, target) = (0, 150);

    let ring = expanding_ring_search(&g, &QueryConfig::odd_rings(source, [target], 32))?;
    println!("ring: found={} messages={} rings={:?}", ring.success, ring.messages, ring.ring_messages);

    let w = WalkConfig { k: 16, check_interval: 4, ttl_max: 1000 };
    let mut rng = SimRng::seed_from_u64(9);
    let walk = k_random_walk(&g, source, &BTreeSet::from([target]), &w, &mut rng)?;
    println!(
        "walk: found={} messages={} checks={} hops_to_hit={:?}",
        walk.success, walk.messages, walk.check_messages, walk.hops_to_hit
    );
    Ok(())
}
