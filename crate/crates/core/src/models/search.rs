use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use super::{param, param_usize, Model, ParamSpec};
use crate::color;
use crate::error::{Result, SimError};
use crate::graph::{Graph, NodeId};
use crate::rng::SimRng;
use crate::search::{
    build_overlay, embed_overlay, expanding_ring_search, k_random_walk, Layout, OverlayKind, QueryConfig,
    QueryRecord, SearchOutcome, WalkConfig,
};
use crate::world::{AgentId, SimState};

pub const PEER: &str = "peer";

const REPORTERS: [&str; 6] = ["success", "messages", "checks", "hops", "rings", "ttl"];

/// One expanding-ring query (TTL 1, 3, 5, ...) per tick between a random
/// source and randomly placed replicas.
pub struct ExpandingRing;

/// One k-random-walk query per tick.
pub struct KWalk;

const RING: &[ParamSpec] = &[
    ParamSpec::int("overlay", 0.0, 1.0, 1.0, "0 = square lattice, 1 = random graph"),
    ParamSpec::int("side", 2.0, 200.0, 20.0, "lattice side length"),
    ParamSpec::int("n", 2.0, 20_000.0, 100.0, "random graph nodes"),
    ParamSpec::real("p", 0.0, 1.0, 0.05, "random graph edge probability"),
    ParamSpec::int("replicas", 1.0, 1000.0, 1.0, "targets per query"),
    ParamSpec::int("max_rings", 1.0, 1000.0, 16.0, "rings before giving up").live(),
];

const WALK: &[ParamSpec] = &[
    ParamSpec::int("overlay", 0.0, 1.0, 1.0, "0 = square lattice, 1 = random graph"),
    ParamSpec::int("side", 2.0, 200.0, 20.0, "lattice side length"),
    ParamSpec::int("n", 2.0, 20_000.0, 100.0, "random graph nodes"),
    ParamSpec::real("p", 0.0, 1.0, 0.05, "random graph edge probability"),
    ParamSpec::int("replicas", 1.0, 1000.0, 1.0, "targets per query"),
    ParamSpec::int("k", 1.0, 1000.0, 16.0, "walkers per query").live(),
    ParamSpec::int("check_interval", 1.0, 1000.0, 4.0, "hops between checks").live(),
    ParamSpec::int("ttl_max", 1.0, 1_000_000.0, 1000.0, "hop budget per walker").live(),
];

fn overlay_kind(state: &SimState) -> OverlayKind {
    if param(state, "overlay") == 0.0 {
        let side = param_usize(state, "side");
        OverlayKind::Lattice { rows: side, cols: side }
    } else {
        OverlayKind::Random {
            n: param_usize(state, "n"),
            p: param(state, "p"),
            require_connected: true,
        }
    }
}

/// Builds and draws the overlay. Returns the graph and the agent of each node.
fn overlay_setup(state: &mut SimState, rng: &mut SimRng) -> Result<(Graph, Vec<AgentId>)> {
    let kind = overlay_kind(state);
    let graph = build_overlay(&kind, state.seed())?;
    if param_usize(state, "replicas") >= graph.n() {
        return Err(SimError::InvalidParam {
            name: "replicas".into(),
            reason: format!("need fewer replicas than the {} nodes", graph.n()),
        });
    }
    state.breeds.declare(PEER, "peers");
    let layout = match kind {
        OverlayKind::Lattice { .. } => Layout::Grid,
        OverlayKind::Random { .. } => Layout::Circle,
    };
    let ids = embed_overlay(state, rng, &graph, layout, PEER)?;
    for &id in &ids {
        state.set_color(id, color::WHITE)?;
    }
    for name in REPORTERS {
        state.globals.insert(name.into(), f64::NAN);
        state.register_reporter(name, move |s| s.globals.get(name).copied().unwrap_or(f64::NAN))?;
    }
    Ok((graph, ids))
}

/// Random source and `replicas` distinct targets other than the source.
fn pick_query(rng: &mut SimRng, n: usize, replicas: usize) -> (NodeId, BTreeSet<NodeId>) {
    let source = rng.gen_range(0..n);
    let targets = sample(rng, n - 1, replicas)
        .into_iter()
        .map(|i| if i >= source { i + 1 } else { i })
        .collect();
    (source, targets)
}

fn publish(s: &mut SimState, ids: &[AgentId], source: NodeId, targets: &BTreeSet<NodeId>, o: &SearchOutcome, ttl: f64) -> Result<()> {
    for &id in ids {
        s.set_color(id, color::WHITE)?;
    }
    s.set_color(ids[source], color::YELLOW)?;
    for &t in targets {
        s.set_color(ids[t], color::RED)?;
    }
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    s.globals.insert("success".into(), f64::from(u8::from(o.success)));
    s.globals.insert("messages".into(), o.messages as f64);
    s.globals.insert("checks".into(), o.check_messages as f64);
    s.globals.insert("hops".into(), opt(o.hops_to_hit.map(|h| h as f64)));
    s.globals.insert("rings".into(), opt(o.rings_used.map(|r| r as f64)));
    s.globals.insert("ttl".into(), ttl);
    Ok(())
}

impl Model for ExpandingRing {
    fn name(&self) -> &'static str {
        "expanding-ring"
    }

    fn params(&self) -> &'static [ParamSpec] {
        RING
    }

    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()> {
        let (graph, ids) = overlay_setup(state, rng)?;
        let replicas = param_usize(state, "replicas");
        state.register_behavior("query", move |s, rng| {
            let (source, targets) = pick_query(rng, graph.n(), replicas);
            let q = QueryConfig::odd_rings(source, targets.iter().copied(), param_usize(s, "max_rings"));
            let o = expanding_ring_search(&graph, &q)?;
            let ttl = o.last_ttl.map_or(f64::NAN, |t| t as f64);
            publish(s, &ids, source, &targets, &o, ttl)
        })
    }
}

impl Model for KWalk {
    fn name(&self) -> &'static str {
        "k-walk"
    }

    fn params(&self) -> &'static [ParamSpec] {
        WALK
    }

    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()> {
        let (graph, ids) = overlay_setup(state, rng)?;
        let replicas = param_usize(state, "replicas");
        state.register_behavior("query", move |s, rng| {
            let (source, targets) = pick_query(rng, graph.n(), replicas);
            let w = walk_config(s);
            let o = k_random_walk(&graph, source, &targets, &w, rng)?;
            publish(s, &ids, source, &targets, &o, w.ttl_max as f64)
        })
    }
}

fn walk_config(s: &SimState) -> WalkConfig {
    WalkConfig {
        k: param_usize(s, "k"),
        check_interval: param(s, "check_interval") as u64,
        ttl_max: param(s, "ttl_max") as u64,
    }
}

/// Per-query rows for a search model run, rebuilt from its recorded
/// series. `None` for other models.
pub fn query_records(state: &SimState, model: &str) -> Option<Vec<QueryRecord>> {
    if model != "expanding-ring" && model != "k-walk" {
        return None;
    }
    let series = state.series();
    let col = |name: &str| series.names().iter().position(|n| n == name);
    let (success, messages, checks, hops, rings, ttl) = (
        col("success")?,
        col("messages")?,
        col("checks")?,
        col("hops")?,
        col("rings")?,
        col("ttl")?,
    );
    let kind = overlay_kind(state);
    let walk = (model == "k-walk").then(|| walk_config(state));
    let opt = |v: f64| (!v.is_nan()).then_some(v as u64);
    Some(
        series
            .rows()
            .iter()
            .map(|r| {
                let v = &r.values;
                QueryRecord {
                    seed: state.seed(),
                    n: kind.node_count(),
                    p_or_dims: kind.label(),
                    k: walk.as_ref().map(|w| w.k),
                    c: walk.as_ref().map(|w| w.check_interval),
                    ttl: opt(v[ttl]),
                    success: v[success] == 1.0,
                    messages: v[messages] as u64,
                    checks: v[checks] as u64,
                    hops: opt(v[hops]),
                    rings: opt(v[rings]).map(|r| r as usize),
                }
            })
            .collect(),
    )
}
