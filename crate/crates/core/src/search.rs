//! Unstructured overlay search: expanding-ring flooding and k random
//! walkers that periodically check back with the source.
//!
//! Cost model: every transmission of a query over an edge is one message,
//! duplicates included. A node forwards only the first copy it receives, to
//! every neighbor except the one it heard it from. Each ring of an
//! expanding-ring search is an independent flood with a fresh visited set.

use std::collections::BTreeSet;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fmt::g17;
use crate::graph::{Graph, NodeId};
use crate::rng::{self, SimRng};
use crate::world::{AgentId, Position, SimState};

const OVERLAY_ATTEMPTS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OverlayKind {
    /// 4-neighbor grid without wraparound. Node `r * cols + c` sits at row `r`, column `c`.
    Lattice { rows: usize, cols: usize },
    /// Erdős–Rényi G(n, p). With `require_connected`, draws are retried
    /// (each from its own substream) until the graph is connected.
    Random { n: usize, p: f64, require_connected: bool },
}

impl OverlayKind {
    /// Short description used in result tables (`20x20`, `0.05`).
    pub fn label(&self) -> String {
        match self {
            OverlayKind::Lattice { rows, cols } => format!("{rows}x{cols}"),
            OverlayKind::Random { p, .. } => g17(*p),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            OverlayKind::Lattice { rows, cols } => rows * cols,
            OverlayKind::Random { n, .. } => *n,
        }
    }
}

pub fn lattice(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::from_edges(rows * cols, edges)
}

pub fn gnp(n: usize, p: f64, rng: &mut SimRng) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Deterministic overlay for `(kind, seed)`.
pub fn build_overlay(kind: &OverlayKind, seed: u64) -> Result<Graph> {
    match *kind {
        OverlayKind::Lattice { rows, cols } => {
            if rows == 0 || cols == 0 {
                return Err(SimError::InvalidArgument(format!("lattice {rows}x{cols}")));
            }
            Ok(lattice(rows, cols))
        }
        OverlayKind::Random { n, p, require_connected } => {
            if n == 0 {
                return Err(SimError::InvalidArgument("random overlay needs n >= 1".into()));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
            }
            for attempt in 0..OVERLAY_ATTEMPTS {
                let mut rng = rng::stream(seed, "overlay", attempt);
                let g = gnp(n, p, &mut rng);
                if !require_connected || g.is_connected() {
                    return Ok(g);
                }
            }
            Err(SimError::Other(format!(
                "no connected G({n}, {p}) after {OVERLAY_ATTEMPTS} attempts"
            )))
        }
    }
}

// ---- flooding -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingOutcome {
    pub found: bool,
    pub messages: u64,
    /// Levels whose sends were performed.
    pub levels_expanded: usize,
    /// Level at which a target was first reached.
    pub hit_level: Option<usize>,
}

/// Synchronous flood from `source` that forwards for at most `ttl` levels.
/// Stops after the level on which a target is first reached.
pub fn flood_with_ttl(graph: &Graph, source: NodeId, targets: &BTreeSet<NodeId>, ttl: usize) -> RingOutcome {
    if targets.contains(&source) {
        return RingOutcome {
            found: true,
            messages: 0,
            levels_expanded: 0,
            hit_level: Some(0),
        };
    }
    let mut visited = vec![false; graph.n()];
    visited[source] = true;
    // (node, the neighbor it first heard the query from)
    let mut frontier: Vec<(NodeId, Option<NodeId>)> = vec![(source, None)];
    let mut messages = 0u64;
    let mut levels = 0;
    for level in 0..ttl {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &(v, parent) in &frontier {
            for &u in graph.neighbors(v) {
                if Some(u) == parent {
                    continue;
                }
                messages += 1;
                if !visited[u] {
                    visited[u] = true;
                    next.push((u, Some(v)));
                }
            }
        }
        levels = level + 1;
        if next.iter().any(|(u, _)| targets.contains(u)) {
            return RingOutcome {
                found: true,
                messages,
                levels_expanded: levels,
                hit_level: Some(level + 1),
            };
        }
        frontier = next;
    }
    RingOutcome {
        found: false,
        messages,
        levels_expanded: levels,
        hit_level: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryConfig {
    pub source: NodeId,
    pub targets: BTreeSet<NodeId>,
    /// TTL of each ring, strictly increasing.
    pub ttl_sequence: Vec<usize>,
}

impl QueryConfig {
    /// TTLs 1, 3, 5, ... for `max_rings` rings.
    pub fn odd_rings(source: NodeId, targets: impl IntoIterator<Item = NodeId>, max_rings: usize) -> Self {
        Self {
            source,
            targets: targets.into_iter().collect(),
            ttl_sequence: (0..max_rings).map(|i| 2 * i + 1).collect(),
        }
    }

    pub fn validate(&self, graph: &Graph) -> Result<()> {
        if self.source >= graph.n() {
            return Err(SimError::InvalidArgument(format!("source {} not in graph", self.source)));
        }
        if self.targets.is_empty() {
            return Err(SimError::InvalidArgument("no targets".into()));
        }
        if let Some(t) = self.targets.iter().find(|&&t| t >= graph.n()) {
            return Err(SimError::InvalidArgument(format!("target {t} not in graph")));
        }
        if self.ttl_sequence.first().is_some_and(|&t| t == 0)
            || self.ttl_sequence.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(SimError::InvalidArgument(
                "ttl sequence must be positive and strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WalkerTrace {
    pub hops: u64,
    pub checks: u64,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchOutcome {
    pub success: bool,
    /// Query forwards (flood sends or walker moves).
    pub messages: u64,
    pub check_messages: u64,
    pub hops_to_hit: Option<u64>,
    /// 1-based index of the ring that found a target.
    pub rings_used: Option<usize>,
    /// TTL of the last ring run.
    pub last_ttl: Option<usize>,
    pub ticks: u64,
    /// Messages of each ring, in order (expanding ring only).
    pub ring_messages: Vec<u64>,
    /// One trace per walker (k-walk only).
    pub walkers: Vec<WalkerTrace>,
}

/// Floods with each TTL in turn until a ring reaches a target.
pub fn expanding_ring_search(graph: &Graph, q: &QueryConfig) -> Result<SearchOutcome> {
    q.validate(graph)?;
    let mut out = SearchOutcome::default();
    if q.targets.contains(&q.source) {
        out.success = true;
        out.hops_to_hit = Some(0);
        return Ok(out);
    }
    for (i, &ttl) in q.ttl_sequence.iter().enumerate() {
        let ring = flood_with_ttl(graph, q.source, &q.targets, ttl);
        out.messages += ring.messages;
        out.ring_messages.push(ring.messages);
        out.ticks += ring.levels_expanded as u64;
        out.last_ttl = Some(ttl);
        if ring.found {
            out.success = true;
            out.rings_used = Some(i + 1);
            out.hops_to_hit = ring.hit_level.map(|l| l as u64);
            break;
        }
    }
    Ok(out)
}

// ---- k random walk ------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub k: usize,
    /// A walker checks back with the source after every `check_interval` hops.
    pub check_interval: u64,
    pub ttl_max: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            k: 16,
            check_interval: 4,
            ttl_max: 1000,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.check_interval == 0 || self.ttl_max == 0 {
            return Err(SimError::InvalidArgument(
                "k, check_interval and ttl_max must all be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// k walkers leave `source` together. Each tick every live walker hops to
/// a uniformly random neighbor, drawn from its own substream. Landing on a
/// target reports success to the source at once and ends that walker.
/// After every `check_interval`-th hop a walker sends one check message and
/// stops if the source already has a hit; it also stops at `ttl_max` hops.
pub fn k_random_walk(
    graph: &Graph,
    source: NodeId,
    targets: &BTreeSet<NodeId>,
    w: &WalkConfig,
    rng: &mut SimRng,
) -> Result<SearchOutcome> {
    w.validate()?;
    if source >= graph.n() {
        return Err(SimError::InvalidArgument(format!("source {source} not in graph")));
    }
    let mut out = SearchOutcome::default();
    if targets.contains(&source) {
        out.success = true;
        out.hops_to_hit = Some(0);
        return Ok(out);
    }
    if graph.degree(source) == 0 {
        return Ok(out);
    }
    let base: u64 = rng.gen();
    let mut streams: Vec<SimRng> = (0..w.k as u64).map(|i| rng::stream(base, "walker", i)).collect();
    let mut at = vec![source; w.k];
    let mut live = vec![true; w.k];
    let mut traces = vec![WalkerTrace::default(); w.k];
    let mut hit: Option<u64> = None;
    let mut tick = 0;
    while live.iter().any(|&l| l) {
        tick += 1;
        for i in 0..w.k {
            if !live[i] {
                continue;
            }
            let nbrs = graph.neighbors(at[i]);
            at[i] = nbrs[streams[i].gen_range(0..nbrs.len())];
            let t = &mut traces[i];
            t.hops += 1;
            out.messages += 1;
            let checked = t.hops % w.check_interval == 0;
            if checked {
                t.checks += 1;
                out.check_messages += 1;
            }
            if targets.contains(&at[i]) {
                t.found = true;
                hit.get_or_insert(t.hops);
                live[i] = false;
            } else if (checked && hit.is_some()) || t.hops >= w.ttl_max {
                live[i] = false;
            }
        }
    }
    out.success = hit.is_some();
    out.hops_to_hit = hit;
    out.ticks = tick;
    out.walkers = traces;
    Ok(out)
}

// ---- drawing overlays into the world -------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Grid,
    Circle,
    Random,
}

/// Creates one `breed` agent per graph node, positioned by `layout`, and one
/// link per edge. Returns the agent id of each node.
pub fn embed_overlay(
    state: &mut SimState,
    rng: &mut SimRng,
    graph: &Graph,
    layout: Layout,
    breed: &str,
) -> Result<Vec<AgentId>> {
    let n = graph.n();
    let g = *state.geometry();
    let positions: Vec<Position> = match layout {
        Layout::Grid => {
            let side = (n as f64).sqrt().ceil().max(1.0) as usize;
            let room = f64::from(g.width.min(g.height)) - 1.0;
            let spacing = if side > 1 { (room / (side - 1) as f64).min(1.0) } else { 1.0 };
            let offset = ((side - 1) as f64 * spacing / 2.0).floor();
            (0..n)
                .map(|i| {
                    let (r, c) = (i / side, i % side);
                    Position::new(c as f64 * spacing - offset, r as f64 * spacing - offset)
                })
                .collect()
        }
        Layout::Circle => {
            let radius = 0.4 * f64::from(g.width.min(g.height));
            (0..n)
                .map(|i| {
                    let h = 360.0 * i as f64 / n as f64;
                    let (dx, dy) = crate::world::heading_vector(h);
                    Position::new(radius * dx, radius * dy)
                })
                .collect()
        }
        Layout::Random => (0..n).map(|_| crate::selforg::random_position(rng, &g)).collect(),
    };
    let mut it = positions.into_iter();
    let ids = state.create_agents(rng, breed, n, |a, _, _| {
        let p = it.next().expect("one position per node");
        a.x = p.x;
        a.y = p.y;
    })?;
    for (a, b) in graph.edges() {
        state.create_link(ids[a], ids[b], 1.0)?;
    }
    Ok(ids)
}

// ---- result tables -------------------------------------------------------

/// One query in the search CSV format.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub seed: u64,
    pub n: usize,
    pub p_or_dims: String,
    pub k: Option<usize>,
    pub c: Option<u64>,
    pub ttl: Option<u64>,
    pub success: bool,
    pub messages: u64,
    pub checks: u64,
    pub hops: Option<u64>,
    pub rings: Option<usize>,
}

pub const QUERY_CSV_HEADER: &str = "seed,n,p_or_dims,k,c,ttl,success,messages,checks,hops,rings";

impl QueryRecord {
    pub fn from_ring(seed: u64, overlay: &OverlayKind, o: &SearchOutcome) -> Self {
        Self {
            seed,
            n: overlay.node_count(),
            p_or_dims: overlay.label(),
            k: None,
            c: None,
            ttl: o.last_ttl.map(|t| t as u64),
            success: o.success,
            messages: o.messages,
            checks: 0,
            hops: o.hops_to_hit,
            rings: o.rings_used,
        }
    }

    pub fn from_walk(seed: u64, overlay: &OverlayKind, w: &WalkConfig, o: &SearchOutcome) -> Self {
        Self {
            seed,
            n: overlay.node_count(),
            p_or_dims: overlay.label(),
            k: Some(w.k),
            c: Some(w.check_interval),
            ttl: Some(w.ttl_max),
            success: o.success,
            messages: o.messages,
            checks: o.check_messages,
            hops: o.hops_to_hit,
            rings: None,
        }
    }

    fn csv_line(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.n,
            self.p_or_dims,
            opt(&self.k),
            opt(&self.c),
            opt(&self.ttl),
            u8::from(self.success),
            self.messages,
            self.checks,
            opt(&self.hops),
            opt(&self.rings)
        )
    }
}

pub fn write_query_csv<W: Write>(mut out: W, records: &[QueryRecord]) -> std::io::Result<()> {
    writeln!(out, "{QUERY_CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_line())?;
    }
    out.flush()
}
