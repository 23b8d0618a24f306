//! Reference implementations that share no code with the library beyond
//! the `Graph` container used to hand instances over.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sosim::graph::Graph;

pub type Adj = Vec<Vec<usize>>;

pub fn adj_from_edges(n: usize, edges: &[(usize, usize)]) -> Adj {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

pub fn to_graph(adj: &Adj) -> Graph {
    let edges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(a, l)| l.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
        .collect();
    Graph::from_edges(adj.len(), edges)
}

/// Every labelled simple graph on `n` nodes, as adjacency lists.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Adj> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        adj_from_edges(n, &edges)
    })
}

/// Unit-disk graph on a `side` x `side` torus.
pub fn geometric(points: &[(f64, f64)], side: f64, r: f64) -> Adj {
    let torus = |d: f64| {
        let d = d.abs() % side;
        d.min(side - d)
    };
    let mut edges = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx = torus(points[i].0 - points[j].0);
            let dy = torus(points[i].1 - points[j].1);
            if (dx * dx + dy * dy).sqrt() <= r {
                edges.push((i, j));
            }
        }
    }
    adj_from_edges(points.len(), &edges)
}

pub fn random_points(seed: u64, n: usize, side: f64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect()
}

pub fn bfs(adj: &Adj, sources: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut q = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            q.push_back(s);
        }
    }
    while let Some(v) = q.pop_front() {
        let d = dist[v].unwrap();
        for &u in &adj[v] {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                q.push_back(u);
            }
        }
    }
    dist
}

pub fn is_connected(adj: &Adj) -> bool {
    adj.is_empty() || bfs(adj, &[0]).iter().all(Option::is_some)
}

/// Largest finite distance between any two nodes.
pub fn diameter(adj: &Adj) -> usize {
    (0..adj.len())
        .flat_map(|s| bfs(adj, &[s]))
        .flatten()
        .max()
        .unwrap_or(0)
}

/// Sequential lowest-id clustering: scan ids upward; an uncovered node
/// becomes a head and covers its neighbors. Each member joins its lowest
/// adjacent head.
pub fn greedy_clusters(adj: &Adj) -> (BTreeSet<usize>, Vec<Option<usize>>) {
    let n = adj.len();
    let mut covered = vec![false; n];
    let mut heads = BTreeSet::new();
    for v in 0..n {
        if !covered[v] {
            heads.insert(v);
            covered[v] = true;
            for &u in &adj[v] {
                covered[u] = true;
            }
        }
    }
    let membership = (0..n)
        .map(|v| {
            if heads.contains(&v) {
                None
            } else {
                adj[v].iter().copied().filter(|u| heads.contains(u)).min()
            }
        })
        .collect();
    (heads, membership)
}

pub struct Flood {
    pub found: bool,
    pub messages: u64,
    pub hit_hop: Option<usize>,
}

/// Message-level flood: a FIFO of `(from, to, hop)` sends. A node forwards
/// only on its first receipt, to everyone except the sender, while
/// `hop < ttl`. Every send is counted, duplicates included. Sends of hops
/// beyond the one on which a target first receives are discarded, since
/// the search stops at the end of that hop.
pub fn flood_enumerate(adj: &Adj, source: usize, targets: &BTreeSet<usize>, ttl: usize) -> Flood {
    if targets.contains(&source) {
        return Flood {
            found: true,
            messages: 0,
            hit_hop: Some(0),
        };
    }
    let mut seen = vec![false; adj.len()];
    seen[source] = true;
    let mut sends: Vec<usize> = Vec::new(); // hop of every send
    let mut q: VecDeque<(usize, usize, usize)> = VecDeque::new();
    if ttl > 0 {
        for &u in &adj[source] {
            q.push_back((source, u, 1));
        }
    }
    let mut hit: Option<usize> = None;
    while let Some((from, to, hop)) = q.pop_front() {
        sends.push(hop);
        if seen[to] {
            continue;
        }
        seen[to] = true;
        if targets.contains(&to) && hit.is_none() {
            hit = Some(hop);
        }
        if hop < ttl {
            for &u in &adj[to] {
                if u != from {
                    q.push_back((to, u, hop + 1));
                }
            }
        }
    }
    let limit = hit.unwrap_or(usize::MAX);
    Flood {
        found: hit.is_some(),
        messages: sends.iter().filter(|&&h| h <= limit).count() as u64,
        hit_hop: hit,
    }
}

/// Synchronous hop-count relaxation, written out directly.
pub fn relax(values: &[f64], adj: &Adj, sources: &BTreeSet<usize>) -> Vec<f64> {
    (0..adj.len())
        .map(|v| {
            if sources.contains(&v) {
                0.0
            } else {
                let mut best = f64::INFINITY;
                for &u in &adj[v] {
                    best = best.min(values[u] + 1.0);
                }
                best
            }
        })
        .collect()
}
