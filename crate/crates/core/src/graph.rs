//! Simple undirected graphs over dense node indices.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub type NodeId = usize;

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list. Self-loops and repeated edges are
    /// dropped; endpoints must be `< n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self { adjacency }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    /// Hop distance from the nearest of `sources`; `None` when unreachable.
    pub fn bfs_from(&self, sources: impl IntoIterator<Item = NodeId>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued nodes have a distance");
            for &u in &self.adjacency[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.bfs_from([0]).iter().all(Option::is_some)
    }

    /// Largest finite eccentricity over all nodes (0 for empty graphs).
    pub fn diameter(&self) -> usize {
        (0..self.n())
            .map(|v| self.bfs_from([v]).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}
