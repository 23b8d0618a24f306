//! Hop-count gradient fields and distributed averaging.
//!
//! The gradient uses a synchronous relaxation in which values may rise as
//! well as fall, so stale values left behind by a moved source or a broken
//! link are corrected without any extra restoring mechanism.

use std::collections::BTreeSet;

use rand::Rng;

use crate::agentset::{self, AgentSet};
use crate::error::{Result, SimError};
use crate::graph::{Graph, NodeId};
use crate::rng::{symmetric, SimRng};
use crate::selforg::{random_position, sensing_graph, NODE};
use crate::world::SimState;

/// Per-node hop distance to the nearest source; `f64::INFINITY` where no
/// source is reachable.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub values: Vec<f64>,
    pub sources: BTreeSet<NodeId>,
}

impl GradientField {
    /// Sources at 0, everything else at infinity.
    pub fn new(n: usize, sources: impl IntoIterator<Item = NodeId>) -> Self {
        let mut f = Self {
            values: vec![f64::INFINITY; n],
            sources: BTreeSet::new(),
        };
        f.set_sources(sources);
        f
    }

    /// Replaces the source set, keeping every other value as it was.
    pub fn set_sources(&mut self, sources: impl IntoIterator<Item = NodeId>) {
        self.sources = sources.into_iter().collect();
        for &s in &self.sources {
            self.values[s] = 0.0;
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest finite value, or 0 when none.
    pub fn max_finite(&self) -> f64 {
        self.values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }

    pub fn unreached(&self) -> usize {
        self.values.iter().filter(|v| v.is_infinite()).count()
    }
}

/// One synchronous relaxation: sources read 0, every other node reads one
/// more than its smallest neighbor (infinity when it has no neighbors).
pub fn gradient_step(field: &GradientField, graph: &Graph) -> GradientField {
    let values = (0..graph.n())
        .map(|v| {
            if field.sources.contains(&v) {
                0.0
            } else {
                graph
                    .neighbors(v)
                    .iter()
                    .map(|&u| field.values[u] + 1.0)
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    GradientField {
        values,
        sources: field.sources.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientRun {
    pub field: GradientField,
    /// Steps applied, including the final one that changed nothing.
    pub steps: usize,
    pub converged: bool,
}

/// Repeats [`gradient_step`] until a step changes nothing or `max_steps`
/// steps have run.
pub fn gradient_run(field: GradientField, graph: &Graph, max_steps: usize) -> GradientRun {
    let mut field = field;
    for step in 1..=max_steps.max(1) {
        let next = gradient_step(&field, graph);
        if next.values == field.values {
            return GradientRun {
                field: next,
                steps: step,
                converged: true,
            };
        }
        field = next;
    }
    GradientRun {
        field,
        steps: max_steps.max(1),
        converged: false,
    }
}

/// Largest absolute difference from exact hop distances (infinity-aware:
/// matching infinities count as zero error).
pub fn gradient_error(field: &GradientField, graph: &Graph) -> f64 {
    let exact = graph.bfs_from(field.sources.iter().copied());
    field
        .values
        .iter()
        .zip(exact)
        .map(|(&v, d)| match d {
            Some(d) => (v - d as f64).abs(),
            None if v.is_infinite() => 0.0,
            None => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

// ---- consensus ----------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusState {
    pub x: Vec<f64>,
    pub epsilon: f64,
}

/// Largest step weight that keeps the update a convex combination:
/// `1 / (1 + max degree)`.
pub fn max_degree_epsilon(graph: &Graph) -> f64 {
    1.0 / (1.0 + graph.max_degree() as f64)
}

/// `x'(v) = x(v) + epsilon * sum over neighbors u of (x(u) - x(v))`,
/// applied to all nodes at once.
pub fn consensus_step(cs: &ConsensusState, graph: &Graph) -> Result<ConsensusState> {
    if cs.x.len() != graph.n() {
        return Err(SimError::InvalidArgument(format!(
            "{} values for a {}-node graph",
            cs.x.len(),
            graph.n()
        )));
    }
    let limit = max_degree_epsilon(graph);
    if !(cs.epsilon > 0.0 && cs.epsilon <= limit) {
        return Err(SimError::InvalidArgument(format!(
            "epsilon {} outside (0, {}]",
            cs.epsilon, limit
        )));
    }
    let x = (0..graph.n())
        .map(|v| {
            let pull: f64 = graph.neighbors(v).iter().map(|&u| cs.x[u] - cs.x[v]).sum();
            cs.x[v] + cs.epsilon * pull
        })
        .collect();
    Ok(ConsensusState { x, epsilon: cs.epsilon })
}

/// `(max - min, population variance)` of `x`; zeros for an empty slice.
pub fn spread(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (0.0, 0.0);
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
    (hi - lo, var)
}

// ---- averaging among mobile agents ----------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityParams {
    pub n: usize,
    pub radius: f64,
    pub step: f64,
    pub turn_bound: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            n: 1000,
            radius: 1.5,
            step: 0.1,
            turn_bound: 45.0,
        }
    }
}

/// Scatters `n` nodes, each holding a `value` drawn uniformly from `[0, 100)`.
pub fn consensus_setup(state: &mut SimState, rng: &mut SimRng, params: &MobilityParams) -> Result<()> {
    state.breeds.declare(NODE, "nodes");
    state.create_agents(rng, NODE, params.n, |a, rng, g| {
        let p = random_position(rng, g);
        a.x = p.x;
        a.y = p.y;
        a.vars.insert("value".into(), rng.gen::<f64>() * 100.0);
        a.vars.insert("power".into(), rng.gen::<f64>());
    })?;
    Ok(())
}

/// Moves every node one random-walk step, rebuilds the interaction graph
/// from the new positions, and applies one averaging step with
/// `epsilon = 1 / (1 + max degree)`. Returns the range and variance of the
/// values afterwards.
pub fn consensus_mobility_tick(state: &mut SimState, rng: &mut SimRng, params: &MobilityParams) -> Result<(f64, f64)> {
    let nodes = agentset::all(state, Some(NODE));
    agentset::ask(state, &nodes, rng, |s, rng, id| {
        s.turn(id, symmetric(rng, params.turn_bound))?;
        s.move_forward(id, params.step)?;
        Ok(())
    })?;
    averaging_step(state, params.radius)
}

/// One averaging step over the current sensing graph of the nodes.
pub fn averaging_step(state: &mut SimState, radius: f64) -> Result<(f64, f64)> {
    let sg = sensing_graph(state, radius, Some(NODE))?;
    let x = sg
        .ids
        .iter()
        .map(|&id| state.agent(id)?.get("value"))
        .collect::<Result<Vec<f64>>>()?;
    let cs = ConsensusState {
        x,
        epsilon: max_degree_epsilon(&sg.graph),
    };
    let next = consensus_step(&cs, &sg.graph)?;
    for (&id, &v) in sg.ids.iter().zip(&next.x) {
        state.set_agent_var(id, "value", v)?;
    }
    Ok(spread(&next.x))
}

/// Current `value` of every node, in id order.
pub fn node_values(state: &SimState) -> Vec<f64> {
    let set: AgentSet = agentset::all(state, Some(NODE));
    set.iter()
        .filter_map(|id| state.agent(id).ok().and_then(|a| a.var("value")))
        .collect()
}
