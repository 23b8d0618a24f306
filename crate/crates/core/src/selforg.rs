//! Self-organization protocols: mobile nodes settling around towers
//! (radius capture), and lowest-id clusterhead election over the sensing
//! graph.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::agentset::{self, AgentSet};
use crate::color;
use crate::error::{Result, SimError};
use crate::graph::{Graph, NodeId};
use crate::rng::{symmetric, SimRng};
use crate::world::{AgentId, AgentState, Geometry, Position, SimState};

pub const NODE: &str = "node";
pub const TOWER: &str = "tower";

/// Uniform continuous position inside the world.
pub fn random_position(rng: &mut SimRng, g: &Geometry) -> Position {
    let x = g.min_x() + rng.gen::<f64>() * f64::from(g.width);
    let y = g.min_y() + rng.gen::<f64>() * f64::from(g.height);
    g.wrap_point(Position::new(x.min(g.max_x()), y.min(g.max_y())))
}

// ---- sensing graph ------------------------------------------------------

/// Graph over a set of agents. Node `i` of `graph` is agent `ids[i]`, and
/// `ids` is ascending, so index order and id order agree.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentGraph {
    pub ids: Vec<AgentId>,
    pub graph: Graph,
}

impl AgentGraph {
    pub fn index_of(&self, id: AgentId) -> Option<NodeId> {
        self.ids.binary_search(&id).ok()
    }
}

/// Links every pair of `breed` agents within `radius` of each other.
pub fn sensing_graph(state: &SimState, radius: f64, breed: Option<&str>) -> Result<AgentGraph> {
    if !(radius > 0.0) {
        return Err(SimError::InvalidArgument(format!("sensing radius must be positive, got {radius}")));
    }
    let ids: Vec<AgentId> = state.agents_of(breed).map(|a| a.id).collect();
    let grid = state.spatial_grid(&ids, radius)?;
    let graph = Graph::from_edges(ids.len(), grid.pairs_within(radius));
    Ok(AgentGraph { ids, graph })
}

// ---- flocking -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct FlockingParams {
    pub n_nodes: usize,
    pub n_towers: usize,
    pub capture_radius: f64,
    pub step: f64,
    /// Largest turn per tick, degrees either way.
    pub turn_bound: f64,
}

impl Default for FlockingParams {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            n_towers: 5,
            capture_radius: 3.0,
            step: 0.1,
            turn_bound: 45.0,
        }
    }
}

impl FlockingParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: &str| {
            Err(SimError::InvalidParam {
                name: name.into(),
                reason: reason.into(),
            })
        };
        if self.n_towers < 1 {
            return bad("n_towers", "need at least one tower");
        }
        if self.n_towers > color::DISTINCT.len() {
            return bad(
                "n_towers",
                &format!("at most {} towers have distinct colors", color::DISTINCT.len()),
            );
        }
        if !(self.capture_radius > 0.0) {
            return bad("capture_radius", "must be positive");
        }
        if !(self.step > 0.0) {
            return bad("step", "must be positive");
        }
        if !(0.0..=180.0).contains(&self.turn_bound) {
            return bad("turn_bound", "must lie in [0, 180]");
        }
        Ok(())
    }
}

/// Places the towers, each with its own color, then the free nodes, all
/// at uniform random positions.
pub fn flocking_setup(state: &mut SimState, rng: &mut SimRng, params: &FlockingParams) -> Result<()> {
    params.validate()?;
    state.breeds.declare(TOWER, "towers");
    state.breeds.declare(NODE, "nodes");
    let mut palette = color::DISTINCT.iter();
    state.create_agents(rng, TOWER, params.n_towers, |a, rng, g| {
        let p = random_position(rng, g);
        a.x = p.x;
        a.y = p.y;
        a.heading = 0.0;
        a.color = *palette.next().expect("tower count validated");
        a.state = AgentState::Head;
    })?;
    state.create_agents(rng, NODE, params.n_nodes, |a, rng, g| {
        let p = random_position(rng, g);
        a.x = p.x;
        a.y = p.y;
        a.color = color::WHITE;
        a.state = AgentState::Free;
        a.vars.insert("power".into(), rng.gen::<f64>());
    })?;
    Ok(())
}

/// Towers as `(id, position, color)` in id order.
fn towers(state: &SimState) -> Vec<(AgentId, Position, f64)> {
    state
        .agents_of(Some(TOWER))
        .map(|t| (t.id, t.position(), t.color))
        .collect()
}

/// Nearest tower within `radius` of `p`; ties go to the lower tower id.
pub fn capturing_tower(
    geometry: &Geometry,
    towers: &[(AgentId, Position, f64)],
    p: Position,
    radius: f64,
) -> Option<(AgentId, f64)> {
    let mut best: Option<(f64, AgentId, f64)> = None;
    for &(id, tp, c) in towers {
        let d = geometry.distance(p, tp);
        if d <= radius && best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, id, c));
        }
    }
    best.map(|(_, id, c)| (id, c))
}

fn try_capture(state: &mut SimState, towers: &[(AgentId, Position, f64)], id: AgentId, radius: f64) -> Result<bool> {
    let geometry = *state.geometry();
    let agent = state.agent(id)?;
    if let Some((tower, c)) = capturing_tower(&geometry, towers, agent.position(), radius) {
        let a = state.agent_mut(id)?;
        a.state = AgentState::Locked;
        a.color = c;
        a.vars.insert("tower".into(), tower as f64);
        return Ok(true);
    }
    Ok(false)
}

pub fn free_count(state: &SimState) -> usize {
    state
        .agents_of(Some(NODE))
        .filter(|a| a.state == AgentState::Free)
        .count()
}

/// One tick of radius capture. Every free node that is already inside a
/// tower's radius locks in place; the others turn by a uniform draw in
/// `[-turn_bound, turn_bound]`, step forward, and lock if the move brought
/// them inside a radius. Locked nodes take the nearest tower's color and
/// never move again. Returns how many nodes are still free.
pub fn flocking_tick(state: &mut SimState, rng: &mut SimRng, params: &FlockingParams) -> Result<usize> {
    let towers = towers(state);
    let free = AgentSet::from_ids(
        state
            .agents_of(Some(NODE))
            .filter(|a| a.state == AgentState::Free)
            .map(|a| a.id),
    );
    let radius = params.capture_radius;
    agentset::ask(state, &free, rng, |s, rng, id| {
        if try_capture(s, &towers, id, radius)? {
            return Ok(());
        }
        s.turn(id, symmetric(rng, params.turn_bound))?;
        s.move_forward(id, params.step)?;
        try_capture(s, &towers, id, radius)?;
        Ok(())
    })?;
    Ok(free_count(state))
}

// ---- clustering ---------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub n_nodes: usize,
    pub sensing_radius: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            sensing_radius: 3.0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 1 {
            return Err(SimError::InvalidParam {
                name: "n_nodes".into(),
                reason: "need at least one node".into(),
            });
        }
        if !(self.sensing_radius > 0.0) {
            return Err(SimError::InvalidParam {
                name: "sensing_radius".into(),
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Result of an election, in agent ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Clustering {
    pub heads: BTreeSet<AgentId>,
    /// Member id to the id of the head it joined.
    pub membership: BTreeMap<AgentId, AgentId>,
    pub rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Undecided,
    Head,
    Member,
}

/// Synchronous lowest-id election on a graph, one round at a time.
///
/// In each round every undecided node whose index is below all of its
/// undecided neighbors declares itself head, and every undecided neighbor
/// of a new head becomes a member. A member always belongs to the lowest
/// head it is adjacent to, including heads that declare in later rounds.
#[derive(Debug, Clone)]
pub struct Election<'g> {
    graph: &'g Graph,
    roles: Vec<Role>,
    rounds: usize,
}

impl<'g> Election<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        Self {
            graph,
            roles: vec![Role::Undecided; graph.n()],
            rounds: 0,
        }
    }

    /// Continues an election from saved roles.
    pub fn resume(graph: &'g Graph, roles: Vec<Role>, rounds: usize) -> Self {
        assert_eq!(roles.len(), graph.n(), "one role per node");
        Self { graph, roles, rounds }
    }

    pub fn is_done(&self) -> bool {
        self.roles.iter().all(|r| *r != Role::Undecided)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn undecided(&self) -> usize {
        self.roles.iter().filter(|r| **r == Role::Undecided).count()
    }

    /// Runs one round. Returns the heads declared in it.
    pub fn round(&mut self) -> Vec<NodeId> {
        if self.is_done() {
            return Vec::new();
        }
        let g = self.graph;
        let new_heads: Vec<NodeId> = (0..g.n())
            .filter(|&v| {
                self.roles[v] == Role::Undecided
                    && g
                        .neighbors(v)
                        .iter()
                        .all(|&u| self.roles[u] != Role::Undecided || u > v)
            })
            .collect();
        for &h in &new_heads {
            self.roles[h] = Role::Head;
        }
        for &h in &new_heads {
            for &u in g.neighbors(h) {
                if self.roles[u] == Role::Undecided {
                    self.roles[u] = Role::Member;
                }
            }
        }
        self.rounds += 1;
        new_heads
    }

    pub fn run(&mut self) {
        while !self.is_done() {
            self.round();
        }
    }

    /// Head each decided member belongs to (`None` for heads and undecided).
    pub fn affiliation(&self) -> Vec<Option<NodeId>> {
        (0..self.graph.n())
            .map(|v| {
                if self.roles[v] != Role::Member {
                    return None;
                }
                self.graph
                    .neighbors(v)
                    .iter()
                    .copied()
                    .find(|&u| self.roles[u] == Role::Head)
            })
            .collect()
    }
}

/// Runs the election on `graph` to completion and maps the result onto
/// `ids` (index `i` is agent `ids[i]`).
pub fn elect(graph: &Graph, ids: &[AgentId]) -> Clustering {
    let mut e = Election::new(graph);
    e.run();
    let mut out = Clustering {
        rounds: e.rounds(),
        ..Clustering::default()
    };
    let affiliation = e.affiliation();
    for (v, role) in e.roles().iter().enumerate() {
        match role {
            Role::Head => {
                out.heads.insert(ids[v]);
            }
            Role::Member => {
                let h = affiliation[v].expect("members are adjacent to a head");
                out.membership.insert(ids[v], ids[h]);
            }
            Role::Undecided => unreachable!("election ran to completion"),
        }
    }
    out
}

/// Places `n_nodes` undecided nodes uniformly at random.
pub fn cluster_setup(state: &mut SimState, rng: &mut SimRng, params: &ClusterParams) -> Result<()> {
    params.validate()?;
    state.breeds.declare(NODE, "nodes");
    state.create_agents(rng, NODE, params.n_nodes, |a, rng, g| {
        let p = random_position(rng, g);
        a.x = p.x;
        a.y = p.y;
        a.color = color::GRAY;
        a.state = AgentState::Undecided;
        a.vars.insert("power".into(), rng.gen::<f64>());
    })?;
    Ok(())
}

/// Writes roles and colors into the world: each head gets its own hue and
/// members wear their head's.
pub fn paint_clusters(state: &mut SimState, clustering: &Clustering) -> Result<()> {
    let mut hue = BTreeMap::new();
    for (i, &h) in clustering.heads.iter().enumerate() {
        let c = color::DISTINCT[i % color::DISTINCT.len()];
        hue.insert(h, c);
        let a = state.agent_mut(h)?;
        a.state = AgentState::Head;
        a.color = c;
        a.vars.insert("head".into(), h as f64);
    }
    for (&m, &h) in &clustering.membership {
        let a = state.agent_mut(m)?;
        a.state = AgentState::Member;
        a.color = hue[&h];
        a.vars.insert("head".into(), h as f64);
    }
    Ok(())
}

/// Builds the sensing graph over the nodes, elects heads, and paints the
/// result into the world.
pub fn cluster_election(state: &mut SimState, params: &ClusterParams) -> Result<Clustering> {
    params.validate()?;
    let sg = sensing_graph(state, params.sensing_radius, Some(NODE))?;
    let clustering = elect(&sg.graph, &sg.ids);
    paint_clusters(state, &clustering)?;
    Ok(clustering)
}
