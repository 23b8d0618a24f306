use super::{param, param_usize, Model, ParamSpec};
use crate::error::Result;
use crate::rng::SimRng;
use crate::selforg::{
    self as so, cluster_setup, flocking_setup, free_count, paint_clusters, sensing_graph, ClusterParams, Election,
    FlockingParams, Role,
};
use crate::world::{AgentState, SimState};

/// Free nodes random-walk until they come within range of a tower, then
/// lock on and take its color.
pub struct Flocking;

const FLOCKING: &[ParamSpec] = &[
    ParamSpec::int("n_nodes", 0.0, 100_000.0, 100.0, "mobile nodes"),
    ParamSpec::int("n_towers", 1.0, 13.0, 5.0, "transmission towers"),
    ParamSpec::real("capture_radius", 0.1, 50.0, 3.0, "distance at which a tower captures a node"),
    ParamSpec::real("step", 0.0, 10.0, 0.1, "distance moved per tick").live(),
    ParamSpec::real("turn_bound", 0.0, 180.0, 45.0, "largest random turn per tick, degrees").live(),
];

const ASSEMBLY: &str = "assembly_ticks";

impl Model for Flocking {
    fn name(&self) -> &'static str {
        "flocking"
    }

    fn params(&self) -> &'static [ParamSpec] {
        FLOCKING
    }

    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()> {
        let base = FlockingParams {
            n_nodes: param_usize(state, "n_nodes"),
            n_towers: param_usize(state, "n_towers"),
            capture_radius: param(state, "capture_radius"),
            step: param(state, "step"),
            turn_bound: param(state, "turn_bound"),
        };
        flocking_setup(state, rng, &base)?;
        if base.n_nodes == 0 {
            state.globals.insert(ASSEMBLY.into(), 0.0);
        }
        state.register_behavior("flock", move |s, rng| {
            let params = FlockingParams {
                step: param(s, "step"),
                turn_bound: param(s, "turn_bound"),
                ..base.clone()
            };
            let free = so::flocking_tick(s, rng, &params)?;
            if free == 0 && !s.globals.contains_key(ASSEMBLY) {
                let done_at = (s.tick + 1) as f64;
                s.globals.insert(ASSEMBLY.into(), done_at);
            }
            Ok(())
        })?;
        state.register_reporter("free_count", |s| free_count(s) as f64)?;
        state.register_reporter("locked_count", |s| {
            s.agents_of(Some(so::NODE)).filter(|a| a.state == AgentState::Locked).count() as f64
        })?;
        state.register_reporter(ASSEMBLY, |s| s.globals.get(ASSEMBLY).copied().unwrap_or(f64::NAN))?;
        Ok(())
    }
}

/// Lowest-id clusterhead election over the static sensing graph, one
/// synchronous round per tick.
pub struct Clustering;

const CLUSTERING: &[ParamSpec] = &[
    ParamSpec::int("n_nodes", 0.0, 100_000.0, 100.0, "sensor nodes"),
    ParamSpec::real("sensing_radius", 0.1, 50.0, 3.0, "link range"),
];

impl Model for Clustering {
    fn name(&self) -> &'static str {
        "clustering"
    }

    fn params(&self) -> &'static [ParamSpec] {
        CLUSTERING
    }

    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()> {
        let params = ClusterParams {
            n_nodes: param_usize(state, "n_nodes"),
            sensing_radius: param(state, "sensing_radius"),
        };
        cluster_setup(state, rng, &params)?;
        let sg = sensing_graph(state, params.sensing_radius, Some(so::NODE))?;
        let mut roles = vec![Role::Undecided; sg.graph.n()];
        let mut rounds = 0;
        state.globals.insert("rounds".into(), 0.0);
        state.register_behavior("elect", move |s, _| {
            let mut e = Election::resume(&sg.graph, std::mem::take(&mut roles), rounds);
            if !e.is_done() {
                e.round();
                let mut partial = so::Clustering {
                    rounds: e.rounds(),
                    ..Default::default()
                };
                let affiliation = e.affiliation();
                for (v, role) in e.roles().iter().enumerate() {
                    match role {
                        Role::Head => {
                            partial.heads.insert(sg.ids[v]);
                        }
                        Role::Member => {
                            if let Some(h) = affiliation[v] {
                                partial.membership.insert(sg.ids[v], sg.ids[h]);
                            }
                        }
                        Role::Undecided => {}
                    }
                }
                paint_clusters(s, &partial)?;
                s.globals.insert("rounds".into(), e.rounds() as f64);
            }
            rounds = e.rounds();
            roles = e.roles().to_vec();
            Ok(())
        })?;
        state.register_reporter("n_heads", |s| count_state(s, AgentState::Head))?;
        state.register_reporter("rounds", |s| s.globals.get("rounds").copied().unwrap_or(0.0))?;
        state.register_reporter("undecided", |s| count_state(s, AgentState::Undecided))?;
        Ok(())
    }
}

fn count_state(s: &SimState, st: AgentState) -> f64 {
    s.agents_of(Some(so::NODE)).filter(|a| a.state == st).count() as f64
}
