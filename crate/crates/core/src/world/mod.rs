//! The simulated world: patches, agents, links, the tick counter and the
//! seeded random state, plus the setup/step execution cycle.

mod agent;
mod geometry;
mod spatial;

pub use agent::{Agent, AgentId, AgentState, Link, Patch, AGENT_BUILTINS};
pub use geometry::{heading_vector, normalize_heading, Geometry, Position};
pub use spatial::SpatialGrid;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::color;
use crate::error::{Result, SimError};
use crate::fmt::g17;
use crate::metrics::{Reporter, Series};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub width: u32,
    pub height: u32,
    pub wrap: bool,
    pub seed: u64,
    pub max_ticks: Option<u64>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            width: 33,
            height: 33,
            wrap: true,
            seed: 0,
            max_ticks: None,
        }
    }
}

impl WorldConfig {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_wrap(mut self, wrap: bool) -> Self {
        self.wrap = wrap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(SimError::Config(format!(
                "world dimensions must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        if self.width > 100_000 || self.height > 100_000 || u64::from(self.width) * u64::from(self.height) > 50_000_000 {
            return Err(SimError::Config("world too large".into()));
        }
        Ok(())
    }
}

/// Per-tick protocol callback. It receives the substream for its
/// `(name, tick)` pair.
pub type BehaviorFn = Box<dyn FnMut(&mut SimState, &mut SimRng) -> Result<()> + Send>;

pub struct Behavior {
    pub name: String,
    pub run: BehaviorFn,
}

/// What one call to [`SimState::step`] did.
#[derive(Debug, Clone)]
pub struct TickReport {
    pub tick: u64,
    pub timings: Vec<(String, Duration)>,
    pub counters: BTreeMap<String, f64>,
}

/// Singular/plural breed names, e.g. `node`/`nodes`.
#[derive(Debug, Clone, Default)]
pub struct Breeds {
    entries: Vec<(String, String)>,
    closed: bool,
}

impl Breeds {
    pub fn declare(&mut self, singular: &str, plural: &str) {
        if !self.entries.iter().any(|(s, _)| s == singular) {
            self.entries.push((singular.to_string(), plural.to_string()));
        }
    }

    /// Rejects creation of undeclared breeds from now on.
    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn contains(&self, singular: &str) -> bool {
        self.entries.iter().any(|(s, _)| s == singular)
    }

    pub fn singular_of(&self, plural: &str) -> Option<&str> {
        self.entries.iter().find(|(_, p)| p == plural).map(|(s, _)| s.as_str())
    }

    pub fn plural_of(&self, singular: &str) -> Option<&str> {
        self.entries.iter().find(|(s, _)| s == singular).map(|(_, p)| p.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(s, p)| (s.as_str(), p.as_str()))
    }
}

/// The whole world.
pub struct SimState {
    config: WorldConfig,
    geometry: Geometry,
    pub tick: u64,
    agents: Vec<Option<Agent>>,
    live: usize,
    patches: Vec<Patch>,
    links: BTreeMap<(AgentId, AgentId), Link>,
    adjacency: BTreeMap<AgentId, BTreeSet<AgentId>>,
    pub globals: BTreeMap<String, f64>,
    /// Model parameters. Survive `clear_all`.
    pub params: BTreeMap<String, f64>,
    /// Root generator used by setup code and the observer.
    pub rng: SimRng,
    pub breeds: Breeds,
    behaviors: Vec<Behavior>,
    reporters: Vec<Reporter>,
    series: Series,
    patch_clock: u64,
    console_seq: u64,
}

impl std::fmt::Debug for SimState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimState")
            .field("config", &self.config)
            .field("tick", &self.tick)
            .field("agents", &self.live)
            .field("links", &self.links.len())
            .finish_non_exhaustive()
    }
}

impl SimState {
    /// `create_world`.
    pub fn new(config: WorldConfig) -> Result<Self> {
        config.validate()?;
        let geometry = Geometry::new(config.width, config.height, config.wrap);
        let mut state = Self {
            rng: rng::root_rng(config.seed),
            config,
            geometry,
            tick: 0,
            agents: Vec::new(),
            live: 0,
            patches: Vec::new(),
            links: BTreeMap::new(),
            adjacency: BTreeMap::new(),
            globals: BTreeMap::new(),
            params: BTreeMap::new(),
            breeds: Breeds::default(),
            behaviors: Vec::new(),
            reporters: Vec::new(),
            series: Series::default(),
            patch_clock: 0,
            console_seq: 0,
        };
        state.reset_patches();
        Ok(state)
    }

    fn reset_patches(&mut self) {
        let g = self.geometry;
        self.patch_clock += 1;
        let clock = self.patch_clock;
        self.patches = (g.min_pycor..=g.max_pycor)
            .flat_map(|py| {
                (g.min_pxcor..=g.max_pxcor).map(move |px| Patch {
                    pxcor: px,
                    pycor: py,
                    pcolor: color::BLACK,
                    vars: BTreeMap::new(),
                    version: clock,
                })
            })
            .collect();
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// Changes the seed used by the next `clear_all`.
    pub fn set_seed(&mut self, seed: u64) {
        self.config.seed = seed;
    }

    /// Removes agents, links, globals and recorded series, resets patches and
    /// the tick counter, and reseeds the root generator from the configured
    /// seed. Behaviors, reporters, breeds and parameters are kept.
    pub fn clear_all(&mut self) {
        self.agents.clear();
        self.live = 0;
        self.links.clear();
        self.adjacency.clear();
        self.globals.clear();
        self.series.clear_rows();
        self.tick = 0;
        self.console_seq = 0;
        self.rng = rng::root_rng(self.config.seed);
        self.reset_patches();
    }

    /// Runs `f` with the root generator temporarily moved out of the state.
    pub fn with_root_rng<T>(&mut self, f: impl FnOnce(&mut SimState, &mut SimRng) -> T) -> T {
        let mut rng = std::mem::replace(&mut self.rng, SimRng::seed_from_u64(0));
        let out = f(self, &mut rng);
        self.rng = rng;
        out
    }

    /// Substream for the `seq`-th console command of this run.
    pub fn console_rng(&mut self) -> SimRng {
        let seq = self.console_seq;
        self.console_seq += 1;
        rng::stream(self.config.seed, "console", (self.tick << 20) ^ seq)
    }

    // ---- agents -------------------------------------------------------

    pub fn agent(&self, id: AgentId) -> Result<&Agent> {
        self.agents
            .get(id as usize)
            .and_then(Option::as_ref)
            .ok_or(SimError::MissingAgent(id))
    }

    pub fn agent_mut(&mut self, id: AgentId) -> Result<&mut Agent> {
        self.agents
            .get_mut(id as usize)
            .and_then(Option::as_mut)
            .ok_or(SimError::MissingAgent(id))
    }

    pub fn is_alive(&self, id: AgentId) -> bool {
        matches!(self.agents.get(id as usize), Some(Some(_)))
    }

    /// Live agents in id order.
    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.agents.iter().flatten()
    }

    pub fn agents_of<'a>(&'a self, breed: Option<&'a str>) -> impl Iterator<Item = &'a Agent> + 'a {
        self.agents().filter(move |a| breed.is_none_or(|b| a.breed == b))
    }

    pub fn agent_count(&self) -> usize {
        self.live
    }

    /// Id the next created agent will get.
    pub fn next_id(&self) -> AgentId {
        self.agents.len() as AgentId
    }

    /// Creates `count` agents of `breed`. Each starts at the origin with a
    /// heading drawn from `rng`; `init` then runs on each in creation order.
    pub fn create_agents(
        &mut self,
        rng: &mut SimRng,
        breed: &str,
        count: usize,
        mut init: impl FnMut(&mut Agent, &mut SimRng, &Geometry),
    ) -> Result<Vec<AgentId>> {
        if !self.breeds.contains(breed) {
            if self.breeds.is_closed() {
                return Err(SimError::UnknownBreed(breed.to_string()));
            }
            let plural = format!("{breed}s");
            self.breeds.declare(breed, &plural);
        }
        let geometry = self.geometry;
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            let id = self.next_id();
            let mut agent = Agent::new(id, breed);
            let origin = geometry.wrap_point(Position::new(0.0, 0.0));
            agent.x = origin.x;
            agent.y = origin.y;
            agent.heading = rng.gen_range(0.0..360.0);
            agent.color = color::WHITE;
            init(&mut agent, rng, &geometry);
            Self::sanitize(&geometry, &mut agent);
            self.agents.push(Some(agent));
            self.live += 1;
            ids.push(id);
        }
        Ok(ids)
    }

    fn sanitize(geometry: &Geometry, agent: &mut Agent) {
        let p = geometry.wrap_point(agent.position());
        agent.x = p.x.clamp(geometry.min_x(), geometry.max_x());
        agent.y = p.y.clamp(geometry.min_y(), geometry.max_y());
        agent.heading = normalize_heading(agent.heading);
        agent.color = color::wrap(agent.color);
    }

    /// Removes an agent and its links. Its id is never reused.
    pub fn kill(&mut self, id: AgentId) -> Result<()> {
        let slot = self.agents.get_mut(id as usize).ok_or(SimError::MissingAgent(id))?;
        if slot.take().is_none() {
            return Err(SimError::MissingAgent(id));
        }
        self.live -= 1;
        if let Some(nbrs) = self.adjacency.remove(&id) {
            for n in nbrs {
                self.links.remove(&(id.min(n), id.max(n)));
                if let Some(s) = self.adjacency.get_mut(&n) {
                    s.remove(&id);
                }
            }
        }
        Ok(())
    }

    pub fn move_forward(&mut self, id: AgentId, step: f64) -> Result<Position> {
        let geometry = self.geometry;
        let agent = self.agent_mut(id)?;
        let (p, heading) = geometry.advance(agent.position(), agent.heading, step);
        agent.x = p.x;
        agent.y = p.y;
        agent.heading = heading;
        Ok(p)
    }

    pub fn turn(&mut self, id: AgentId, delta: f64) -> Result<f64> {
        let agent = self.agent_mut(id)?;
        agent.heading = normalize_heading(agent.heading + delta);
        Ok(agent.heading)
    }

    pub fn set_xy(&mut self, id: AgentId, x: f64, y: f64) -> Result<Position> {
        let geometry = self.geometry;
        if !x.is_finite() || !y.is_finite() {
            return Err(SimError::InvalidArgument(format!("setxy {x} {y}")));
        }
        let p = geometry.wrap_point(Position::new(x, y));
        if !geometry.contains(p) {
            return Err(SimError::InvalidArgument(format!(
                "position ({x}, {y}) is outside the world"
            )));
        }
        let agent = self.agent_mut(id)?;
        agent.x = p.x;
        agent.y = p.y;
        Ok(p)
    }

    pub fn set_color(&mut self, id: AgentId, c: f64) -> Result<()> {
        self.agent_mut(id)?.color = color::wrap(c);
        Ok(())
    }

    /// Writes a built-in field or custom variable, normalizing built-ins.
    pub fn set_agent_var(&mut self, id: AgentId, name: &str, value: f64) -> Result<()> {
        match name {
            "who" => Err(SimError::InvalidArgument("who is read-only".into())),
            "xcor" => {
                let y = self.agent(id)?.y;
                self.set_xy(id, value, y).map(|_| ())
            }
            "ycor" => {
                let x = self.agent(id)?.x;
                self.set_xy(id, x, value).map(|_| ())
            }
            "heading" => {
                self.agent_mut(id)?.heading = normalize_heading(value);
                Ok(())
            }
            "color" => self.set_color(id, value),
            _ => {
                self.agent_mut(id)?.vars.insert(name.to_string(), value);
                Ok(())
            }
        }
    }

    pub fn toroidal_distance(&self, p: Position, q: Position) -> f64 {
        self.geometry.distance(p, q)
    }

    /// Bucket grid over the positions of `ids`, indexed like `ids`.
    pub fn spatial_grid(&self, ids: &[AgentId], cell: f64) -> Result<SpatialGrid> {
        let pts = ids
            .iter()
            .map(|&id| self.agent(id).map(Agent::position))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpatialGrid::build(self.geometry, pts, cell))
    }

    // ---- patches ------------------------------------------------------

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patch(&self, pxcor: i64, pycor: i64) -> Option<&Patch> {
        self.geometry.patch_index(pxcor, pycor).map(|i| &self.patches[i])
    }

    pub fn set_pcolor(&mut self, pxcor: i64, pycor: i64, c: f64) -> Result<()> {
        let i = self
            .geometry
            .patch_index(pxcor, pycor)
            .ok_or_else(|| SimError::InvalidArgument(format!("no patch at ({pxcor}, {pycor})")))?;
        self.patch_clock += 1;
        let p = &mut self.patches[i];
        p.pcolor = color::wrap(c);
        p.version = self.patch_clock;
        Ok(())
    }

    /// Recolors every patch with `f(pxcor, pycor)`.
    pub fn recolor_patches(&mut self, mut f: impl FnMut(i64, i64) -> Result<f64>) -> Result<()> {
        self.patch_clock += 1;
        let clock = self.patch_clock;
        for p in &mut self.patches {
            p.pcolor = color::wrap(f(p.pxcor, p.pycor)?);
            p.version = clock;
        }
        Ok(())
    }

    pub fn patch_clock(&self) -> u64 {
        self.patch_clock
    }

    // ---- links --------------------------------------------------------

    pub fn create_link(&mut self, a: AgentId, b: AgentId, weight: f64) -> Result<()> {
        if a == b {
            return Err(SimError::InvalidArgument(format!("link from {a} to itself")));
        }
        if !(weight >= 0.0) {
            return Err(SimError::InvalidArgument(format!("link weight {weight}")));
        }
        self.agent(a)?;
        self.agent(b)?;
        let key = (a.min(b), a.max(b));
        self.links.entry(key).or_insert(Link { a: key.0, b: key.1, weight });
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
        Ok(())
    }

    pub fn links(&self) -> impl Iterator<Item = &Link> {
        self.links.values()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn linked(&self, id: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        self.adjacency.get(&id).into_iter().flatten().copied()
    }

    pub fn clear_links(&mut self) {
        self.links.clear();
        self.adjacency.clear();
    }

    // ---- behaviors, reporters, stepping -------------------------------

    pub fn register_behavior(
        &mut self,
        name: &str,
        run: impl FnMut(&mut SimState, &mut SimRng) -> Result<()> + Send + 'static,
    ) -> Result<()> {
        if self.behaviors.iter().any(|b| b.name == name) {
            return Err(SimError::Duplicate(name.to_string()));
        }
        self.behaviors.push(Behavior {
            name: name.to_string(),
            run: Box::new(run),
        });
        Ok(())
    }

    pub fn behavior_names(&self) -> Vec<&str> {
        self.behaviors.iter().map(|b| b.name.as_str()).collect()
    }

    /// Drops registered behaviors and reporters (model reinstall).
    pub fn uninstall(&mut self) {
        self.behaviors.clear();
        self.reporters.clear();
        self.series = Series::default();
    }

    pub fn register_reporter(
        &mut self,
        name: &str,
        f: impl Fn(&SimState) -> f64 + Send + 'static,
    ) -> Result<()> {
        if self.reporters.iter().any(|r| r.name == name) {
            return Err(SimError::Duplicate(name.to_string()));
        }
        self.reporters.push(Reporter::new(name, f));
        self.series.push_column(name);
        Ok(())
    }

    pub fn reporters(&self) -> &[Reporter] {
        &self.reporters
    }

    pub fn report(&self, name: &str) -> Option<f64> {
        self.reporters.iter().find(|r| r.name == name).map(|r| r.sample(self))
    }

    pub fn series(&self) -> &Series {
        &self.series
    }

    pub fn take_series(&mut self) -> Series {
        let names = self.series.names().to_vec();
        std::mem::replace(&mut self.series, Series::with_columns(names))
    }

    /// Current value of every reporter, in registration order.
    pub fn sample_reporters(&self) -> Vec<f64> {
        self.reporters.iter().map(|r| r.sample(self)).collect()
    }

    /// Runs every behavior once in registration order, advances the tick
    /// and records one row of reporter values.
    pub fn step(&mut self) -> Result<TickReport> {
        let mut behaviors = std::mem::take(&mut self.behaviors);
        let mut timings = Vec::with_capacity(behaviors.len());
        let mut failure = None;
        for b in behaviors.iter_mut() {
            let mut rng = rng::stream(self.config.seed, &b.name, self.tick);
            let started = Instant::now();
            let outcome = (b.run)(self, &mut rng);
            timings.push((b.name.clone(), started.elapsed()));
            if let Err(e) = outcome {
                failure = Some(SimError::Behavior {
                    behavior: b.name.clone(),
                    source: Box::new(e),
                });
                break;
            }
        }
        behaviors.append(&mut self.behaviors);
        self.behaviors = behaviors;
        if let Some(e) = failure {
            return Err(e);
        }
        self.tick += 1;
        let row = self.sample_reporters();
        self.series.push_row(self.tick, row);
        Ok(TickReport {
            tick: self.tick,
            timings,
            counters: self.globals.clone(),
        })
    }

    // ---- digest -------------------------------------------------------

    /// Canonical text form of the observable world state. Reporters,
    /// recorded series and wall-clock data are not part of it.
    pub fn canonical(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(
            s,
            "world {} {} {} {} tick {}",
            c.width, c.height, c.wrap, c.seed, self.tick
        );
        for a in self.agents() {
            let _ = write!(
                s,
                "agent {} {} {} {} {} {} {}",
                a.id,
                a.breed,
                g17(a.x),
                g17(a.y),
                g17(a.heading),
                g17(a.color),
                a.state
            );
            for (k, v) in &a.vars {
                let _ = write!(s, " {}={}", k, g17(*v));
            }
            s.push('\n');
        }
        for p in &self.patches {
            if p.pcolor != 0.0 || !p.vars.is_empty() {
                let _ = write!(s, "patch {} {} {}", p.pxcor, p.pycor, g17(p.pcolor));
                for (k, v) in &p.vars {
                    let _ = write!(s, " {}={}", k, g17(*v));
                }
                s.push('\n');
            }
        }
        for l in self.links.values() {
            let _ = writeln!(s, "link {} {} {}", l.a, l.b, g17(l.weight));
        }
        for (k, v) in &self.globals {
            let _ = writeln!(s, "global {}={}", k, g17(*v));
        }
        s
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world() -> SimState {
        SimState::new(WorldConfig::default().with_seed(7)).unwrap()
    }

    #[test]
    fn fresh_world() {
        let s = SimState::new(WorldConfig::new(33, 33)).unwrap();
        assert_eq!(s.patches().len(), 1089);
        assert_eq!(s.agent_count(), 0);
        assert_eq!(s.tick, 0);
        assert!(s.patches().iter().all(|p| p.pcolor == 0.0));
    }

    #[test]
    fn zero_width_rejected() {
        let err = SimState::new(WorldConfig::new(0, 5)).unwrap_err();
        assert!(matches!(err, SimError::Config(_)));
    }

    #[test]
    fn same_seed_same_draws() {
        let mut a = world();
        let mut b = world();
        let da: Vec<u64> = (0..100).map(|_| a.rng.gen()).collect();
        let db: Vec<u64> = (0..100).map(|_| b.rng.gen()).collect();
        assert_eq!(da, db);
    }

    #[test]
    fn ids_are_dense_and_not_reused() {
        let mut s = world();
        let ids = s.with_root_rng(|s, r| s.create_agents(r, "node", 100, |_, _, _| {})).unwrap();
        assert_eq!(ids, (0..100).collect::<Vec<_>>());
        s.kill(5).unwrap();
        assert!(s.kill(5).is_err());
        let more = s.with_root_rng(|s, r| s.create_agents(r, "node", 2, |_, _, _| {})).unwrap();
        assert_eq!(more, vec![100, 101]);
        assert_eq!(s.agent_count(), 101);
    }

    #[test]
    fn create_zero_is_identity() {
        let mut s = world();
        let before = s.digest();
        let ids = s.with_root_rng(|s, r| s.create_agents(r, "node", 0, |_, _, _| {})).unwrap();
        assert!(ids.is_empty());
        assert_eq!(s.digest(), before);
    }

    #[test]
    fn closed_breeds_reject_unknown() {
        let mut s = world();
        s.breeds.declare("node", "nodes");
        s.breeds.close();
        let err = s.with_root_rng(|s, r| s.create_agents(r, "tower", 1, |_, _, _| {})).unwrap_err();
        assert_eq!(err, SimError::UnknownBreed("tower".into()));
    }

    #[test]
    fn movement_conventions() {
        let mut s = world();
        let id = s.with_root_rng(|s, r| s.create_agents(r, "node", 1, |a, _, _| a.heading = 0.0)).unwrap()[0];
        assert_eq!(s.move_forward(id, 1.0).unwrap(), Position::new(0.0, 1.0));
        s.set_xy(id, 0.0, 0.0).unwrap();
        s.set_agent_var(id, "heading", 90.0).unwrap();
        assert_eq!(s.move_forward(id, 0.001).unwrap(), Position::new(0.001, 0.0));
        s.set_agent_var(id, "heading", 350.0).unwrap();
        assert_eq!(s.turn(id, 20.0).unwrap(), 10.0);
        assert_eq!(s.turn(id, 0.0).unwrap(), 10.0);
        assert_eq!(s.turn(id, -45.0).unwrap(), 325.0);
        assert_eq!(s.move_forward(99, 1.0), Err(SimError::MissingAgent(99)));
        assert_eq!(s.turn(99, 1.0), Err(SimError::MissingAgent(99)));
    }

    #[test]
    fn empty_step_only_ticks() {
        let mut s = world();
        let before = s.canonical();
        let r = s.step().unwrap();
        assert_eq!(r.tick, 1);
        assert_eq!(s.canonical().replace("tick 1", "tick 0"), before);
    }

    #[test]
    fn failing_behavior_surfaces() {
        let mut s = world();
        s.register_behavior("boom", |_, _| Err(SimError::Other("bad".into()))).unwrap();
        let err = s.step().unwrap_err();
        assert!(matches!(err, SimError::Behavior { ref behavior, .. } if behavior == "boom"));
        assert_eq!(s.tick, 0);
        assert_eq!(s.behavior_names(), vec!["boom"]);
    }

    #[test]
    fn clear_all_resets_and_reseeds() {
        let mut s = world();
        let first: u64 = s.rng.gen();
        s.with_root_rng(|s, r| s.create_agents(r, "node", 10, |_, _, _| {})).unwrap();
        s.globals.insert("x".into(), 1.0);
        s.step().unwrap();
        s.clear_all();
        assert_eq!(s.agent_count(), 0);
        assert_eq!(s.tick, 0);
        assert!(s.globals.is_empty());
        assert_eq!(s.rng.gen::<u64>(), first);
        let ids = s.with_root_rng(|s, r| s.create_agents(r, "node", 1, |_, _, _| {})).unwrap();
        assert_eq!(ids, vec![0]);
    }

    #[test]
    fn links_are_undirected_and_unique() {
        let mut s = world();
        s.with_root_rng(|s, r| s.create_agents(r, "node", 3, |_, _, _| {})).unwrap();
        s.create_link(0, 1, 1.0).unwrap();
        s.create_link(1, 0, 1.0).unwrap();
        assert_eq!(s.link_count(), 1);
        assert!(s.create_link(2, 2, 1.0).is_err());
        assert!(s.create_link(0, 9, 1.0).is_err());
        s.create_link(1, 2, 1.0).unwrap();
        s.kill(1).unwrap();
        assert_eq!(s.link_count(), 0);
        assert_eq!(s.linked(0).count(), 0);
    }

    #[test]
    fn duplicate_behavior_and_reporter_names() {
        let mut s = world();
        s.register_behavior("a", |_, _| Ok(())).unwrap();
        assert!(s.register_behavior("a", |_, _| Ok(())).is_err());
        s.register_reporter("r", |_| 0.0).unwrap();
        assert_eq!(s.register_reporter("r", |_| 1.0), Err(SimError::Duplicate("r".into())));
    }

    #[test]
    fn colors_stay_on_the_circle() {
        let mut s = world();
        s.with_root_rng(|s, r| s.create_agents(r, "node", 1, |a, _, _| a.color = 300.0)).unwrap();
        assert_eq!(s.agent(0).unwrap().color, 20.0);
        s.set_color(0, -1.0).unwrap();
        assert_eq!(s.agent(0).unwrap().color, 139.0);
    }
}
