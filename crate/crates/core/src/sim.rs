//! A model bound to a world, steered through a queue of setup, console
//! and parameter requests that are applied only between ticks. Every
//! request is written to a run log from which the run can be replayed.

use std::collections::{BTreeMap, VecDeque};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agentset::CmpOp;
use crate::config::SimConfig;
use crate::console::{self, ConsoleError};
use crate::error::{Result, SimError};
use crate::models::{self, Model};
use crate::world::{SimState, TickReport, WorldConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LogEvent {
    Start {
        world: WorldConfig,
        model: String,
        params: BTreeMap<String, f64>,
    },
    Setup,
    Steps {
        count: u64,
    },
    Command {
        text: String,
    },
    SetParam {
        name: String,
        value: f64,
    },
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub tick: u64,
    #[serde(flatten)]
    pub event: LogEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Steer {
    Setup,
    Command(String),
    SetParam { name: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Applied {
    Setup,
    /// Printed values of the bare expressions in a command.
    Values(Vec<String>),
    ParamLive,
    /// Structural parameter stored for the next setup.
    ParamDeferred,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SteerError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Console(#[from] ConsoleError),
}

pub struct Simulation {
    state: SimState,
    model: &'static dyn Model,
    /// Requested overrides, including deferred ones.
    params: BTreeMap<String, f64>,
    log: Vec<LogEntry>,
    unlogged_steps: u64,
    queue: VecDeque<(u64, Steer)>,
    next_ticket: u64,
}

impl Simulation {
    /// An empty world ready for `setup`.
    pub fn new(config: &SimConfig) -> Result<Self> {
        let model = models::lookup(&config.model)?;
        model.resolve(&config.params)?;
        let mut sim = Self {
            state: SimState::new(config.world.clone())?,
            model,
            params: config.params.clone(),
            log: Vec::new(),
            unlogged_steps: 0,
            queue: VecDeque::new(),
            next_ticket: 0,
        };
        sim.record(LogEvent::Start {
            world: config.world.clone(),
            model: config.model.clone(),
            params: config.params.clone(),
        });
        Ok(sim)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn model(&self) -> &'static dyn Model {
        self.model
    }

    pub fn tick(&self) -> u64 {
        self.state.tick
    }

    /// True once the configured `max_ticks` is reached.
    pub fn at_limit(&self) -> bool {
        self.state.config().max_ticks.is_some_and(|m| self.state.tick >= m)
    }

    fn flush_steps(&mut self) {
        if self.unlogged_steps > 0 {
            let count = std::mem::take(&mut self.unlogged_steps);
            let tick = self.state.tick;
            self.push_entry(tick, LogEvent::Steps { count });
        }
    }

    fn push_entry(&mut self, tick: u64, event: LogEvent) {
        let seq = self.log.len() as u64;
        self.log.push(LogEntry { seq, tick, event });
    }

    fn record(&mut self, event: LogEvent) {
        self.flush_steps();
        let tick = self.state.tick;
        self.push_entry(tick, event);
    }

    /// `clear_all` plus model setup with the current parameters.
    pub fn setup(&mut self) -> Result<()> {
        self.record(LogEvent::Setup);
        models::install(&mut self.state, self.model, &self.params)
    }

    pub fn step(&mut self) -> Result<TickReport> {
        let report = self.state.step()?;
        self.unlogged_steps += 1;
        Ok(report)
    }

    pub fn run(&mut self, ticks: u64) -> Result<()> {
        for _ in 0..ticks {
            self.step()?;
        }
        Ok(())
    }

    /// Runs a console command now. Callers are responsible for only doing
    /// this at a tick boundary.
    pub fn command(&mut self, text: &str) -> Result<Vec<console::Value>, ConsoleError> {
        self.record(LogEvent::Command { text: text.to_string() });
        console::run(&mut self.state, text)
    }

    pub fn set_param(&mut self, name: &str, value: f64) -> Result<Applied> {
        let spec = self.model.param(name)?;
        spec.check(value)?;
        self.record(LogEvent::SetParam {
            name: name.to_string(),
            value,
        });
        self.params.insert(name.to_string(), value);
        if spec.live {
            self.state.params.insert(name.to_string(), value);
            Ok(Applied::ParamLive)
        } else {
            Ok(Applied::ParamDeferred)
        }
    }

    pub fn apply(&mut self, steer: Steer) -> Result<Applied, SteerError> {
        Ok(match steer {
            Steer::Setup => {
                self.setup()?;
                Applied::Setup
            }
            Steer::Command(text) => {
                Applied::Values(self.command(&text)?.iter().map(ToString::to_string).collect())
            }
            Steer::SetParam { name, value } => self.set_param(&name, value)?,
        })
    }

    /// Queues a request for the next tick boundary. Returns its ticket.
    pub fn submit(&mut self, steer: Steer) -> u64 {
        let ticket = self.next_ticket;
        self.next_ticket += 1;
        self.queue.push_back((ticket, steer));
        ticket
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Applies every queued request in submission order.
    pub fn drain(&mut self) -> Vec<(u64, Result<Applied, SteerError>)> {
        let mut out = Vec::with_capacity(self.queue.len());
        while let Some((ticket, steer)) = self.queue.pop_front() {
            out.push((ticket, self.apply(steer)));
        }
        out
    }

    /// Log so far, with any trailing run of steps included.
    pub fn log(&mut self) -> &[LogEntry] {
        self.flush_steps();
        &self.log
    }

    pub fn write_log<W: Write>(&mut self, mut out: W) -> std::io::Result<()> {
        for e in self.log() {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn save_log(&mut self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_log(std::io::BufWriter::new(f))
    }

    pub fn into_state(self) -> SimState {
        self.state
    }
}

pub fn read_log<R: BufRead>(input: R) -> Result<Vec<LogEntry>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| SimError::Config(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| SimError::Config(format!("run log line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

pub fn load_log(path: impl AsRef<Path>) -> Result<Vec<LogEntry>> {
    let f = std::fs::File::open(path.as_ref()).map_err(|e| SimError::Config(e.to_string()))?;
    read_log(std::io::BufReader::new(f))
}

/// Re-executes a run log headlessly. Console and parameter errors are
/// reproduced silently, exactly as they happened in the original run.
pub fn replay(entries: &[LogEntry]) -> Result<Simulation> {
    let Some(LogEntry {
        event: LogEvent::Start { world, model, params },
        ..
    }) = entries.first()
    else {
        return Err(SimError::Config("run log must begin with a start entry".into()));
    };
    let mut sim = Simulation::new(&SimConfig {
        world: world.clone(),
        model: model.clone(),
        params: params.clone(),
    })?;
    for e in &entries[1..] {
        match &e.event {
            LogEvent::Start { .. } => return Err(SimError::Config("second start entry in run log".into())),
            LogEvent::Setup => sim.setup()?,
            LogEvent::Steps { count } => sim.run(*count)?,
            LogEvent::Command { text } => {
                let _ = sim.command(text);
            }
            LogEvent::SetParam { name, value } => {
                let _ = sim.set_param(name, *value);
            }
        }
    }
    Ok(sim)
}

/// Optional early stop: `reporter op value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Until {
    pub reporter: String,
    pub op: CmpOp,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_ticks: u64,
    #[serde(default)]
    pub until: Option<Until>,
}

impl StopRule {
    pub fn ticks(max_ticks: u64) -> Self {
        Self { max_ticks, until: None }
    }

    fn reached(&self, state: &SimState) -> Result<bool> {
        if state.tick >= self.max_ticks {
            return Ok(true);
        }
        match &self.until {
            None => Ok(false),
            Some(u) => {
                let v = state
                    .report(&u.reporter)
                    .ok_or_else(|| SimError::UnknownVariable(u.reporter.clone()))?;
                Ok(u.op.apply(v, u.value))
            }
        }
    }
}

/// Setup then step until the stop rule holds.
pub fn run_headless(config: &SimConfig, stop: &StopRule) -> Result<Simulation> {
    let mut sim = Simulation::new(config)?;
    sim.setup()?;
    while !sim.stop_reached(stop)? {
        sim.step()?;
    }
    Ok(sim)
}

impl Simulation {
    pub fn stop_reached(&self, stop: &StopRule) -> Result<bool> {
        stop.reached(&self.state)
    }
}
