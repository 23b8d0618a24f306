//! Wire messages. Every message is one JSON object; over plain TCP each is
//! terminated by a newline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::models::{self, Model, ParamSpec};
use crate::world::{AgentState, SimState, WorldConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Setup,
    Go,
    Stop,
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Frames,
    Metrics,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Body {
    Command {
        text: String,
    },
    Control {
        action: Action,
        #[serde(default)]
        count: Option<u64>,
    },
    SetParam {
        name: String,
        value: f64,
    },
    Subscribe {
        channels: Vec<Channel>,
    },
    /// Gives up the controller role.
    Release,
}

impl Body {
    /// Whether the message changes the simulation (and so needs control).
    pub fn steers(&self) -> bool {
        !matches!(self, Body::Subscribe { .. } | Body::Release)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ClientMessage {
    #[serde(default)]
    pub id: Value,
    #[serde(flatten)]
    pub body: Body,
}

pub fn decode(line: &str) -> Result<ClientMessage, String> {
    serde_json::from_str(line).map_err(|e| format!("malformed message: {e}"))
}

#[derive(Debug, Serialize)]
pub struct AgentView<'a> {
    pub id: u64,
    pub breed: &'a str,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub color: f64,
    pub state: AgentState,
}

#[derive(Debug, Serialize)]
pub struct Frame<'a> {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub tick: u64,
    pub agents: Vec<AgentView<'a>>,
    pub links: Vec<[u64; 2]>,
    /// `[pxcor, pycor, pcolor]` of patches changed since the given clock.
    pub patches: Vec<(i64, i64, f64)>,
    pub metrics: BTreeMap<String, Option<f64>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Tick-boundary snapshot as one JSON line (no trailing newline). Agents
/// are in id order; only patches whose version exceeds `since` are listed.
/// Non-finite numbers are sent as `null`.
pub fn encode_frame(state: &SimState, since: u64) -> String {
    let frame = Frame {
        kind: "frame",
        tick: state.tick,
        agents: state
            .agents()
            .map(|a| AgentView {
                id: a.id,
                breed: &a.breed,
                x: a.x,
                y: a.y,
                heading: a.heading,
                color: a.color,
                state: a.state,
            })
            .collect(),
        links: state.links().map(|l| [l.a, l.b]).collect(),
        patches: state
            .patches()
            .iter()
            .filter(|p| p.version > since)
            .map(|p| (p.pxcor, p.pycor, p.pcolor))
            .collect(),
        metrics: metrics_map(state),
    };
    serde_json::to_string(&frame).expect("frame serializes")
}

fn metrics_map(state: &SimState) -> BTreeMap<String, Option<f64>> {
    state
        .reporters()
        .iter()
        .map(|r| r.name.clone())
        .zip(state.sample_reporters().into_iter().map(finite))
        .collect()
}

/// One row of the metrics channel: the values recorded for `tick`.
pub fn encode_metrics(state: &SimState) -> String {
    let (tick, values) = match state.series().last() {
        Some(row) => (row.tick, row.values.clone()),
        None => (state.tick, state.sample_reporters()),
    };
    let row: Vec<Option<f64>> = values.into_iter().map(finite).collect();
    json!({"type": "metrics", "tick": tick, "names": state.series().names(), "values": row}).to_string()
}

pub fn encode_schema(model: &dyn Model, world: &WorldConfig, state: &SimState, frame_rate: f64, running: bool) -> String {
    let params: &[ParamSpec] = model.params();
    let reporters: Vec<&str> = state.reporters().iter().map(|r| r.name.as_str()).collect();
    let catalog: BTreeMap<&str, &[ParamSpec]> = models::MODEL_NAMES
        .iter()
        .filter_map(|n| models::lookup(n).ok())
        .map(|m| (m.name(), m.params()))
        .collect();
    json!({
        "type": "schema",
        "model": model.name(),
        "params": params,
        "current": state.params,
        "reporters": reporters,
        "world": world,
        "frame_rate": frame_rate,
        "tick": state.tick,
        "running": running,
        "models": catalog,
    })
    .to_string()
}

pub fn encode_ack(id: &Value, extra: Value) -> String {
    let mut obj = json!({"type": "ack", "id": id});
    if let (Some(o), Value::Object(e)) = (obj.as_object_mut(), extra) {
        o.extend(e);
    }
    obj.to_string()
}

pub fn encode_error(id: &Value, message: &str, extra: Value) -> String {
    let mut obj = json!({"type": "error", "id": id, "message": message});
    if let (Some(o), Value::Object(e)) = (obj.as_object_mut(), extra) {
        o.extend(e);
    }
    obj.to_string()
}
