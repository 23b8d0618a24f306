use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::geometry::Position;
use crate::error::{Result, SimError};

/// The `who` number of an agent.
pub type AgentId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AgentState {
    #[default]
    Free,
    Locked,
    Head,
    Member,
    Undecided,
}

impl AgentState {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentState::Free => "free",
            AgentState::Locked => "locked",
            AgentState::Head => "head",
            AgentState::Member => "member",
            AgentState::Undecided => "undecided",
        }
    }
}

impl fmt::Display for AgentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A turtle.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub breed: String,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub color: f64,
    pub state: AgentState,
    pub vars: BTreeMap<String, f64>,
}

/// Names readable on every agent besides its custom variables.
pub const AGENT_BUILTINS: &[&str] = &["who", "xcor", "ycor", "heading", "color"];

impl Agent {
    pub(crate) fn new(id: AgentId, breed: &str) -> Self {
        Self {
            id,
            breed: breed.to_string(),
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            color: 0.0,
            state: AgentState::Free,
            vars: BTreeMap::new(),
        }
    }

    pub fn position(&self) -> Position {
        Position::new(self.x, self.y)
    }

    /// Reads a built-in field or custom variable.
    pub fn get(&self, name: &str) -> Result<f64> {
        match name {
            "who" => Ok(self.id as f64),
            "xcor" => Ok(self.x),
            "ycor" => Ok(self.y),
            "heading" => Ok(self.heading),
            "color" => Ok(self.color),
            _ => self
                .vars
                .get(name)
                .copied()
                .ok_or_else(|| SimError::UnknownVariable(name.to_string())),
        }
    }

    pub fn var(&self, name: &str) -> Option<f64> {
        self.vars.get(name).copied()
    }

    pub fn has(&self, name: &str) -> bool {
        AGENT_BUILTINS.contains(&name) || self.vars.contains_key(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub pxcor: i64,
    pub pycor: i64,
    pub pcolor: f64,
    pub vars: BTreeMap<String, f64>,
    /// Value of the world's patch clock at the last mutation.
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub a: AgentId,
    pub b: AgentId,
    pub weight: f64,
}

impl Link {
    pub fn other(&self, id: AgentId) -> AgentId {
        if self.a == id {
            self.b
        } else {
            self.a
        }
    }
}
