use thiserror::Error;

use crate::world::AgentId;

/// Errors raised by the engine, the query layer and the protocol models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("no such agent: {0}")]
    MissingAgent(AgentId),

    #[error("unknown breed {0}")]
    UnknownBreed(String),

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("unknown model {0}")]
    UnknownModel(String),

    #[error("unknown parameter {0}")]
    UnknownParam(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("duplicate name {0}")]
    Duplicate(String),

    #[error("empty agentset")]
    EmptySet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("agent {agent}: {source}")]
    InAgent {
        agent: AgentId,
        #[source]
        source: Box<SimError>,
    },

    #[error("behavior {behavior} failed: {source}")]
    Behavior {
        behavior: String,
        #[source]
        source: Box<SimError>,
    },

    #[error("{0}")]
    Other(String),
}

impl SimError {
    pub fn in_agent(agent: AgentId, source: SimError) -> Self {
        SimError::InAgent {
            agent,
            source: Box::new(source),
        }
    }

    /// Strips `InAgent` / `Behavior` wrappers.
    pub fn root(&self) -> &SimError {
        match self {
            SimError::InAgent { source, .. } | SimError::Behavior { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
