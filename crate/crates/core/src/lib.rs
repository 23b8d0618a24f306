pub mod agentset;
pub mod color;
pub mod error;
pub mod fmt;
pub mod graph;
pub mod metrics;
pub mod rng;
pub mod world;

pub use error::{Result, SimError};
pub use world::{Agent, AgentId, AgentState, Position, SimState, WorldConfig};
pub mod search;
pub mod selforg;
pub mod field;
pub mod console;
pub mod models;
pub mod config;
pub mod sim;
pub mod server;
pub mod sweep;
