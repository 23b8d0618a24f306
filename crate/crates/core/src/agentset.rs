//! Agentset selection and `ask`.
//!
//! Agentsets are snapshots: membership is fixed when the set is built.

use std::fmt;

use rand::seq::SliceRandom;

use crate::error::{Result, SimError};
use crate::rng::SimRng;
use crate::world::{Agent, AgentId, Position, SimState};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentSet(Vec<AgentId>);

impl AgentSet {
    /// Builds a set from ids, dropping duplicates and keeping first-seen order.
    pub fn from_ids(ids: impl IntoIterator<Item = AgentId>) -> Self {
        let mut seen = std::collections::HashSet::new();
        Self(ids.into_iter().filter(|id| seen.insert(*id)).collect())
    }

    pub fn ids(&self) -> &[AgentId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.0.contains(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<AgentId> {
        self.0
    }
}

impl IntoIterator for AgentSet {
    type Item = AgentId;
    type IntoIter = std::vec::IntoIter<AgentId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// Side-effect-free test over one agent.
pub trait AgentPredicate {
    fn test(&self, agent: &Agent) -> Result<bool>;
}

impl<F> AgentPredicate for F
where
    F: Fn(&Agent) -> Result<bool>,
{
    fn test(&self, agent: &Agent) -> Result<bool> {
        self(agent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CmpOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
}

impl CmpOp {
    pub fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    /// Built-in field or custom variable, by name.
    Var(String),
    Const(f64),
}

impl Operand {
    fn value(&self, agent: &Agent) -> Result<f64> {
        match self {
            Operand::Var(name) => agent.get(name),
            Operand::Const(c) => Ok(*c),
        }
    }
}

/// Small predicate language for building agentsets from code.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    True,
    Compare(Operand, CmpOp, Operand),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn var(name: &str, op: CmpOp, value: f64) -> Self {
        Predicate::Compare(Operand::Var(name.to_string()), op, Operand::Const(value))
    }

    pub fn and(self, other: Predicate) -> Self {
        Predicate::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Predicate) -> Self {
        Predicate::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Self {
        Predicate::Not(Box::new(self))
    }
}

impl AgentPredicate for Predicate {
    fn test(&self, agent: &Agent) -> Result<bool> {
        Ok(match self {
            Predicate::True => true,
            Predicate::Compare(a, op, b) => op.apply(a.value(agent)?, b.value(agent)?),
            Predicate::And(a, b) => a.test(agent)? && b.test(agent)?,
            Predicate::Or(a, b) => a.test(agent)? || b.test(agent)?,
            Predicate::Not(p) => !p.test(agent)?,
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let operand = |o: &Operand| match o {
            Operand::Var(v) => v.clone(),
            Operand::Const(c) => c.to_string(),
        };
        match self {
            Predicate::True => f.write_str("true"),
            Predicate::Compare(a, op, b) => write!(f, "{} {} {}", operand(a), op.symbol(), operand(b)),
            Predicate::And(a, b) => write!(f, "({a} and {b})"),
            Predicate::Or(a, b) => write!(f, "({a} or {b})"),
            Predicate::Not(p) => write!(f, "not ({p})"),
        }
    }
}

/// Every live agent of `breed` (all breeds when `None`), in id order.
pub fn all(state: &SimState, breed: Option<&str>) -> AgentSet {
    AgentSet(state.agents_of(breed).map(|a| a.id).collect())
}

/// Live agents of `breed` satisfying `pred`, in id order.
pub fn select_with(state: &SimState, breed: Option<&str>, pred: &dyn AgentPredicate) -> Result<AgentSet> {
    let mut ids = Vec::new();
    for a in state.agents_of(breed) {
        if pred.test(a)? {
            ids.push(a.id);
        }
    }
    Ok(AgentSet(ids))
}

/// Members of `set` that satisfy `pred`, keeping set order.
pub fn filter(state: &SimState, set: &AgentSet, pred: &dyn AgentPredicate) -> Result<AgentSet> {
    let mut ids = Vec::new();
    for id in set.iter() {
        if let Ok(a) = state.agent(id) {
            if pred.test(a)? {
                ids.push(id);
            }
        }
    }
    Ok(AgentSet(ids))
}

/// Agents of `breed` within distance `r` of `center`, boundary inclusive.
pub fn in_radius(state: &SimState, center: Position, r: f64, breed: Option<&str>) -> Result<AgentSet> {
    if !(r >= 0.0) {
        return Err(SimError::InvalidArgument(format!("negative radius {r}")));
    }
    Ok(AgentSet(
        state
            .agents_of(breed)
            .filter(|a| state.toroidal_distance(center, a.position()) <= r)
            .map(|a| a.id)
            .collect(),
    ))
}

/// Member with the smallest key; ties go to the lowest id.
pub fn min_one_of(state: &SimState, set: &AgentSet, key: impl Fn(&Agent) -> Result<f64>) -> Result<AgentId> {
    let mut best: Option<(f64, AgentId)> = None;
    for id in set.iter() {
        let Ok(a) = state.agent(id) else { continue };
        let k = key(a)?;
        let better = match best {
            None => true,
            Some((bk, bid)) => k < bk || (k == bk && id < bid),
        };
        if better {
            best = Some((k, id));
        }
    }
    best.map(|(_, id)| id).ok_or(SimError::EmptySet)
}

pub fn link_neighbors(state: &SimState, id: AgentId) -> Result<AgentSet> {
    state.agent(id)?;
    Ok(AgentSet(state.linked(id).collect()))
}

/// Runs `action` once per member in an order shuffled with `rng`. Members
/// that died before their turn are skipped; agents created during the ask
/// are not visited. The first error stops the iteration.
pub fn ask(
    state: &mut SimState,
    set: &AgentSet,
    rng: &mut SimRng,
    mut action: impl FnMut(&mut SimState, &mut SimRng, AgentId) -> Result<()>,
) -> Result<()> {
    let mut order = set.0.clone();
    order.shuffle(rng);
    for id in order {
        if !state.is_alive(id) {
            continue;
        }
        action(state, rng, id).map_err(|e| SimError::in_agent(id, e))?;
    }
    Ok(())
}
