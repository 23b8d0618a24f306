//! Runnable models: parameter schemas plus setup code that populates the
//! world and registers per-tick behaviors and reporters.

mod field;
mod search;
mod selforg;
mod tutorial;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::rng::SimRng;
use crate::world::SimState;

pub use field::{Consensus, Gradient};
pub use search::{query_records, ExpandingRing, KWalk};
pub use selforg::{Clustering, Flocking};
pub use tutorial::Tutorial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Int,
    Real,
}

/// One tunable parameter. `live` parameters are re-read every tick; the
/// others only take effect at the next setup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub kind: ParamKind,
    pub min: f64,
    pub max: f64,
    pub default: f64,
    pub live: bool,
    pub doc: &'static str,
}

impl ParamSpec {
    pub const fn int(name: &'static str, min: f64, max: f64, default: f64, doc: &'static str) -> Self {
        Self {
            name,
            kind: ParamKind::Int,
            min,
            max,
            default,
            live: false,
            doc,
        }
    }

    pub const fn real(name: &'static str, min: f64, max: f64, default: f64, doc: &'static str) -> Self {
        Self {
            name,
            kind: ParamKind::Real,
            min,
            max,
            default,
            live: false,
            doc,
        }
    }

    pub const fn live(mut self) -> Self {
        self.live = true;
        self
    }

    pub fn check(&self, value: f64) -> Result<()> {
        let bad = |reason: String| {
            Err(SimError::InvalidParam {
                name: self.name.into(),
                reason,
            })
        };
        if !value.is_finite() {
            return bad("must be finite".into());
        }
        if self.kind == ParamKind::Int && value.fract() != 0.0 {
            return bad(format!("must be an integer, got {value}"));
        }
        if value < self.min || value > self.max {
            return bad(format!("{value} outside [{}, {}]", self.min, self.max));
        }
        Ok(())
    }
}

pub trait Model: Send + Sync {
    fn name(&self) -> &'static str;

    fn params(&self) -> &'static [ParamSpec];

    /// Populates a cleared world and registers behaviors and reporters.
    /// Parameters are already resolved into `state.params`.
    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()>;

    fn param(&self, name: &str) -> Result<&'static ParamSpec> {
        self.params()
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| SimError::UnknownParam(name.to_string()))
    }

    /// Defaults overlaid with `overrides`, each checked against the schema.
    fn resolve(&self, overrides: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
        let mut out: BTreeMap<String, f64> = self.params().iter().map(|p| (p.name.to_string(), p.default)).collect();
        for (k, &v) in overrides {
            self.param(k)?.check(v)?;
            out.insert(k.clone(), v);
        }
        Ok(out)
    }
}

pub const MODEL_NAMES: [&str; 7] = [
    "tutorial",
    "flocking",
    "clustering",
    "expanding-ring",
    "k-walk",
    "gradient",
    "consensus",
];

pub fn lookup(name: &str) -> Result<&'static dyn Model> {
    Ok(match name {
        "tutorial" => &Tutorial,
        "flocking" => &Flocking,
        "clustering" => &Clustering,
        "expanding-ring" => &ExpandingRing,
        "k-walk" => &KWalk,
        "gradient" => &Gradient,
        "consensus" => &Consensus,
        other => return Err(SimError::UnknownModel(other.to_string())),
    })
}

/// Clears the world, drops the previous model's behaviors, stores the
/// resolved parameters and runs the model's setup with the root generator.
pub fn install(state: &mut SimState, model: &dyn Model, params: &BTreeMap<String, f64>) -> Result<()> {
    let resolved = model.resolve(params)?;
    state.clear_all();
    state.uninstall();
    state.params = resolved;
    state.with_root_rng(|s, rng| model.setup(s, rng))
}

/// Resolved parameter value. Panics only if a model reads a name missing
/// from its own schema, which `install` rules out.
pub(crate) fn param(state: &SimState, name: &str) -> f64 {
    *state
        .params
        .get(name)
        .unwrap_or_else(|| panic!("parameter {name} not resolved"))
}

pub(crate) fn param_usize(state: &SimState, name: &str) -> usize {
    param(state, name) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::WorldConfig;

    #[test]
    fn every_model_installs_and_steps() {
        for name in MODEL_NAMES {
            let model = lookup(name).unwrap();
            let mut s = SimState::new(WorldConfig::default().with_seed(5)).unwrap();
            let mut small = BTreeMap::new();
            for p in model.params() {
                match p.name {
                    "n" | "n_nodes" => {
                        small.insert(p.name.to_string(), 30.0);
                    }
                    "p" => {
                        small.insert("p".into(), 0.2);
                    }
                    _ => {}
                }
            }
            install(&mut s, model, &small).unwrap();
            for _ in 0..5 {
                s.step().unwrap_or_else(|e| panic!("{name}: {e}"));
            }
            assert_eq!(s.series().len(), 5, "{name}");
            assert!(!s.reporters().is_empty(), "{name}");
        }
    }

    #[test]
    fn setup_is_reproducible() {
        for name in MODEL_NAMES {
            let model = lookup(name).unwrap();
            let mut s = SimState::new(WorldConfig::default().with_seed(9)).unwrap();
            install(&mut s, model, &BTreeMap::new()).unwrap();
            let first = s.digest();
            for _ in 0..3 {
                s.step().unwrap();
            }
            install(&mut s, model, &BTreeMap::new()).unwrap();
            assert_eq!(first, s.digest(), "{name}");
        }
    }

    #[test]
    fn params_are_checked() {
        let m = lookup("flocking").unwrap();
        let p = |k: &str, v: f64| BTreeMap::from([(k.to_string(), v)]);
        assert!(matches!(m.resolve(&p("bogus", 1.0)), Err(SimError::UnknownParam(_))));
        assert!(m.resolve(&p("n_nodes", 2.5)).is_err());
        assert!(m.resolve(&p("capture_radius", -1.0)).is_err());
        assert_eq!(m.resolve(&p("capture_radius", 5.0)).unwrap()["capture_radius"], 5.0);
        assert!(lookup("nope").is_err());
    }

    #[test]
    fn schema_flags() {
        let m = lookup("flocking").unwrap();
        assert!(!m.param("capture_radius").unwrap().live);
        assert!(m.param("step").unwrap().live);
    }
}
