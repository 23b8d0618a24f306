use rand::Rng;

use super::{param, param_usize, Model, ParamSpec};
use crate::agentset;
use crate::error::Result;
use crate::rng::{random_int, symmetric, SimRng};
use crate::selforg::NODE;
use crate::world::SimState;

/// The introductory world: scattered turtles with random colors on a
/// uniformly colored background, each creeping forward every tick.
pub struct Tutorial;

const PARAMS: &[ParamSpec] = &[
    ParamSpec::int("n", 0.0, 100_000.0, 100.0, "turtles created at setup"),
    ParamSpec::real("step", 0.0, 10.0, 0.001, "distance moved per tick").live(),
    ParamSpec::real("turn_bound", 0.0, 180.0, 0.0, "largest random turn per tick, degrees").live(),
];

impl Model for Tutorial {
    fn name(&self) -> &'static str {
        "tutorial"
    }

    fn params(&self) -> &'static [ParamSpec] {
        PARAMS
    }

    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()> {
        state.breeds.declare(NODE, "nodes");
        let n = param_usize(state, "n");
        state.create_agents(rng, NODE, n, |a, rng, g| {
            a.x = rng.gen_range(g.min_pxcor..=g.max_pxcor) as f64;
            a.y = rng.gen_range(g.min_pycor..=g.max_pycor) as f64;
            a.color = random_int(rng, 140.0);
            a.vars.insert("power".into(), rng.gen::<f64>());
        })?;
        let background = random_int(rng, 140.0);
        state.recolor_patches(|_, _| Ok(background))?;

        state.register_behavior("go", |s, rng| {
            let step = param(s, "step");
            let turn = param(s, "turn_bound");
            let all = agentset::all(s, None);
            agentset::ask(s, &all, rng, |s, rng, id| {
                if turn > 0.0 {
                    s.turn(id, symmetric(rng, turn))?;
                }
                s.move_forward(id, step)?;
                Ok(())
            })
        })?;
        state.register_reporter("count", |s| s.agent_count() as f64)?;
        state.register_reporter("mean_x", |s| mean(s.agents().map(|a| a.x)))?;
        state.register_reporter("mean_y", |s| mean(s.agents().map(|a| a.y)))?;
        Ok(())
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}
