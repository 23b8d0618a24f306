use rand::Rng;

use super::{param, param_usize, Model, ParamSpec};
use crate::color;
use crate::error::Result;
use crate::field::{
    averaging_step, consensus_mobility_tick, consensus_setup, gradient_error, gradient_step, node_values, spread,
    GradientField, MobilityParams,
};
use crate::rng::SimRng;
use crate::selforg::{random_position, sensing_graph};
use crate::world::SimState;

pub const SENSOR: &str = "sensor";

/// Hop-count gradient around one source over static sensors. The source
/// can jump to another sensor periodically to exercise self-healing.
pub struct Gradient;

const GRADIENT: &[ParamSpec] = &[
    ParamSpec::int("n", 1.0, 100_000.0, 200.0, "sensors"),
    ParamSpec::real("radius", 0.1, 50.0, 3.0, "link range"),
    ParamSpec::int("relocate_every", 0.0, 1_000_000.0, 0.0, "ticks between source moves, 0 = never").live(),
    ParamSpec::int("track_error", 0.0, 1.0, 0.0, "1 = report the distance error against exact hop counts"),
];

impl Model for Gradient {
    fn name(&self) -> &'static str {
        "gradient"
    }

    fn params(&self) -> &'static [ParamSpec] {
        GRADIENT
    }

    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()> {
        state.breeds.declare(SENSOR, "sensors");
        let n = param_usize(state, "n");
        state.create_agents(rng, SENSOR, n, |a, rng, g| {
            let p = random_position(rng, g);
            a.x = p.x;
            a.y = p.y;
            a.color = color::GRAY;
        })?;
        let sg = sensing_graph(state, param(state, "radius"), Some(SENSOR))?;
        let mut field = GradientField::new(n, [rng.gen_range(0..n)]);
        paint(state, &sg.ids, &field)?;
        state.globals.insert("changed".into(), 0.0);

        let track = param(state, "track_error") == 1.0;
        if track {
            state.globals.insert("gradient_max_error".into(), gradient_error(&field, &sg.graph));
        }
        state.register_behavior("relax", move |s, rng| {
            let every = param(s, "relocate_every") as u64;
            if every > 0 && s.tick > 0 && s.tick % every == 0 {
                field.set_sources([rng.gen_range(0..field.len())]);
            }
            let next = gradient_step(&field, &sg.graph);
            let changed = next.values.iter().zip(&field.values).filter(|(a, b)| a != b).count();
            field = next;
            s.globals.insert("changed".into(), changed as f64);
            if track {
                s.globals.insert("gradient_max_error".into(), gradient_error(&field, &sg.graph));
            }
            paint(s, &sg.ids, &field)
        })?;
        state.register_reporter("max_value", |s| {
            s.agents_of(Some(SENSOR))
                .filter_map(|a| a.var("gradient"))
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max)
        })?;
        state.register_reporter("unreached", |s| {
            s.agents_of(Some(SENSOR))
                .filter(|a| a.var("gradient").is_some_and(f64::is_infinite))
                .count() as f64
        })?;
        state.register_reporter("changed", |s| s.globals["changed"])?;
        if track {
            state.register_reporter("gradient_max_error", |s| s.globals["gradient_max_error"])?;
        }
        Ok(())
    }
}

/// Stores each value as the `gradient` variable and shades by distance.
fn paint(s: &mut SimState, ids: &[u64], field: &GradientField) -> Result<()> {
    for (i, &id) in ids.iter().enumerate() {
        let v = field.values[i];
        let c = if field.sources.contains(&i) {
            color::RED
        } else if v.is_finite() {
            color::BLUE - 4.0 + v.min(8.0)
        } else {
            color::GRAY
        };
        let a = s.agent_mut(id)?;
        a.vars.insert("gradient".into(), v);
        a.color = c;
    }
    Ok(())
}

/// Distributed averaging among mobile nodes that interact with whoever is
/// in range each tick.
pub struct Consensus;

const CONSENSUS: &[ParamSpec] = &[
    ParamSpec::int("n", 1.0, 100_000.0, 1000.0, "nodes"),
    ParamSpec::real("radius", 0.1, 50.0, 1.5, "interaction range").live(),
    ParamSpec::real("step", 0.0, 10.0, 0.1, "distance moved per tick").live(),
    ParamSpec::real("turn_bound", 0.0, 180.0, 45.0, "largest random turn per tick, degrees").live(),
    ParamSpec::int("mobile", 0.0, 1.0, 1.0, "0 = nodes stay put").live(),
];

impl Model for Consensus {
    fn name(&self) -> &'static str {
        "consensus"
    }

    fn params(&self) -> &'static [ParamSpec] {
        CONSENSUS
    }

    fn setup(&self, state: &mut SimState, rng: &mut SimRng) -> Result<()> {
        let base = mobility(state);
        consensus_setup(state, rng, &base)?;
        shade(state)?;
        state.register_behavior("average", |s, rng| {
            let p = mobility(s);
            if param(s, "mobile") == 1.0 {
                consensus_mobility_tick(s, rng, &p)?;
            } else {
                averaging_step(s, p.radius)?;
            }
            shade(s)
        })?;
        state.register_reporter("range", |s| spread(&node_values(s)).0)?;
        state.register_reporter("variance", |s| spread(&node_values(s)).1)?;
        state.register_reporter("mean", |s| {
            let x = node_values(s);
            if x.is_empty() {
                f64::NAN
            } else {
                x.iter().sum::<f64>() / x.len() as f64
            }
        })?;
        Ok(())
    }
}

fn mobility(s: &SimState) -> MobilityParams {
    MobilityParams {
        n: param_usize(s, "n"),
        radius: param(s, "radius"),
        step: param(s, "step"),
        turn_bound: param(s, "turn_bound"),
    }
}

/// Lightness follows the held value.
fn shade(s: &mut SimState) -> Result<()> {
    let ids: Vec<u64> = s.agents().map(|a| a.id).collect();
    for id in ids {
        let a = s.agent_mut(id)?;
        let v = a.var("value").unwrap_or(0.0);
        a.color = color::SKY - 5.0 + (v / 100.0 * 9.9).clamp(0.0, 9.9);
    }
    Ok(())
}
