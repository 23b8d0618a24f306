//! A small parameter sweep run in parallel, summarized per grid point.

use sosim::sweep::{run_experiment, summarize, SweepSpec};

fn main() -> sosim::error::Result<()> {
    let spec = SweepSpec::from_json(
        r#"{"model": "clustering", "grid": {"sensing_radius": [3, 5, 8]},
            "repetitions": 5, "base_seed": 11, "stop": {"max_ticks": 10},
            "params": {"n_nodes": 80}}"#,
    )?;
    let result = run_experiment(&spec, 4)?;
    for group in summarize(&result.records, &["sensing_radius"])? {
        println!("{:?}", group.key);
        for m in group.metrics {
            println!("  {:<16} mean {:.3} sd {:.3}", m.metric, m.mean, m.std);
        }
    }
    Ok(())
}
