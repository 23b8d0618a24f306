//! Hop-count gradient from a source, then healing after the source moves.

use sosim::field::{gradient_run, GradientField};
use sosim::search::lattice;

fn main() {
    let g = lattice(8, 8);
    let run = gradient_run(GradientField::new(g.n(), [0]), &g, 100);
    println!("converged={} in {} steps", run.converged, run.steps);
    for row in run.field.values.chunks(8) {
        println!("  {}", row.iter().map(|v| format!("{v:2}")).collect::<Vec<_>>().join(" "));
    }
    let mut moved = run.field;
    moved.set_sources([63]);
    let healed = gradient_run(moved, &g, 100);
    println!("after moving the source: healed in {} steps", healed.steps);
}
