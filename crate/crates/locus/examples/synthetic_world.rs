//! Generates a random indoor world plus a benchmark set of overlapping
//! submaps, and reports what was built.
//!
//! Run with: cargo run --release --example synthetic_world

use locus::synth::{generate_benchmark, OverlapPlan, WorldSpec};

fn main() {
    let spec = WorldSpec {
        seed: 42,
        extent: (40.0, 40.0),
        room_count: (10, 14),
        ..WorldSpec::default()
    };
    let plan = OverlapPlan {
        cluster_size: 3,
        anchor_separation: 8.0,
        ..OverlapPlan::default()
    };

    let dataset = generate_benchmark(&spec, 12, &plan).expect("generation");
    let world = &dataset.world;
    let free = world.occupied.iter().filter(|&&o| !o).count();
    println!(
        "world: {}x{} cells at {} m, {:.1}% free",
        world.width,
        world.height,
        world.resolution,
        100.0 * free as f64 / world.occupied.len() as f64
    );
    for s in &dataset.submaps {
        let observed = s.grid.cells.iter().filter(|&&v| v >= 0.0).count();
        println!(
            "submap {:2}: pose ({:6.2}, {:6.2}) m, {}x{} cells, {:5.1}% observed",
            s.id,
            s.pose.x,
            s.pose.y,
            s.grid.width,
            s.grid.height,
            100.0 * observed as f64 / s.grid.cells.len() as f64
        );
    }
}
