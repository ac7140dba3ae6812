//! Detects Determinant-of-Hessian keypoints in the distance field of a
//! synthetic room and lists them by class.
//!
//! Run with: cargo run --release --example detect_keypoints

use locus::detect::{detect_keypoints, DetectorParams};
use locus::synth::{carve_submap, generate_world, WorldSpec};
use locus::{binarize, compute_sdf, Pose2};

fn main() {
    let spec = WorldSpec {
        seed: 5,
        extent: (20.0, 20.0),
        room_count: (4, 6),
        ..WorldSpec::default()
    };
    let world = generate_world(&spec).expect("world");

    // observe from the first free cell near the world center
    let res = world.resolution;
    let center = (10.0, 10.0);
    let viewpoint = (0..400)
        .map(|k| {
            let angle = k as f64 * 0.1;
            let radius = k as f64 * 0.02;
            (
                center.0 + radius * angle.cos(),
                center.1 + radius * angle.sin(),
            )
        })
        .find(|&(x, y)| {
            let (c, r) = world.cell_of(x, y);
            !world.is_occupied(c, r)
        })
        .expect("free viewpoint");
    let submap = carve_submap(
        &world,
        0,
        &[Pose2::new(viewpoint.0, viewpoint.1, 0.0)],
        15.0,
        (12.0, 12.0),
    )
    .expect("submap");

    let sdf = compute_sdf(&binarize(&submap.grid, 0.5)).expect("sdf");
    let params = DetectorParams {
        detection_threshold: 1e-6,
        border_margin: 7,
        ..DetectorParams::default()
    };
    let keypoints = detect_keypoints(&sdf, &params).expect("detection");

    println!("{} keypoints (strongest first):", keypoints.len());
    for kp in keypoints.iter().take(15) {
        println!(
            "  {:7} at ({:6.2}, {:6.2}) m  |det H| = {:.3e}  distance to surface = {:.2} m",
            kp.class.as_str(),
            kp.position.0 + submap.pose.x,
            kp.position.1 + submap.pose.y,
            kp.response.abs(),
            kp.sdf_value
        );
    }
    println!("(grid resolution {res} m; responses are curvature products of the smoothed field)");
}
