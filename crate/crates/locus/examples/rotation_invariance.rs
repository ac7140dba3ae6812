//! Demonstrates rotation invariance: a submap matched against a rotated
//! copy of itself recovers the injected rotation.
//!
//! Run with: cargo run --release --example rotation_invariance

use locus::config::Config;
use locus::grid::{rotate_nearest, rotation_frame_transform};
use locus::matching::match_submaps;
use locus::pipeline::extract_features;
use locus::synth::{generate_benchmark, OverlapPlan, WorldSpec};
use locus::binarize;

fn main() {
    let spec = WorldSpec {
        seed: 10,
        extent: (50.0, 50.0),
        room_count: (14, 18),
        ..WorldSpec::default()
    };
    let plan = OverlapPlan {
        jitter: 0.5,
        sensor_range: 15.0,
        anchor_separation: 12.0,
        ..OverlapPlan::default()
    };
    let dataset = generate_benchmark(&spec, 2, &plan).expect("generation");
    let submap = &dataset.submaps[0];

    let mut cfg = Config::default();
    cfg.set("detection_threshold", "0.000001").unwrap();
    cfg.set("border_margin", "7").unwrap();

    let t = binarize(&submap.grid, cfg.p_occ);
    let base = extract_features(
        &t,
        &cfg.detector_params(submap.grid.resolution),
        &cfg.descriptor_params(),
    )
    .expect("features");

    for angle_deg in [30.0f64, 90.0, 147.0, 270.0] {
        let angle = angle_deg.to_radians();
        let rotated = rotate_nearest(&t, angle);
        let truth = rotation_frame_transform(&t, angle);
        let feats = extract_features(
            &rotated,
            &cfg.detector_params(submap.grid.resolution),
            &cfg.descriptor_params(),
        )
        .expect("rotated features");
        let result = match_submaps(
            &base.keypoints,
            &base.descriptors,
            &feats.keypoints,
            &feats.descriptors,
            &cfg.match_params(),
        );
        let err_deg = locus::pose::normalize_angle(result.transform.theta - truth.theta)
            .abs()
            .to_degrees();
        let err_m = ((result.transform.x - truth.x).powi(2)
            + (result.transform.y - truth.y).powi(2))
        .sqrt();
        println!(
            "rotation {angle_deg:5.1} deg: {} inliers of {} correspondences, angle error {err_deg:.3} deg, translation error {err_m:.3} m",
            result.inliers.len(),
            result.total_correspondences,
        );
    }
}
