//! Full pairwise place recognition: two submaps of the same area, observed
//! from different viewpoints, are matched and the relative transform
//! recovered.
//!
//! Run with: cargo run --release --example describe_and_match

use locus::config::Config;
use locus::eval::ground_truth_transform;
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
        cluster_size: 2,
        jitter: 0.5,
        sensor_range: 15.0,
        anchor_separation: 12.0,
        ..OverlapPlan::default()
    };
    let dataset = generate_benchmark(&spec, 4, &plan).expect("generation");

    let mut cfg = Config::default();
    cfg.set("detection_threshold", "0.000001").unwrap();
    cfg.set("border_margin", "7").unwrap();

    // submaps 0 and 1 share a cluster (overlap); 0 and 2 do not
    for (a, b) in [(0usize, 1usize), (0, 2)] {
        let sa = &dataset.submaps[a];
        let sb = &dataset.submaps[b];
        let fa = extract_features(
            &binarize(&sa.grid, cfg.p_occ),
            &cfg.detector_params(sa.grid.resolution),
            &cfg.descriptor_params(),
        )
        .expect("features a");
        let fb = extract_features(
            &binarize(&sb.grid, cfg.p_occ),
            &cfg.detector_params(sb.grid.resolution),
            &cfg.descriptor_params(),
        )
        .expect("features b");
        let result = match_submaps(
            &fa.keypoints,
            &fa.descriptors,
            &fb.keypoints,
            &fb.descriptors,
            &cfg.match_params(),
        );
        let truth = ground_truth_transform(sa, sb);
        println!(
            "pair ({a}, {b}): {} keypoints vs {}, {} correspondences, {} inliers -> {}",
            fa.keypoints.len(),
            fb.keypoints.len(),
            result.total_correspondences,
            result.inliers.len(),
            if result.accepted { "MATCH" } else { "no match" }
        );
        if result.accepted {
            println!(
                "  recovered transform ({:6.3}, {:6.3}, {:6.3} rad), ground truth ({:6.3}, {:6.3}, {:6.3} rad)",
                result.transform.x,
                result.transform.y,
                result.transform.theta,
                truth.x,
                truth.y,
                truth.theta
            );
        }
    }
}
