//! Writes PGM images of a submap's distance field, its keypoints, and the
//! inlier links of a match against a second overlapping submap.
//!
//! Run with: cargo run --release --example render_overlay
//! Output lands in the current directory: field.pgm, keypoints.pgm, match.pgm

use locus::config::Config;
use locus::format::write_pgm;
use locus::matching::match_submaps;
use locus::pipeline::extract_features;
use locus::render::{render_keypoints, render_match, render_sdf};
use locus::synth::{generate_benchmark, OverlapPlan, WorldSpec};
use locus::{binarize, compute_sdf};

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

    let mut cfg = Config::default();
    cfg.set("detection_threshold", "0.000001").unwrap();
    cfg.set("border_margin", "7").unwrap();

    let ta = binarize(&dataset.submaps[0].grid, cfg.p_occ);
    let tb = binarize(&dataset.submaps[1].grid, cfg.p_occ);
    let sdf_a = compute_sdf(&ta).expect("sdf a");
    let sdf_b = compute_sdf(&tb).expect("sdf b");
    let fa = extract_features(&ta, &cfg.detector_params(ta.resolution), &cfg.descriptor_params())
        .expect("features a");
    let fb = extract_features(&tb, &cfg.detector_params(tb.resolution), &cfg.descriptor_params())
        .expect("features b");
    let result = match_submaps(
        &fa.keypoints,
        &fa.descriptors,
        &fb.keypoints,
        &fb.descriptors,
        &cfg.match_params(),
    );

    let field = render_sdf(&sdf_a);
    write_pgm("field.pgm".as_ref(), field.width, field.height, &field.pixels).expect("write");
    let kps = render_keypoints(&sdf_a, &fa.keypoints);
    write_pgm("keypoints.pgm".as_ref(), kps.width, kps.height, &kps.pixels).expect("write");
    let overlay = render_match(&sdf_a, &fa.keypoints, &sdf_b, &fb.keypoints, &result.inliers);
    write_pgm("match.pgm".as_ref(), overlay.width, overlay.height, &overlay.pixels)
        .expect("write");

    println!(
        "wrote field.pgm, keypoints.pgm, match.pgm ({} inliers drawn)",
        result.inliers.len()
    );
}
