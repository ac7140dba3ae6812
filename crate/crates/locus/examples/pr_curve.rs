//! Runs the full evaluation protocol on a small synthetic benchmark and
//! prints the resulting precision-recall curve.
//!
//! Run with: cargo run --release --example pr_curve

use locus::config::Config;
use locus::eval::{evaluate, recall_at_precision, sample_pairs, Label};
use locus::synth::{generate_benchmark, OverlapPlan, WorldSpec};

fn main() {
    let spec = WorldSpec {
        seed: 10,
        extent: (50.0, 50.0),
        room_count: (14, 18),
        ..WorldSpec::default()
    };
    let plan = OverlapPlan {
        cluster_size: 6,
        jitter: 0.5,
        sensor_range: 15.0,
        anchor_separation: 12.0,
        ..OverlapPlan::default()
    };
    let dataset = generate_benchmark(&spec, 12, &plan).expect("generation");

    let mut cfg = Config::default();
    cfg.set("detection_threshold", "0.000001").unwrap();
    cfg.set("border_margin", "7").unwrap();
    cfg.rng_seed = 1;

    let pairs = sample_pairs(&dataset.submaps, 66, cfg.rng_seed, cfg.overlap_threshold)
        .expect("pairs");
    let n_match = pairs.iter().filter(|p| p.label == Label::Match).count();
    println!(
        "{} pairs sampled, {} labeled MATCH (overlap >= {})",
        pairs.len(),
        n_match,
        cfg.overlap_threshold
    );

    let output = evaluate(&dataset.submaps, &pairs, &cfg, None).expect("evaluation");
    println!("min_inliers  tp  fp  fn  precision  recall");
    for p in &output.curve.points {
        println!(
            "{:>11} {:>3} {:>3} {:>3} {:>10.3} {:>7.3}",
            p.min_inliers, p.true_pos, p.false_pos, p.false_neg, p.precision, p.recall
        );
    }
    let r = recall_at_precision(&output.curve, 1.0).expect("curve");
    println!("\nrecall at precision 1.0: {r:.3}");
}
