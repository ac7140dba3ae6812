//! Evaluation protocol: pair sampling with rotation injection, overlap-based
//! ground truth, precision-recall sweeps, and the free-space ablation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::grid::{binarize, rotate_nearest, rotation_frame_transform, Submap};
use crate::matching::match_submaps;
use crate::pipeline::{extract_features, Features};
use crate::pose::{normalize_angle, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Match,
    NonMatch,
}

/// A sampled submap pair with its injected rotation and ground-truth label.
/// `a`/`b` index into the dataset's submap list; the rotation is applied to
/// member `b` before the pipeline runs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub a: usize,
    pub b: usize,
    pub rotation: f64,
    pub overlap: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrPoint {
    pub min_inliers: usize,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub precision: f64,
    pub recall: f64,
}

/// Precision-recall curve, points ordered by ascending inlier threshold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

/// Per-pair evaluation record.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub inliers: usize,
    pub label: Label,
    pub transform_ok: bool,
}

/// Curve plus bookkeeping used for parameter selection.
#[derive(Debug, Clone)]
pub struct EvalOutput {
    pub curve: PrCurve,
    pub outcomes: Vec<PairOutcome>,
    pub avg_keypoints: f64,
}

/// Fraction of observed cells shared between two submaps under a known
/// relative transform `T_ab` (mapping b-frame points into the a frame).
/// Denominator is the smaller observed-cell count of the two.
pub fn overlap_ratio(a: &Submap, b: &Submap, t_ab: &Pose2) -> f64 {
    let ga = &a.grid;
    let gb = &b.grid;
    let obs_a = ga.cells.iter().filter(|&&v| v >= 0.0).count();
    let obs_b = gb.cells.iter().filter(|&&v| v >= 0.0).count();
    if obs_a == 0 || obs_b == 0 {
        return 0.0;
    }
    let inv_origin_a = ga.origin.inverse();
    let mut shared = 0usize;
    for r in 0..gb.height {
        for c in 0..gb.width {
            if gb.occupancy(c, r).is_none() {
                continue;
            }
            let p_b = gb.cell_center(c, r);
            let p_a = t_ab.transform(p_b);
            let local = inv_origin_a.transform(p_a);
            let ac = (local.0 / ga.resolution).round();
            let ar = (local.1 / ga.resolution).round();
            if ac < 0.0 || ar < 0.0 || ac >= ga.width as f64 || ar >= ga.height as f64 {
                continue;
            }
            if ga.occupancy(ac as u32, ar as u32).is_some() {
                shared += 1;
            }
        }
    }
    shared as f64 / obs_a.min(obs_b) as f64
}

/// Ground-truth relative transform between two submaps from their poses.
pub fn ground_truth_transform(a: &Submap, b: &Submap) -> Pose2 {
    a.pose.inverse().compose(&b.pose)
}

/// Samples `n` distinct unordered pairs (all pairs when fewer exist), labels
/// them from ground-truth overlap, and assigns each a uniform random
/// rotation for the second member. Deterministic per seed.
pub fn sample_pairs(
    submaps: &[Submap],
    n: usize,
    rng_seed: u64,
    overlap_threshold: f64,
) -> Result<Vec<LabeledPair>> {
    if submaps.len() < 2 {
        return Err(Error::EmptyDataset);
    }
    let k = submaps.len();
    let mut all: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let take = n.min(all.len());
    // partial Fisher-Yates: the first `take` entries are the sample
    for i in 0..take {
        let j = rng.gen_range(i..all.len());
        all.swap(i, j);
    }
    let mut pairs = Vec::with_capacity(take);
    for &(a, b) in &all[..take] {
        let rotation = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        // labels come from ground-truth poses before rotation injection
        let overlap = overlap_ratio(
            &submaps[a],
            &submaps[b],
            &ground_truth_transform(&submaps[a], &submaps[b]),
        );
        pairs.push(LabeledPair {
            a,
            b,
            rotation,
            overlap,
            label: if overlap >= overlap_threshold {
                Label::Match
            } else {
                Label::NonMatch
            },
        });
    }
    Ok(pairs)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Per-pair RANSAC seed, independent of evaluation order and scheduling.
pub fn pair_seed(rng_seed: u64, pair_index: usize) -> u64 {
    splitmix64(rng_seed ^ (pair_index as u64).wrapping_mul(0xA24BAED4963EE407))
}

fn transform_within(recovered: &Pose2, truth: &Pose2, tol_trans: f64, tol_rot_rad: f64) -> bool {
    let dt = ((recovered.x - truth.x).powi(2) + (recovered.y - truth.y).powi(2)).sqrt();
    let dr = normalize_angle(recovered.theta - truth.theta).abs();
    dt <= tol_trans && dr <= tol_rot_rad
}

/// Runs the full pipeline once per pair and sweeps the inlier threshold into
/// one PR curve per requested masking distance. Keypoints are extracted
/// unmasked and filtered per distance, which is equivalent to re-running the
/// detector at each `d_threshold`.
pub fn evaluate_masked(
    submaps: &[Submap],
    pairs: &[LabeledPair],
    config: &Config,
    d_thresholds: &[f64],
    jobs: Option<usize>,
) -> Result<Vec<EvalOutput>> {
    let run = || evaluate_masked_inner(submaps, pairs, config, d_thresholds);
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn evaluate_masked_inner(
    submaps: &[Submap],
    pairs: &[LabeledPair],
    config: &Config,
    d_thresholds: &[f64],
) -> Result<Vec<EvalOutput>> {
    let descriptor = config.descriptor_params();
    let detector_any = |resolution: f64| {
        let mut d = config.detector_params(resolution);
        d.d_threshold = f64::INFINITY;
        d
    };
    // unrotated features per submap, computed once
    let used_as_a: Vec<bool> = {
        let mut v = vec![false; submaps.len()];
        for p in pairs {
            v[p.a] = true;
        }
        v
    };
    let features_a: Vec<Option<Features>> = submaps
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            if !used_as_a[i] {
                return None;
            }
            let t = binarize(&s.grid, config.p_occ);
            extract_features(&t, &detector_any(s.grid.resolution), &descriptor).ok()
        })
        .collect();

    let tol_rot = config.pose_tol_rot_deg.to_radians();
    let per_pair: Vec<Vec<PairOutcome>> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, pair)| {
            let sa = &submaps[pair.a];
            let sb = &submaps[pair.b];
            let tb = binarize(&sb.grid, config.p_occ);
            let rotated = rotate_nearest(&tb, pair.rotation);
            let fb = extract_features(
                &rotated,
                &detector_any(sb.grid.resolution),
                &descriptor,
            )
            .ok();
            let truth = ground_truth_transform(sa, sb)
                .compose(&rotation_frame_transform(&tb, pair.rotation));
            let mut params = config.match_params();
            params.rng_seed = pair_seed(config.rng_seed, idx);
            d_thresholds
                .iter()
                .map(|&d| {
                    let (Some(fa), Some(fb)) = (&features_a[pair.a], &fb) else {
                        // pipeline failure counts as a rejection
                        return PairOutcome {
                            inliers: 0,
                            label: pair.label,
                            transform_ok: false,
                        };
                    };
                    let fa = fa.masked(d);
                    let fb = fb.masked(d);
                    let result = match_submaps(
                        &fa.keypoints,
                        &fa.descriptors,
                        &fb.keypoints,
                        &fb.descriptors,
                        &params,
                    );
                    PairOutcome {
                        inliers: result.inliers.len(),
                        label: pair.label,
                        transform_ok: transform_within(
                            &result.transform,
                            &truth,
                            config.pose_tol_trans,
                            tol_rot,
                        ),
                    }
                })
                .collect()
        })
        .collect();

    let kp_counts: f64 = features_a
        .iter()
        .flatten()
        .map(|f| f.keypoints.len() as f64)
        .sum::<f64>()
        / features_a.iter().flatten().count().max(1) as f64;

    Ok((0..d_thresholds.len())
        .map(|di| {
            let outcomes: Vec<PairOutcome> =
                per_pair.iter().map(|v| v[di].clone()).collect();
            EvalOutput {
                curve: sweep_curve(&outcomes, config.decision_only),
                outcomes,
                avg_keypoints: kp_counts,
            }
        })
        .collect())
}

/// Sweeps `min_inliers` over the recorded inlier counts.
pub fn sweep_curve(outcomes: &[PairOutcome], decision_only: bool) -> PrCurve {
    let n_match = outcomes.iter().filter(|o| o.label == Label::Match).count();
    let mut thresholds: Vec<usize> = outcomes.iter().map(|o| o.inliers).collect();
    thresholds.push(1);
    thresholds.sort_unstable();
    thresholds.dedup();
    let points = thresholds
        .into_iter()
        .filter(|&t| t > 0)
        .map(|t| {
            let mut tp = 0;
            let mut fp = 0;
            for o in outcomes {
                if o.inliers < t {
                    continue;
                }
                let correct = o.label == Label::Match && (decision_only || o.transform_ok);
                if correct {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
            let fneg = n_match - tp.min(n_match);
            PrPoint {
                min_inliers: t,
                true_pos: tp,
                false_pos: fp,
                false_neg: fneg,
                precision: if tp + fp == 0 {
                    1.0
                } else {
                    tp as f64 / (tp + fp) as f64
                },
                recall: if n_match == 0 {
                    0.0
                } else {
                    tp as f64 / n_match as f64
                },
            }
        })
        .collect();
    PrCurve { points }
}

/// Single-setting evaluation at the config's own `d_threshold`.
pub fn evaluate(
    submaps: &[Submap],
    pairs: &[LabeledPair],
    config: &Config,
    jobs: Option<usize>,
) -> Result<EvalOutput> {
    Ok(evaluate_masked(submaps, pairs, config, &[config.d_threshold], jobs)?
        .remove(0))
}

/// Maximum recall over curve points with precision at least `target`.
pub fn recall_at_precision(curve: &PrCurve, target_precision: f64) -> Result<f64> {
    if curve.points.is_empty() {
        return Err(Error::EmptyCurve);
    }
    Ok(curve
        .points
        .iter()
        .filter(|p| p.precision >= target_precision)
        .map(|p| p.recall)
        .fold(0.0, f64::max))
}

/// One evaluation per masking distance plus the unmasked baseline, in the
/// order given followed by infinity.
pub fn ablation_free_space(
    submaps: &[Submap],
    pairs: &[LabeledPair],
    config: &Config,
    d_thresholds: &[f64],
    jobs: Option<usize>,
) -> Result<Vec<(f64, EvalOutput)>> {
    let mut all: Vec<f64> = d_thresholds.to_vec();
    all.push(f64::INFINITY);
    let outputs = evaluate_masked(submaps, pairs, config, &all, jobs)?;
    Ok(all.into_iter().zip(outputs).collect())
}

/// Exhaustive search over a finite parameter grid, maximizing recall at
/// precision 1.0. Ties break toward fewer average keypoints per submap,
/// then toward earlier enumeration (lexicographic parameter order).
pub fn grid_search(
    submaps: &[Submap],
    pairs: &[LabeledPair],
    base: &Config,
    grid: &[(String, Vec<String>)],
    jobs: Option<usize>,
) -> Result<(Config, f64)> {
    if grid.iter().any(|(_, vals)| vals.is_empty()) {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<(Config, f64, f64)> = None;
    let mut indices = vec![0usize; grid.len()];
    loop {
        let mut cfg = base.clone();
        for (k, &vi) in indices.iter().enumerate() {
            cfg.set(&grid[k].0, &grid[k].1[vi])?;
        }
        let out = evaluate(submaps, pairs, &cfg, jobs)?;
        let score = recall_at_precision(&out.curve, 1.0)?;
        let better = match &best {
            None => true,
            Some((_, bs, bk)) => {
                score > *bs || (score == *bs && out.avg_keypoints < *bk)
            }
        };
        if better {
            best = Some((cfg, score, out.avg_keypoints));
        }
        // advance the cartesian counter
        let mut k = grid.len();
        loop {
            if k == 0 {
                let (cfg, score, _) = best.unwrap();
                return Ok((cfg, score));
            }
            k -= 1;
            indices[k] += 1;
            if indices[k] < grid[k].1.len() {
                break;
            }
            indices[k] = 0;
        }
    }
}
