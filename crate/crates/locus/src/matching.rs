//! Pairwise submap matching: ratio-test correspondences and 2-point RANSAC
//! for the relative SE(2) transform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::describe::{descriptor_distance, Descriptor};
use crate::detect::Keypoint;
use crate::error::{Error, Result};
use crate::pose::Pose2;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchParams {
    /// Ratio-test bound: accept when nearest/second-nearest < max_ratio.
    pub max_ratio: f64,
    /// Absolute distance cap when only one same-class candidate exists.
    pub singleton_cap: f64,
    /// RANSAC residual bound, meters.
    pub inlier_radius: f64,
    pub ransac_confidence: f64,
    pub ransac_max_iters: u32,
    pub min_inliers: usize,
    pub rng_seed: u64,
    /// Require nearest-neighbor agreement in both directions.
    pub mutual_check: bool,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            max_ratio: 0.75,
            singleton_cap: 0.25,
            inlier_radius: 0.3,
            ransac_confidence: 0.99,
            ransac_max_iters: 1000,
            min_inliers: 5,
            rng_seed: 0,
            mutual_check: false,
        }
    }
}

/// A putative keypoint correspondence between submaps A and B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub index_a: usize,
    pub index_b: usize,
    /// Nearest / second-nearest descriptor distance, in [0, 1].
    pub ratio: f64,
}

/// Result of matching one submap pair. `transform` maps B-frame points into
/// the A frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub transform: Pose2,
    pub inliers: Vec<Correspondence>,
    pub total_correspondences: usize,
    pub accepted: bool,
}

fn nearest_two(query: &Descriptor, set: &[Descriptor]) -> (Option<(usize, f64)>, Option<f64>) {
    let mut best: Option<(usize, f64)> = None;
    let mut second: Option<f64> = None;
    for (j, cand) in set.iter().enumerate() {
        let Some(d) = descriptor_distance(query, cand) else {
            continue;
        };
        match best {
            Some((_, bd)) if d >= bd => match second {
                Some(sd) if d >= sd => {}
                _ => second = Some(d),
            },
            _ => {
                second = best.map(|(_, bd)| bd);
                best = Some((j, d));
            }
        }
    }
    (best, second)
}

/// Class-constrained nearest-neighbor search with the ratio test.
pub fn match_descriptors(
    a: &[Descriptor],
    b: &[Descriptor],
    params: &MatchParams,
) -> Vec<Correspondence> {
    let mut out = Vec::new();
    for (i, query) in a.iter().enumerate() {
        let (best, second) = nearest_two(query, b);
        let Some((j, d1)) = best else { continue };
        let accepted = match second {
            Some(d2) => {
                let ratio = if d2 > 0.0 { d1 / d2 } else { 1.0 };
                (ratio < params.max_ratio).then_some(ratio)
            }
            // a single same-class candidate: the ratio test is undefined,
            // fall back to an absolute distance cap
            None => (d1 < params.singleton_cap).then(|| {
                (d1 / params.singleton_cap).min(1.0)
            }),
        };
        let Some(ratio) = accepted else { continue };
        if params.mutual_check {
            let (back, _) = nearest_two(&b[j], a);
            if back.map(|(k, _)| k) != Some(i) {
                continue;
            }
        }
        out.push(Correspondence {
            index_a: i,
            index_b: j,
            ratio,
        });
    }
    out
}

/// Minimal SE(2) solver: the transform mapping `p1 → q1` and the direction
/// `p2−p1 → q2−q1`. Exact for noise-free rigid pairs.
pub fn estimate_rigid_2pt(
    p1: (f64, f64),
    p2: (f64, f64),
    q1: (f64, f64),
    q2: (f64, f64),
) -> Result<Pose2> {
    let vp = (p2.0 - p1.0, p2.1 - p1.1);
    let vq = (q2.0 - q1.0, q2.1 - q1.1);
    let np = (vp.0 * vp.0 + vp.1 * vp.1).sqrt();
    if np < 1e-6 {
        return Err(Error::DegenerateSample);
    }
    let theta = vq.1.atan2(vq.0) - vp.1.atan2(vp.0);
    let (s, c) = theta.sin_cos();
    let tx = q1.0 - (c * p1.0 - s * p1.1);
    let ty = q1.1 - (s * p1.0 + c * p1.1);
    Ok(Pose2::new(tx, ty, theta))
}

/// Closed-form 2-D rigid least squares: centroid alignment plus the optimal
/// rotation from the 2×2 cross-covariance.
pub fn fit_rigid_least_squares(pairs: &[((f64, f64), (f64, f64))]) -> Option<Pose2> {
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len() as f64;
    let (mut pcx, mut pcy, mut qcx, mut qcy) = (0.0, 0.0, 0.0, 0.0);
    for &((px, py), (qx, qy)) in pairs {
        pcx += px;
        pcy += py;
        qcx += qx;
        qcy += qy;
    }
    pcx /= n;
    pcy /= n;
    qcx /= n;
    qcy /= n;
    let mut sin_acc = 0.0;
    let mut cos_acc = 0.0;
    for &((px, py), (qx, qy)) in pairs {
        let (px, py) = (px - pcx, py - pcy);
        let (qx, qy) = (qx - qcx, qy - qcy);
        cos_acc += px * qx + py * qy;
        sin_acc += px * qy - py * qx;
    }
    let theta = if sin_acc == 0.0 && cos_acc == 0.0 {
        0.0
    } else {
        sin_acc.atan2(cos_acc)
    };
    let (s, c) = theta.sin_cos();
    Some(Pose2::new(
        qcx - (c * pcx - s * pcy),
        qcy - (s * pcx + c * pcy),
        theta,
    ))
}

fn residual(t: &Pose2, pb: (f64, f64), pa: (f64, f64)) -> f64 {
    let m = t.transform(pb);
    ((m.0 - pa.0).powi(2) + (m.1 - pa.1).powi(2)).sqrt()
}

/// Seeded hypothesize-and-verify over 2-correspondence samples, with an
/// adaptive iteration count and a least-squares refit on the best inlier set.
///
/// Returns the transform mapping B points into the A frame and the final
/// inlier list; with fewer than two correspondences, identity and no inliers.
pub fn ransac_se2(
    correspondences: &[Correspondence],
    keypoints_a: &[Keypoint],
    keypoints_b: &[Keypoint],
    params: &MatchParams,
) -> (Pose2, Vec<Correspondence>) {
    let n = correspondences.len();
    if n < 2 {
        return (Pose2::identity(), Vec::new());
    }
    let pa = |c: &Correspondence| keypoints_a[c.index_a].position;
    let pb = |c: &Correspondence| keypoints_b[c.index_b].position;

    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut best_inliers: Vec<usize> = Vec::new();
    let mut required = params.ransac_max_iters as u64;
    let mut iter: u64 = 0;
    while iter < required {
        iter += 1;
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (ca, cb) = (&correspondences[i], &correspondences[j]);
        let Ok(t) = estimate_rigid_2pt(pb(ca), pb(cb), pa(ca), pa(cb)) else {
            continue;
        };
        let inliers: Vec<usize> = correspondences
            .iter()
            .enumerate()
            .filter(|(_, c)| residual(&t, pb(c), pa(c)) <= params.inlier_radius)
            .map(|(k, _)| k)
            .collect();
        if inliers.len() > best_inliers.len() {
            best_inliers = inliers;
            let w = best_inliers.len() as f64 / n as f64;
            let denom = (1.0 - w * w).max(f64::MIN_POSITIVE).ln();
            if denom < 0.0 {
                let needed = ((1.0 - params.ransac_confidence).ln() / denom).ceil();
                required = (needed as u64).min(params.ransac_max_iters as u64);
            } else {
                required = iter; // all correspondences are inliers
            }
        }
    }
    if best_inliers.len() < 2 {
        return (Pose2::identity(), Vec::new());
    }

    // refit on the inlier set, re-selecting inliers until stable so the
    // residual bound holds under the reported transform
    let mut current = best_inliers;
    let mut transform = Pose2::identity();
    for _ in 0..10 {
        let pairs: Vec<_> = current
            .iter()
            .map(|&k| (pb(&correspondences[k]), pa(&correspondences[k])))
            .collect();
        let Some(t) = fit_rigid_least_squares(&pairs) else {
            break;
        };
        transform = t;
        let next: Vec<usize> = correspondences
            .iter()
            .enumerate()
            .filter(|(_, c)| residual(&transform, pb(c), pa(c)) <= params.inlier_radius)
            .map(|(k, _)| k)
            .collect();
        if next == current || next.len() < 2 {
            current = if next.len() < 2 { current } else { next };
            break;
        }
        current = next;
    }
    // final filter with the reported transform keeps the invariant exact
    let inliers = current
        .into_iter()
        .map(|k| correspondences[k])
        .filter(|c| residual(&transform, pb(c), pa(c)) <= params.inlier_radius)
        .collect();
    (transform, inliers)
}

/// Full pairwise matching: correspondences → RANSAC → inlier-count decision.
pub fn match_submaps(
    keypoints_a: &[Keypoint],
    descriptors_a: &[Descriptor],
    keypoints_b: &[Keypoint],
    descriptors_b: &[Descriptor],
    params: &MatchParams,
) -> MatchResult {
    let correspondences = match_descriptors(descriptors_a, descriptors_b, params);
    let (transform, inliers) = ransac_se2(&correspondences, keypoints_a, keypoints_b, params);
    let accepted = inliers.len() >= params.min_inliers;
    MatchResult {
        transform,
        inliers,
        total_correspondences: correspondences.len(),
        accepted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::ExtremumClass;
    use std::f64::consts::PI;

    fn desc(hist: Vec<f64>, class: ExtremumClass) -> Descriptor {
        Descriptor {
            histogram: hist,
            distance_term: 0.0,
            class,
            dominant_orientation: 0.0,
        }
    }

    #[test]
    fn ratio_test_accepts_and_rejects() {
        // construct candidates at controlled distances from the query
        let q = desc(vec![1.0, 0.0], ExtremumClass::Maximum);
        let near = desc(vec![0.5, 0.0], ExtremumClass::Maximum); // d = 0.5
        let far = desc(vec![0.1, 0.0], ExtremumClass::Maximum); // d = 0.9
        let params = MatchParams::default();
        let m = match_descriptors(&[q.clone()], &[near, far], &params);
        assert_eq!(m.len(), 1);
        assert!((m[0].ratio - 0.5 / 0.9).abs() < 1e-12);

        let near2 = desc(vec![0.2, 0.0], ExtremumClass::Maximum); // d = 0.8
        let far2 = desc(vec![0.1, 0.0], ExtremumClass::Maximum); // d = 0.9
        let m2 = match_descriptors(&[q], &[near2, far2], &params);
        assert!(m2.is_empty(), "ratio 0.889 must be rejected");
    }

    #[test]
    fn class_constraint_blocks_matches() {
        let q = desc(vec![1.0, 0.0], ExtremumClass::Maximum);
        let s = desc(vec![1.0, 0.0], ExtremumClass::Saddle);
        let m = match_descriptors(&[q], &[s.clone(), s], &MatchParams::default());
        assert!(m.is_empty());
    }

    #[test]
    fn singleton_candidate_uses_absolute_cap() {
        let q = desc(vec![1.0, 0.0], ExtremumClass::Maximum);
        let close = desc(vec![0.9, 0.1], ExtremumClass::Maximum);
        let m = match_descriptors(&[q.clone()], &[close], &MatchParams::default());
        assert_eq!(m.len(), 1);
        let far = desc(vec![0.0, 1.0], ExtremumClass::Maximum);
        let m2 = match_descriptors(&[q], &[far], &MatchParams::default());
        assert!(m2.is_empty());
    }

    #[test]
    fn two_point_estimate_quarter_turn() {
        let t = estimate_rigid_2pt((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (1.0, 2.0)).unwrap();
        assert!((t.theta - PI / 2.0).abs() < 1e-12);
        assert!((t.x - 1.0).abs() < 1e-12);
        assert!((t.y - 1.0).abs() < 1e-12);
        let m = t.transform((1.0, 0.0));
        assert!((m.0 - 1.0).abs() < 1e-12 && (m.1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_identity_and_degenerate() {
        let t = estimate_rigid_2pt((0.3, 0.4), (1.0, 2.0), (0.3, 0.4), (1.0, 2.0)).unwrap();
        assert!(t.x.abs() < 1e-12 && t.y.abs() < 1e-12 && t.theta.abs() < 1e-12);
        assert!(matches!(
            estimate_rigid_2pt((0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (2.0, 2.0)),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn two_point_synthesize_and_recover() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let t = Pose2::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-3.0..3.0),
            );
            let p1: (f64, f64) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let p2: (f64, f64) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            if ((p1.0 - p2.0).powi(2) + (p1.1 - p2.1).powi(2)).sqrt() < 1e-3 {
                continue;
            }
            let r = estimate_rigid_2pt(p1, p2, t.transform(p1), t.transform(p2)).unwrap();
            assert!((r.x - t.x).abs() < 1e-10);
            assert!((r.y - t.y).abs() < 1e-10);
            assert!(crate::pose::normalize_angle(r.theta - t.theta).abs() < 1e-10);
        }
    }

    fn synthetic_correspondences(
        t: &Pose2,
        n_inliers: usize,
        n_outliers: usize,
        seed: u64,
    ) -> (Vec<Keypoint>, Vec<Keypoint>, Vec<Correspondence>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut kps_a = Vec::new();
        let mut kps_b = Vec::new();
        let mut corr = Vec::new();
        let mk = |p: (f64, f64)| Keypoint {
            position: p,
            cell: (0, 0),
            class: ExtremumClass::Maximum,
            response: 1.0,
            sdf_value: 1.0,
        };
        for i in 0..n_inliers + n_outliers {
            let pb = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            let pa = if i < n_inliers {
                t.transform(pb)
            } else {
                (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0))
            };
            kps_a.push(mk(pa));
            kps_b.push(mk(pb));
            corr.push(Correspondence {
                index_a: i,
                index_b: i,
                ratio: 0.5,
            });
        }
        (kps_a, kps_b, corr)
    }

    #[test]
    fn ransac_recovers_exact_transform() {
        let t = Pose2::new(1.0, -0.5, 30.0_f64.to_radians());
        let (a, b, corr) = synthetic_correspondences(&t, 20, 0, 1);
        let params = MatchParams::default();
        let (rec, inliers) = ransac_se2(&corr, &a, &b, &params);
        assert_eq!(inliers.len(), 20);
        assert!((rec.x - t.x).abs() < 1e-9);
        assert!((rec.y - t.y).abs() < 1e-9);
        assert!((rec.theta - t.theta).abs() < 1e-9);
    }

    #[test]
    fn ransac_with_outliers_matches_inlier_least_squares() {
        let t = Pose2::new(0.4, 2.0, -1.2);
        let mut ok = 0;
        for seed in 0..100u64 {
            let (a, b, corr) = synthetic_correspondences(&t, 10, 10, seed + 100);
            let mut params = MatchParams::default();
            params.rng_seed = seed;
            let (rec, _) = ransac_se2(&corr, &a, &b, &params);
            let pairs: Vec<_> = (0..10).map(|i| (b[i].position, a[i].position)).collect();
            let ls = fit_rigid_least_squares(&pairs).unwrap();
            if (rec.x - ls.x).abs() < 1e-6
                && (rec.y - ls.y).abs() < 1e-6
                && crate::pose::normalize_angle(rec.theta - ls.theta).abs() < 1e-6
            {
                ok += 1;
            }
        }
        assert!(ok >= 99, "only {ok}/100 seeds recovered the transform");
    }

    #[test]
    fn ransac_early_out_below_two_correspondences() {
        let (a, b, corr) = synthetic_correspondences(&Pose2::identity(), 1, 0, 0);
        let (t, inliers) = ransac_se2(&corr[..1], &a, &b, &MatchParams::default());
        assert_eq!(t, Pose2::identity());
        assert!(inliers.is_empty());
    }

    #[test]
    fn ransac_is_deterministic() {
        let t = Pose2::new(0.4, 2.0, -1.2);
        let (a, b, corr) = synthetic_correspondences(&t, 10, 10, 5);
        let params = MatchParams::default();
        let r1 = ransac_se2(&corr, &a, &b, &params);
        let r2 = ransac_se2(&corr, &a, &b, &params);
        assert_eq!(r1, r2);
    }

    #[test]
    fn inliers_satisfy_residual_bound() {
        let t = Pose2::new(0.4, 2.0, -1.2);
        let params = MatchParams::default();
        for seed in 0..20u64 {
            let (a, b, corr) = synthetic_correspondences(&t, 8, 12, seed);
            let (rec, inliers) = ransac_se2(&corr, &a, &b, &params);
            for c in &inliers {
                let r = residual(&rec, b[c.index_b].position, a[c.index_a].position);
                assert!(r <= params.inlier_radius);
            }
        }
    }

    #[test]
    fn min_inliers_monotonicity() {
        let t = Pose2::new(0.4, 2.0, -1.2);
        let (a, b, corr) = synthetic_correspondences(&t, 8, 4, 2);
        let mut accepted_at = Vec::new();
        for min_inliers in 1..=12 {
            let params = MatchParams {
                min_inliers,
                ..MatchParams::default()
            };
            let (_, inliers) = ransac_se2(&corr, &a, &b, &params);
            accepted_at.push(inliers.len() >= min_inliers);
        }
        // once rejection starts it never flips back to acceptance
        let first_reject = accepted_at.iter().position(|&x| !x);
        if let Some(k) = first_reject {
            assert!(accepted_at[k..].iter().all(|&x| !x));
        }
    }
}
