//! Composition of the per-submap feature extraction stages.

use crate::describe::{describe_keypoint, gradient_field, Descriptor, DescriptorParams};
use crate::detect::{detect_on_smoothed, smooth, DetectorParams, Keypoint};
use crate::error::{Error, Result};
use crate::grid::TernaryGrid;
use crate::sdf::compute_sdf;

/// Keypoints with their descriptors, index-aligned.
#[derive(Debug, Clone, Default)]
pub struct Features {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

impl Features {
    /// Subset with SDF value at most `d_threshold`; equivalent to running
    /// the detector with that masking distance.
    pub fn masked(&self, d_threshold: f64) -> Features {
        if d_threshold.is_infinite() {
            return self.clone();
        }
        let mut out = Features::default();
        for (k, d) in self.keypoints.iter().zip(&self.descriptors) {
            if k.sdf_value <= d_threshold {
                out.keypoints.push(k.clone());
                out.descriptors.push(d.clone());
            }
        }
        out
    }
}

/// SDF → smoothing → detection → description for one ternary grid.
///
/// Keypoints whose window has no usable gradient are dropped; degenerate
/// fields (no surface, or nothing observed) propagate as errors.
pub fn extract_features(
    t: &TernaryGrid,
    detector: &DetectorParams,
    descriptor: &DescriptorParams,
) -> Result<Features> {
    let sdf = compute_sdf(t)?;
    let smoothed = smooth(&sdf, detector.sigma);
    let kps = detect_on_smoothed(&smoothed, &sdf.valid, detector)?;
    let grad = gradient_field(&smoothed);
    let mut out = Features::default();
    for kp in kps {
        match describe_keypoint(&smoothed, &grad, &kp, descriptor) {
            Ok(d) => {
                out.keypoints.push(kp);
                out.descriptors.push(d);
            }
            Err(Error::ZeroGradient) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
