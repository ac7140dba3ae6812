//! Rotation-invariant keypoint descriptors.
//!
//! A circular window of the smoothed SDF around each keypoint contributes
//! gradient orientations, expressed relative to the window's dominant
//! direction, into a histogram. A weighted mean of the window's SDF values
//! and the keypoint's stationary-point class complete the descriptor.

use std::f64::consts::PI;

use crate::detect::{ExtremumClass, Keypoint};
use crate::error::{Error, Result};
use crate::sdf::SdfGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorParams {
    /// Window radius, meters.
    pub radius: f64,
    /// Bins of the relative-orientation histogram.
    pub n_bins: usize,
    /// Bins of the dominant-orientation histogram.
    pub n_orient_bins: usize,
    /// Multiplier on the window's mean SDF value, unitless per meter.
    pub distance_weight: f64,
    /// Std-dev of the spatial weighting Gaussian, as a fraction of `radius`.
    pub spatial_sigma: f64,
    /// Use an unweighted window mean for the distance term (ablation).
    pub unweighted_mean: bool,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        DescriptorParams {
            radius: 0.8,
            n_bins: 17,
            n_orient_bins: 36,
            distance_weight: 0.002,
            spatial_sigma: 0.5,
            unweighted_mean: false,
        }
    }
}

/// Histogram plus distance term; compared with [`descriptor_distance`].
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    /// Non-negative, L1-normalized relative-orientation histogram.
    pub histogram: Vec<f64>,
    /// distance_weight × weighted mean SDF over the window, unitless.
    pub distance_term: f64,
    pub class: ExtremumClass,
    /// Diagnostic only; not part of the distance metric.
    pub dominant_orientation: f64,
}

/// Per-cell gradient magnitude (meters/cell) and orientation in (−π, π].
#[derive(Debug, Clone)]
pub struct GradientField {
    pub width: u32,
    pub height: u32,
    pub magnitude: Vec<f64>,
    pub orientation: Vec<f64>,
    pub valid: Vec<bool>,
}

impl GradientField {
    #[inline]
    pub fn index(&self, col: u32, row: u32) -> usize {
        (row * self.width + col) as usize
    }
}

/// Central-difference gradients of a (smoothed) SDF.
pub fn gradient_field(sdf: &SdfGrid) -> GradientField {
    let w = sdf.width as i64;
    let h = sdf.height as i64;
    let n = (w * h) as usize;
    let mut magnitude = vec![0.0f64; n];
    let mut orientation = vec![0.0f64; n];
    let mut valid = vec![false; n];
    for r in 0..h {
        for c in 0..w {
            if c < 1 || r < 1 || c + 1 >= w || r + 1 >= h {
                continue;
            }
            let i = (r * w + c) as usize;
            let ok = [(c - 1, r), (c + 1, r), (c, r - 1), (c, r + 1)]
                .iter()
                .all(|&(cc, rr)| sdf.valid[(rr * w + cc) as usize]);
            if !ok {
                continue;
            }
            let gx = (sdf.values[i + 1] - sdf.values[i - 1]) / 2.0;
            let gy = (sdf.values[i + w as usize] - sdf.values[i - w as usize]) / 2.0;
            magnitude[i] = (gx * gx + gy * gy).sqrt();
            orientation[i] = gy.atan2(gx);
            valid[i] = true;
        }
    }
    GradientField {
        width: sdf.width,
        height: sdf.height,
        magnitude,
        orientation,
        valid,
    }
}

fn wrap_2pi(theta: f64) -> f64 {
    let t = theta % (2.0 * PI);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Iterates the disc of cells within `radius` meters of the keypoint,
/// yielding (cell index, spatial weight).
fn window_cells(
    sdf: &SdfGrid,
    keypoint: &Keypoint,
    params: &DescriptorParams,
) -> Vec<(usize, f64)> {
    let local = sdf.origin.inverse().transform(keypoint.position);
    let kx = local.0 / sdf.resolution;
    let ky = local.1 / sdf.resolution;
    let rad_cells = params.radius / sdf.resolution;
    let sigma = params.spatial_sigma * params.radius;
    let w = sdf.width as i64;
    let h = sdf.height as i64;
    let c0 = ((kx - rad_cells).floor() as i64).max(0);
    let c1 = ((kx + rad_cells).ceil() as i64).min(w - 1);
    let r0 = ((ky - rad_cells).floor() as i64).max(0);
    let r1 = ((ky + rad_cells).ceil() as i64).min(h - 1);
    let mut out = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            let dx = c as f64 - kx;
            let dy = r as f64 - ky;
            let d2 = dx * dx + dy * dy;
            if d2 > rad_cells * rad_cells {
                continue;
            }
            let d2_m = d2 * sdf.resolution * sdf.resolution;
            let weight = (-d2_m / (2.0 * sigma * sigma)).exp();
            out.push(((r * w + c) as usize, weight));
        }
    }
    out
}

/// Peak of a magnitude- and spatially-weighted orientation histogram,
/// refined by parabolic interpolation over the peak bin and its neighbors.
pub fn dominant_orientation(
    grad: &GradientField,
    sdf: &SdfGrid,
    keypoint: &Keypoint,
    params: &DescriptorParams,
) -> Result<f64> {
    let n = params.n_orient_bins;
    let bin_width = 2.0 * PI / n as f64;
    let mut hist = vec![0.0f64; n];
    let mut total = 0.0;
    for (i, w_s) in window_cells(sdf, keypoint, params) {
        if !grad.valid[i] || grad.magnitude[i] == 0.0 {
            continue;
        }
        // soft vote split between the two nearest bin centers, so the
        // parabolic refinement below recovers sub-bin peak positions
        let u = wrap_2pi(grad.orientation[i]) / bin_width - 0.5;
        let b0 = u.floor();
        let frac = u - b0;
        let b0 = (b0.rem_euclid(n as f64)) as usize % n;
        let w = grad.magnitude[i] * w_s;
        hist[b0] += w * (1.0 - frac);
        hist[(b0 + 1) % n] += w * frac;
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::ZeroGradient);
    }
    let peak = hist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let left = hist[(peak + n - 1) % n];
    let right = hist[(peak + 1) % n];
    let denom = left - 2.0 * hist[peak] + right;
    let offset = if denom.abs() < 1e-300 {
        0.0
    } else {
        (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
    };
    Ok(crate::pose::normalize_angle(
        (peak as f64 + 0.5 + offset) * bin_width,
    ))
}

/// Builds the full descriptor for one keypoint.
pub fn describe_keypoint(
    sdf: &SdfGrid,
    grad: &GradientField,
    keypoint: &Keypoint,
    params: &DescriptorParams,
) -> Result<Descriptor> {
    let dominant = dominant_orientation(grad, sdf, keypoint, params)?;
    let n = params.n_bins;
    let bin_width = 2.0 * PI / n as f64;
    let mut hist = vec![0.0f64; n];
    let mut dist_acc = 0.0;
    let mut dist_weight_acc = 0.0;
    for (i, w_s) in window_cells(sdf, keypoint, params) {
        if sdf.valid[i] {
            let w_mean = if params.unweighted_mean { 1.0 } else { w_s };
            dist_acc += w_mean * sdf.values[i];
            dist_weight_acc += w_mean;
        }
        if !grad.valid[i] || grad.magnitude[i] == 0.0 {
            continue;
        }
        let rel = wrap_2pi(grad.orientation[i] - dominant);
        let bin = ((rel / bin_width) as usize).min(n - 1);
        hist[bin] += grad.magnitude[i] * w_s;
    }
    let sum: f64 = hist.iter().sum();
    if sum <= 0.0 {
        return Err(Error::ZeroGradient);
    }
    for v in &mut hist {
        *v /= sum;
    }
    let mean_sdf = if dist_weight_acc > 0.0 {
        dist_acc / dist_weight_acc
    } else {
        0.0
    };
    Ok(Descriptor {
        histogram: hist,
        distance_term: params.distance_weight * mean_sdf,
        class: keypoint.class,
        dominant_orientation: dominant,
    })
}

/// Euclidean distance over (histogram, distance_term); `None` when the
/// stationary-point classes differ (incompatible descriptors).
pub fn descriptor_distance(a: &Descriptor, b: &Descriptor) -> Option<f64> {
    if a.class != b.class {
        return None;
    }
    debug_assert_eq!(a.histogram.len(), b.histogram.len());
    let mut acc = 0.0;
    for (x, y) in a.histogram.iter().zip(&b.histogram) {
        acc += (x - y) * (x - y);
    }
    let dd = a.distance_term - b.distance_term;
    Some((acc + dd * dd).sqrt())
}
