//! Flat key=value configuration covering every pipeline parameter.
//!
//! Unknown keys are rejected; missing keys take the documented defaults.

use std::fmt;
use std::path::Path;

use crate::describe::DescriptorParams;
use crate::detect::DetectorParams;
use crate::error::{Error, Result};
use crate::matching::MatchParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    // detector
    pub sigma: f64,
    pub detection_threshold: f64,
    pub nms_radius: u32,
    /// `None` derives ⌈3σ⌉ + descriptor window radius in cells.
    pub border_margin: Option<u32>,
    pub d_threshold: f64,
    // descriptor
    pub radius: f64,
    pub n_bins: usize,
    pub n_orient_bins: usize,
    pub distance_weight: f64,
    pub spatial_sigma: f64,
    pub unweighted_mean: bool,
    // matching
    pub max_ratio: f64,
    pub singleton_cap: f64,
    pub inlier_radius: f64,
    pub ransac_confidence: f64,
    pub ransac_max_iters: u32,
    pub min_inliers: usize,
    pub mutual_check: bool,
    pub rng_seed: u64,
    // evaluation
    pub p_occ: f64,
    pub overlap_threshold: f64,
    pub pose_tol_trans: f64,
    pub pose_tol_rot_deg: f64,
    pub decision_only: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            sigma: 2.0,
            detection_threshold: 0.0025,
            nms_radius: 2,
            border_margin: None,
            d_threshold: f64::INFINITY,
            radius: 0.8,
            n_bins: 17,
            n_orient_bins: 36,
            distance_weight: 0.002,
            spatial_sigma: 0.5,
            unweighted_mean: false,
            max_ratio: 0.75,
            singleton_cap: 0.25,
            inlier_radius: 0.3,
            ransac_confidence: 0.99,
            ransac_max_iters: 1000,
            min_inliers: 5,
            mutual_check: false,
            rng_seed: 0,
            p_occ: 0.5,
            overlap_threshold: 0.3,
            pose_tol_trans: 0.5,
            pose_tol_rot_deg: 5.0,
            decision_only: false,
        }
    }
}

fn parse_val<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for key `{key}`")))
}

impl Config {
    /// Applies one key=value assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "sigma" => self.sigma = parse_val(key, value)?,
            "detection_threshold" => self.detection_threshold = parse_val(key, value)?,
            "nms_radius" => self.nms_radius = parse_val(key, value)?,
            "border_margin" => {
                self.border_margin = if value == "auto" {
                    None
                } else {
                    Some(parse_val(key, value)?)
                }
            }
            "d_threshold" => {
                self.d_threshold = if value == "inf" {
                    f64::INFINITY
                } else {
                    parse_val(key, value)?
                }
            }
            "radius" => self.radius = parse_val(key, value)?,
            "n_bins" => self.n_bins = parse_val(key, value)?,
            "n_orient_bins" => self.n_orient_bins = parse_val(key, value)?,
            "distance_weight" => self.distance_weight = parse_val(key, value)?,
            "spatial_sigma" => self.spatial_sigma = parse_val(key, value)?,
            "unweighted_mean" => self.unweighted_mean = parse_val(key, value)?,
            "max_ratio" => self.max_ratio = parse_val(key, value)?,
            "singleton_cap" => self.singleton_cap = parse_val(key, value)?,
            "inlier_radius" => self.inlier_radius = parse_val(key, value)?,
            "ransac_confidence" => self.ransac_confidence = parse_val(key, value)?,
            "ransac_max_iters" => self.ransac_max_iters = parse_val(key, value)?,
            "min_inliers" => self.min_inliers = parse_val(key, value)?,
            "mutual_check" => self.mutual_check = parse_val(key, value)?,
            "rng_seed" => self.rng_seed = parse_val(key, value)?,
            "p_occ" => self.p_occ = parse_val(key, value)?,
            "overlap_threshold" => self.overlap_threshold = parse_val(key, value)?,
            "pose_tol_trans" => self.pose_tol_trans = parse_val(key, value)?,
            "pose_tol_rot_deg" => self.pose_tol_rot_deg = parse_val(key, value)?,
            "decision_only" => self.decision_only = parse_val(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        let checks: [(bool, &str); 8] = [
            (self.sigma > 0.0, "sigma must be > 0"),
            (self.detection_threshold > 0.0, "detection_threshold must be > 0"),
            (self.nms_radius >= 1, "nms_radius must be >= 1"),
            (self.d_threshold > 0.0, "d_threshold must be > 0"),
            (self.radius > 0.0, "radius must be > 0"),
            (self.n_bins >= 2 && self.n_orient_bins >= 2, "bin counts must be >= 2"),
            (
                self.max_ratio > 0.0 && self.max_ratio < 1.0,
                "max_ratio must be in (0, 1)",
            ),
            (self.p_occ > 0.0 && self.p_occ < 1.0, "p_occ must be in (0, 1)"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Config(msg.into()));
            }
        }
        Ok(())
    }

    /// Parses a flat key=value text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text)
    }

    /// Detector parameters at a given grid resolution; the border margin
    /// default guarantees valid support for smoothing plus description.
    pub fn detector_params(&self, resolution: f64) -> DetectorParams {
        let margin = self.border_margin.unwrap_or_else(|| {
            (3.0 * self.sigma).ceil() as u32 + (self.radius / resolution).ceil() as u32
        });
        DetectorParams {
            sigma: self.sigma,
            detection_threshold: self.detection_threshold,
            nms_radius: self.nms_radius,
            border_margin: margin,
            d_threshold: self.d_threshold,
        }
    }

    pub fn descriptor_params(&self) -> DescriptorParams {
        DescriptorParams {
            radius: self.radius,
            n_bins: self.n_bins,
            n_orient_bins: self.n_orient_bins,
            distance_weight: self.distance_weight,
            spatial_sigma: self.spatial_sigma,
            unweighted_mean: self.unweighted_mean,
        }
    }

    pub fn match_params(&self) -> MatchParams {
        MatchParams {
            max_ratio: self.max_ratio,
            singleton_cap: self.singleton_cap,
            inlier_radius: self.inlier_radius,
            ransac_confidence: self.ransac_confidence,
            ransac_max_iters: self.ransac_max_iters,
            min_inliers: self.min_inliers,
            rng_seed: self.rng_seed,
            mutual_check: self.mutual_check,
        }
    }
}

impl fmt::Display for Config {
    /// Fully resolved configuration in the same key=value syntax it parses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sigma = {}", self.sigma)?;
        writeln!(f, "detection_threshold = {}", self.detection_threshold)?;
        writeln!(f, "nms_radius = {}", self.nms_radius)?;
        match self.border_margin {
            Some(m) => writeln!(f, "border_margin = {m}")?,
            None => writeln!(f, "border_margin = auto")?,
        }
        if self.d_threshold.is_infinite() {
            writeln!(f, "d_threshold = inf")?;
        } else {
            writeln!(f, "d_threshold = {}", self.d_threshold)?;
        }
        writeln!(f, "radius = {}", self.radius)?;
        writeln!(f, "n_bins = {}", self.n_bins)?;
        writeln!(f, "n_orient_bins = {}", self.n_orient_bins)?;
        writeln!(f, "distance_weight = {}", self.distance_weight)?;
        writeln!(f, "spatial_sigma = {}", self.spatial_sigma)?;
        writeln!(f, "unweighted_mean = {}", self.unweighted_mean)?;
        writeln!(f, "max_ratio = {}", self.max_ratio)?;
        writeln!(f, "singleton_cap = {}", self.singleton_cap)?;
        writeln!(f, "inlier_radius = {}", self.inlier_radius)?;
        writeln!(f, "ransac_confidence = {}", self.ransac_confidence)?;
        writeln!(f, "ransac_max_iters = {}", self.ransac_max_iters)?;
        writeln!(f, "min_inliers = {}", self.min_inliers)?;
        writeln!(f, "mutual_check = {}", self.mutual_check)?;
        writeln!(f, "rng_seed = {}", self.rng_seed)?;
        writeln!(f, "p_occ = {}", self.p_occ)?;
        writeln!(f, "overlap_threshold = {}", self.overlap_threshold)?;
        writeln!(f, "pose_tol_trans = {}", self.pose_tol_trans)?;
        writeln!(f, "pose_tol_rot_deg = {}", self.pose_tol_rot_deg)?;
        writeln!(f, "decision_only = {}", self.decision_only)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_settings() {
        let c = Config::default();
        assert_eq!(c.radius, 0.8);
        assert_eq!(c.n_bins, 17);
        assert_eq!(c.distance_weight, 0.002);
        assert_eq!(c.detection_threshold, 0.0025);
        assert_eq!(c.max_ratio, 0.75);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(
            Config::parse("no_such_key = 1"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn overrides_and_comments() {
        let c = Config::parse("sigma = 1.5 # tighter\nd_threshold = inf\nmin_inliers = 7\n")
            .unwrap();
        assert_eq!(c.sigma, 1.5);
        assert!(c.d_threshold.is_infinite());
        assert_eq!(c.min_inliers, 7);
    }

    #[test]
    fn display_round_trips() {
        let mut c = Config::default();
        c.set("sigma", "1.25").unwrap();
        c.set("border_margin", "12").unwrap();
        let text = c.to_string();
        assert_eq!(Config::parse(&text).unwrap(), c);
    }

    #[test]
    fn auto_border_margin_covers_support() {
        let c = Config::default();
        let p = c.detector_params(0.05);
        // ceil(3 * 2.0) + ceil(0.8 / 0.05) = 6 + 16
        assert_eq!(p.border_margin, 22);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(Config::parse("sigma = -1").is_err());
        assert!(Config::parse("max_ratio = 1.5").is_err());
        assert!(Config::parse("p_occ = 0").is_err());
    }
}
