//! Free-space place recognition for 2D lidar submaps.
//!
//! The pipeline represents each submap as a signed distance field and
//! extracts features describing the geometry of both surfaces and the
//! free space between them:
//!
//! 1. **grid / format** – occupancy grid model, thresholding, container I/O.
//! 2. **sdf** – exact Euclidean distance transform, signed by occupancy.
//! 3. **detect** – Gaussian smoothing, determinant-of-Hessian keypoints,
//!    max/min/saddle classification, boundary and free-space masking.
//! 4. **describe** – rotation-invariant orientation histograms with a
//!    weighted mean-distance term.
//! 5. **matching** – ratio-test correspondence search and 2-point RANSAC
//!    for the relative SE(2) transform.
//! 6. **eval** – pair sampling, precision-recall sweeps, ablations, grid
//!    search.
//! 7. **synth** – deterministic synthetic worlds with ground-truth poses
//!    for testing and benchmarking.
//!
//! The `locus` binary exposes each stage as a subcommand; the crate's
//! `examples/` directory shows library usage per capability.

pub mod cli;
pub mod config;
pub mod describe;
pub mod detect;
pub mod error;
pub mod eval;
pub mod format;
pub mod grid;
pub mod matching;
pub mod pipeline;
pub mod pose;
pub mod render;
pub mod sdf;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{binarize, Cell, OccupancyGrid, Submap, TernaryGrid};
pub use pose::Pose2;
pub use sdf::{brute_force_sdf, compute_sdf, SdfGrid};
