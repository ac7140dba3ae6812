//! Grayscale debug rendering: SDF rasters, keypoint markers, and match
//! overlays, all as 8-bit PGM payloads.

use crate::detect::{ExtremumClass, Keypoint};
use crate::matching::Correspondence;
use crate::sdf::SdfGrid;

/// Gray level used for unobserved cells.
pub const UNKNOWN_GRAY: u8 = 128;

/// 8-bit raster with PGM-compatible layout (row 0 at the top).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn filled(width: u32, height: u32, value: u8) -> Raster {
        Raster {
            width,
            height,
            pixels: vec![value; (width * height) as usize],
        }
    }

    #[inline]
    pub fn set(&mut self, col: i64, row: i64, value: u8) {
        if col >= 0 && row >= 0 && col < self.width as i64 && row < self.height as i64 {
            self.pixels[(row * self.width as i64 + col) as usize] = value;
        }
    }

    /// Bresenham line segment.
    pub fn line(&mut self, a: (i64, i64), b: (i64, i64), value: u8) {
        let (mut x0, mut y0) = a;
        let (x1, y1) = b;
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.set(x0, y0, value);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }
}

/// Normalizes a signed distance field to [0, 255]; the zero level maps to
/// the midpoint of the span, unobserved cells to [`UNKNOWN_GRAY`].
pub fn render_sdf(sdf: &SdfGrid) -> Raster {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (v, ok) in sdf.values.iter().zip(&sdf.valid) {
        if *ok {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let mut out = Raster::filled(sdf.width, sdf.height, UNKNOWN_GRAY);
    for r in 0..sdf.height {
        for c in 0..sdf.width {
            let i = sdf.index(c, r);
            if sdf.valid[i] {
                let t = (sdf.values[i] - lo) / span;
                // flip rows: grid row 0 is the bottom, image row 0 the top
                out.set(c as i64, (sdf.height - 1 - r) as i64, (t * 255.0).round() as u8);
            }
        }
    }
    out
}

/// Grid cell coordinates (col, row) of a metric point in the SDF frame.
fn to_cell(sdf: &SdfGrid, p: (f64, f64)) -> (f64, f64) {
    let local = sdf.origin.inverse().transform(p);
    (local.0 / sdf.resolution, local.1 / sdf.resolution)
}

fn to_pixel(sdf: &SdfGrid, p: (f64, f64), x_off: i64) -> (i64, i64) {
    let (cx, cy) = to_cell(sdf, p);
    (
        cx.round() as i64 + x_off,
        (sdf.height as i64 - 1) - cy.round() as i64,
    )
}

fn marker(raster: &mut Raster, center: (i64, i64), class: ExtremumClass) {
    let (x, y) = center;
    const ARM: i64 = 3;
    match class {
        // maxima: upright cross in white
        ExtremumClass::Maximum => {
            for d in -ARM..=ARM {
                raster.set(x + d, y, 255);
                raster.set(x, y + d, 255);
            }
        }
        // minima: diagonal cross in black
        ExtremumClass::Minimum => {
            for d in -ARM..=ARM {
                raster.set(x + d, y + d, 0);
                raster.set(x + d, y - d, 0);
            }
        }
        // saddles: square outline in white
        ExtremumClass::Saddle => {
            for d in -ARM..=ARM {
                raster.set(x + d, y - ARM, 255);
                raster.set(x + d, y + ARM, 255);
                raster.set(x - ARM, y + d, 255);
                raster.set(x + ARM, y + d, 255);
            }
        }
    }
}

/// SDF raster with one marker per keypoint: `+` maxima, `x` minima,
/// `□` saddles.
pub fn render_keypoints(sdf: &SdfGrid, keypoints: &[Keypoint]) -> Raster {
    let mut raster = render_sdf(sdf);
    for kp in keypoints {
        let p = to_pixel(sdf, kp.position, 0);
        marker(&mut raster, p, kp.class);
    }
    raster
}

/// Side-by-side pair with inlier correspondences drawn as line segments,
/// the Fig.-1-style match overlay.
pub fn render_match(
    sdf_a: &SdfGrid,
    keypoints_a: &[Keypoint],
    sdf_b: &SdfGrid,
    keypoints_b: &[Keypoint],
    inliers: &[Correspondence],
) -> Raster {
    const GAP: u32 = 8;
    let ra = render_keypoints(sdf_a, keypoints_a);
    let rb = render_keypoints(sdf_b, keypoints_b);
    let width = ra.width + GAP + rb.width;
    let height = ra.height.max(rb.height);
    let mut out = Raster::filled(width, height, UNKNOWN_GRAY);
    for (src, x_off) in [(&ra, 0i64), (&rb, (ra.width + GAP) as i64)] {
        for r in 0..src.height {
            for c in 0..src.width {
                out.set(
                    c as i64 + x_off,
                    r as i64,
                    src.pixels[(r * src.width + c) as usize],
                );
            }
        }
    }
    let b_off = (ra.width + GAP) as i64;
    for m in inliers {
        let pa = to_pixel(sdf_a, keypoints_a[m.index_a].position, 0);
        let pb = to_pixel(sdf_b, keypoints_b[m.index_b].position, b_off);
        out.line(pa, pb, 255);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{binarize, OccupancyGrid};
    use crate::pose::Pose2;
    use crate::sdf::compute_sdf;

    fn small_sdf() -> SdfGrid {
        let mut g = OccupancyGrid::new_unknown(8, 8, 0.1, Pose2::identity());
        for i in 0..g.cells.len() {
            g.cells[i] = 0.1;
        }
        g.cells[0] = 0.9;
        let idx = g.index(3, 3);
        g.cells[idx] = crate::grid::UNKNOWN_SENTINEL;
        compute_sdf(&binarize(&g, 0.5)).unwrap()
    }

    #[test]
    fn sdf_raster_spans_range_and_marks_unknown() {
        let sdf = small_sdf();
        let r = render_sdf(&sdf);
        assert_eq!((r.width, r.height), (8, 8));
        assert!(r.pixels.contains(&0));
        assert!(r.pixels.contains(&255));
        // unknown cell (3,3) flips to image row 8-1-3 = 4
        assert_eq!(r.pixels[(4 * 8 + 3) as usize], UNKNOWN_GRAY);
    }

    #[test]
    fn keypoint_marker_lands_at_position() {
        let sdf = small_sdf();
        let kp = Keypoint {
            position: (0.5, 0.5), // cell (5, 5)
            cell: (5, 5),
            class: ExtremumClass::Minimum,
            response: 1.0,
            sdf_value: 0.1,
        };
        let r = render_keypoints(&sdf, &[kp]);
        // minimum draws black at the center pixel
        assert_eq!(r.pixels[((8 - 1 - 5) * 8 + 5) as usize], 0);
    }

    #[test]
    fn match_overlay_dimensions() {
        let sdf = small_sdf();
        let r = render_match(&sdf, &[], &sdf, &[], &[]);
        assert_eq!(r.width, 8 + 8 + 8);
        assert_eq!(r.height, 8);
    }

    #[test]
    fn line_endpoints_drawn() {
        let mut r = Raster::filled(10, 10, 0);
        r.line((1, 1), (8, 5), 255);
        assert_eq!(r.pixels[(1 * 10 + 1) as usize], 255);
        assert_eq!(r.pixels[(5 * 10 + 8) as usize], 255);
    }
}
