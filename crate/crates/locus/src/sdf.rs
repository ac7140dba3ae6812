//! Signed Euclidean distance fields over ternary grids.
//!
//! Distances are measured between cell centers: a free cell's value is the
//! exact Euclidean distance to the nearest occupied cell (positive), an
//! occupied cell's value is the distance to the nearest free cell (negative).
//! Unknown cells carry no geometry: they neither act as surface nor block
//! distance propagation, and are flagged invalid in the output mask.

use crate::error::{Error, Result};
use crate::grid::{Cell, TernaryGrid};
use crate::pose::Pose2;

/// Signed distance samples with a validity mask marking observed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    pub width: u32,
    pub height: u32,
    pub resolution: f64,
    pub origin: Pose2,
    /// Signed distance in meters, row-major. Unspecified where `valid` is false.
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl SdfGrid {
    #[inline]
    pub fn index(&self, col: u32, row: u32) -> usize {
        (row * self.width + col) as usize
    }

    #[inline]
    pub fn value(&self, col: u32, row: u32) -> f64 {
        self.values[self.index(col, row)]
    }

    #[inline]
    pub fn is_valid(&self, col: u32, row: u32) -> bool {
        self.valid[self.index(col, row)]
    }

    pub fn cell_center(&self, col: u32, row: u32) -> (f64, f64) {
        self.origin
            .transform((col as f64 * self.resolution, row as f64 * self.resolution))
    }

    /// Bilinear sample at fractional cell coordinates; `None` if any corner
    /// of the interpolation cell is invalid or out of bounds.
    pub fn sample_cells(&self, cx: f64, cy: f64) -> Option<f64> {
        if cx < 0.0 || cy < 0.0 {
            return None;
        }
        let c0 = cx.floor() as u32;
        let r0 = cy.floor() as u32;
        let c1 = (c0 + 1).min(self.width.saturating_sub(1));
        let r1 = (r0 + 1).min(self.height.saturating_sub(1));
        if c0 >= self.width || r0 >= self.height {
            return None;
        }
        for (c, r) in [(c0, r0), (c1, r0), (c0, r1), (c1, r1)] {
            if !self.is_valid(c, r) {
                return None;
            }
        }
        let fx = cx - c0 as f64;
        let fy = cy - r0 as f64;
        let v00 = self.value(c0, r0);
        let v10 = self.value(c1, r0);
        let v01 = self.value(c0, r1);
        let v11 = self.value(c1, r1);
        Some(v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy)
    }
}

fn check_classes(t: &TernaryGrid) -> Result<()> {
    let mut occ = false;
    let mut free = false;
    for &c in &t.cells {
        match c {
            Cell::Occupied => occ = true,
            Cell::Free => free = true,
            Cell::Unknown => {}
        }
        if occ && free {
            return Ok(());
        }
    }
    if !occ && !free {
        Err(Error::EmptyField)
    } else if !occ {
        Err(Error::DegenerateField { missing: "OCCUPIED" })
    } else {
        Err(Error::DegenerateField { missing: "FREE" })
    }
}

/// Exact squared Euclidean distance transform with nearest-site tracking.
///
/// Per-column nearest-feature scan followed by the lower-envelope parabola
/// sweep along rows. Squared distances are integers, so results are exact
/// in f64.
fn edt_sites(feature: &[bool], w: usize, h: usize) -> (Vec<f64>, Vec<(u32, u32)>) {
    const INF: f64 = f64::INFINITY;
    // phase 1: for every cell, nearest feature row within its own column
    let mut col_d2 = vec![INF; w * h];
    let mut col_site = vec![u32::MAX; w * h];
    for c in 0..w {
        let mut last: Option<usize> = None;
        for r in 0..h {
            if feature[r * w + c] {
                last = Some(r);
            }
            if let Some(fr) = last {
                let d = (r - fr) as f64;
                col_d2[r * w + c] = d * d;
                col_site[r * w + c] = fr as u32;
            }
        }
        last = None;
        for r in (0..h).rev() {
            if feature[r * w + c] {
                last = Some(r);
            }
            if let Some(fr) = last {
                let d = (fr - r) as f64;
                let d2 = d * d;
                if d2 < col_d2[r * w + c] {
                    col_d2[r * w + c] = d2;
                    col_site[r * w + c] = fr as u32;
                }
            }
        }
    }
    // phase 2: 1-D lower envelope along each row
    let mut dist2 = vec![INF; w * h];
    let mut site = vec![(u32::MAX, u32::MAX); w * h];
    let mut v = vec![0usize; w]; // parabola locations
    let mut z = vec![0.0f64; w + 1]; // envelope boundaries
    for r in 0..h {
        let f = |c: usize| col_d2[r * w + c];
        let intersect = |q: usize, p: usize| {
            ((f(q) + (q * q) as f64) - (f(p) + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
        };
        // columns with no feature carry infinite parabolas; skip them
        let mut k = 0usize;
        let mut started = false;
        for q in 0..w {
            if f(q).is_infinite() {
                continue;
            }
            if !started {
                v[0] = q;
                z[0] = -INF;
                z[1] = INF;
                started = true;
                continue;
            }
            let mut s = intersect(q, v[k]);
            while s <= z[k] {
                k -= 1; // safe: z[0] = -inf, finite s never reaches it
                s = intersect(q, v[k]);
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = INF;
        }
        if !started {
            continue; // no feature reachable in this row
        }
        let mut k = 0usize;
        for q in 0..w {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            let dx = q as f64 - p as f64;
            dist2[r * w + q] = dx * dx + f(p);
            site[r * w + q] = (p as u32, col_site[r * w + p]);
        }
    }
    (dist2, site)
}

/// Computes the signed distance field with an O(N) per-dimension exact EDT.
pub fn compute_sdf(t: &TernaryGrid) -> Result<SdfGrid> {
    Ok(compute_sdf_with_sites(t)?.0)
}

/// As [`compute_sdf`], additionally returning for each valid cell the grid
/// coordinates of its nearest opposite-class cell.
pub fn compute_sdf_with_sites(t: &TernaryGrid) -> Result<(SdfGrid, Vec<(u32, u32)>)> {
    check_classes(t)?;
    let w = t.width as usize;
    let h = t.height as usize;
    let occ: Vec<bool> = t.cells.iter().map(|&c| c == Cell::Occupied).collect();
    let free: Vec<bool> = t.cells.iter().map(|&c| c == Cell::Free).collect();
    let (d2_occ, site_occ) = edt_sites(&occ, w, h);
    let (d2_free, site_free) = edt_sites(&free, w, h);
    let mut values = vec![0.0f64; w * h];
    let mut valid = vec![false; w * h];
    let mut sites = vec![(u32::MAX, u32::MAX); w * h];
    for i in 0..w * h {
        match t.cells[i] {
            Cell::Free => {
                values[i] = d2_occ[i].sqrt() * t.resolution;
                valid[i] = true;
                sites[i] = site_occ[i];
            }
            Cell::Occupied => {
                values[i] = -d2_free[i].sqrt() * t.resolution;
                valid[i] = true;
                sites[i] = site_free[i];
            }
            Cell::Unknown => {}
        }
    }
    Ok((
        SdfGrid {
            width: t.width,
            height: t.height,
            resolution: t.resolution,
            origin: t.origin,
            values,
            valid,
        },
        sites,
    ))
}

/// Exhaustive O(N²) signed distance field; the test oracle for [`compute_sdf`].
pub fn brute_force_sdf(t: &TernaryGrid) -> Result<SdfGrid> {
    check_classes(t)?;
    let w = t.width as i64;
    let h = t.height as i64;
    let occ: Vec<(i64, i64)> = iter_class(t, Cell::Occupied);
    let free: Vec<(i64, i64)> = iter_class(t, Cell::Free);
    let mut values = vec![0.0f64; (w * h) as usize];
    let mut valid = vec![false; (w * h) as usize];
    for r in 0..h {
        for c in 0..w {
            let i = (r * w + c) as usize;
            let targets = match t.cells[i] {
                Cell::Free => &occ,
                Cell::Occupied => &free,
                Cell::Unknown => continue,
            };
            let mut best = f64::INFINITY;
            for &(tc, tr) in targets {
                let dx = (tc - c) as f64;
                let dy = (tr - r) as f64;
                let d2 = dx * dx + dy * dy;
                if d2 < best {
                    best = d2;
                }
            }
            let d = best.sqrt() * t.resolution;
            values[i] = if t.cells[i] == Cell::Free { d } else { -d };
            valid[i] = true;
        }
    }
    Ok(SdfGrid {
        width: t.width,
        height: t.height,
        resolution: t.resolution,
        origin: t.origin,
        values,
        valid,
    })
}

fn iter_class(t: &TernaryGrid, class: Cell) -> Vec<(i64, i64)> {
    let w = t.width as i64;
    t.cells
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == class)
        .map(|(i, _)| (i as i64 % w, i as i64 / w))
        .collect()
}
