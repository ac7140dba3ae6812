//! Occupancy grids, ternary classification, submaps.
//!
//! Cells are stored row-major with `(col, row)` mapping to `(x, y)`; the
//! metric position of a cell is its center, with cell `(0, 0)`'s center at
//! the grid origin pose.

use crate::pose::Pose2;

/// Sentinel value encoding unobserved cells in the float payload.
pub const UNKNOWN_SENTINEL: f32 = -1.0;

/// Per-cell occupancy probability grid with an unknown sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub width: u32,
    pub height: u32,
    /// Meters per cell, > 0.
    pub resolution: f64,
    /// Pose of cell (0,0)'s center in the submap frame.
    pub origin: Pose2,
    /// Row-major; probability in [0,1] or [`UNKNOWN_SENTINEL`].
    pub cells: Vec<f32>,
}

impl OccupancyGrid {
    pub fn new_unknown(width: u32, height: u32, resolution: f64, origin: Pose2) -> Self {
        OccupancyGrid {
            width,
            height,
            resolution,
            origin,
            cells: vec![UNKNOWN_SENTINEL; (width * height) as usize],
        }
    }

    #[inline]
    pub fn index(&self, col: u32, row: u32) -> usize {
        (row * self.width + col) as usize
    }

    /// Occupancy probability, or `None` for unobserved cells.
    pub fn occupancy(&self, col: u32, row: u32) -> Option<f32> {
        let v = self.cells[self.index(col, row)];
        if v < 0.0 {
            None
        } else {
            Some(v)
        }
    }

    /// Metric center of a cell in the submap frame.
    pub fn cell_center(&self, col: u32, row: u32) -> (f64, f64) {
        self.origin
            .transform((col as f64 * self.resolution, row as f64 * self.resolution))
    }
}

/// Occupancy class after thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Occupied,
    Free,
    Unknown,
}

/// Thresholded grid; same geometry as its source [`OccupancyGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TernaryGrid {
    pub width: u32,
    pub height: u32,
    pub resolution: f64,
    pub origin: Pose2,
    pub cells: Vec<Cell>,
}

impl TernaryGrid {
    #[inline]
    pub fn index(&self, col: u32, row: u32) -> usize {
        (row * self.width + col) as usize
    }

    #[inline]
    pub fn cell(&self, col: u32, row: u32) -> Cell {
        self.cells[self.index(col, row)]
    }

    pub fn cell_center(&self, col: u32, row: u32) -> (f64, f64) {
        self.origin
            .transform((col as f64 * self.resolution, row as f64 * self.resolution))
    }
}

/// A locally consistent submap: an occupancy grid plus its global pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Submap {
    pub id: u64,
    /// Pose of the submap frame in the global frame (ground truth when known).
    pub pose: Pose2,
    pub grid: OccupancyGrid,
}

/// Thresholds occupancy probabilities into occupied/free, preserving unknowns.
///
/// The tie `p == p_occ` classifies as occupied.
pub fn binarize(grid: &OccupancyGrid, p_occ: f64) -> TernaryGrid {
    assert!(p_occ > 0.0 && p_occ < 1.0, "p_occ must be in (0, 1)");
    let cells = grid
        .cells
        .iter()
        .map(|&v| {
            if v < 0.0 {
                Cell::Unknown
            } else if f64::from(v) >= p_occ {
                Cell::Occupied
            } else {
                Cell::Free
            }
        })
        .collect();
    TernaryGrid {
        width: grid.width,
        height: grid.height,
        resolution: grid.resolution,
        origin: grid.origin,
        cells,
    }
}

/// Rotates a ternary grid by `quarter_turns * 90°` counter-clockwise about
/// the grid center. Exact: every source cell maps to exactly one target cell.
///
/// Origin and resolution are preserved; width/height swap on odd turns.
pub fn rotate90(grid: &TernaryGrid, quarter_turns: u32) -> TernaryGrid {
    let k = quarter_turns % 4;
    if k == 0 {
        return grid.clone();
    }
    let (w, h) = (grid.width, grid.height);
    let (nw, nh) = if k % 2 == 1 { (h, w) } else { (w, h) };
    let mut cells = vec![Cell::Unknown; (nw * nh) as usize];
    for row in 0..h {
        for col in 0..w {
            // CCW by 90°: (c, r) -> (w-1-... ) expressed per turn count.
            let (nc, nr) = match k {
                1 => (h - 1 - row, col),
                2 => (w - 1 - col, h - 1 - row),
                3 => (row, w - 1 - col),
                _ => unreachable!(),
            };
            cells[(nr * nw + nc) as usize] = grid.cell(col, row);
        }
    }
    TernaryGrid {
        width: nw,
        height: nh,
        resolution: grid.resolution,
        origin: grid.origin,
        cells,
    }
}

/// Rotates a ternary grid by an arbitrary angle about the metric center of
/// the grid, resampling with nearest-neighbor. Cells whose source falls
/// outside the grid become unknown.
pub fn rotate_nearest(grid: &TernaryGrid, angle: f64) -> TernaryGrid {
    let w = grid.width as i64;
    let h = grid.height as i64;
    let cx = (w - 1) as f64 / 2.0;
    let cy = (h - 1) as f64 / 2.0;
    let (s, c) = (-angle).sin_cos();
    let mut cells = vec![Cell::Unknown; (grid.width * grid.height) as usize];
    for row in 0..h {
        for col in 0..w {
            let dx = col as f64 - cx;
            let dy = row as f64 - cy;
            let sx = cx + c * dx - s * dy;
            let sy = cy + s * dx + c * dy;
            let sc = sx.round() as i64;
            let sr = sy.round() as i64;
            if sc >= 0 && sc < w && sr >= 0 && sr < h {
                cells[(row * w + col) as usize] = grid.cell(sc as u32, sr as u32);
            }
        }
    }
    TernaryGrid {
        width: grid.width,
        height: grid.height,
        resolution: grid.resolution,
        origin: grid.origin,
        cells,
    }
}

/// Transform relating the pre-rotation frame to the post-rotation frame of
/// [`rotate_nearest`] / [`rotate90`] output: a point with coordinates `p'`
/// in the rotated submap has coordinates `T · p'` in the original submap.
///
/// Rotation is about the metric center of the grid, so for the 90° variant
/// with non-square grids the center moves with the dimension swap; this
/// helper covers the common square / arbitrary-angle case.
pub fn rotation_frame_transform(grid: &TernaryGrid, angle: f64) -> Pose2 {
    let cx = grid.origin.x + (grid.width - 1) as f64 / 2.0 * grid.resolution;
    let cy = grid.origin.y + (grid.height - 1) as f64 / 2.0 * grid.resolution;
    // T = Rot(-angle) about (cx, cy)
    let rot = Pose2::new(0.0, 0.0, -angle);
    let (rx, ry) = rot.rotate((cx, cy));
    Pose2::new(cx - rx, cy - ry, -angle)
}
