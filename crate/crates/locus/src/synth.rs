//! Deterministic synthetic worlds and submaps with exact ground truth.
//!
//! Worlds are axis-aligned rooms joined by corridors plus convex clutter,
//! rasterized onto a boolean occupancy grid. Submaps are carved by
//! cell-center ray casting from a set of viewpoints, reproducing the
//! observed/unknown structure a SLAM front-end would deliver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{OccupancyGrid, Submap};
use crate::pose::Pose2;

/// Occupancy probability written into observed cells.
pub const P_OCCUPIED: f32 = 0.9;
pub const P_FREE: f32 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    pub seed: u64,
    /// World extent in meters (x, y).
    pub extent: (f64, f64),
    pub resolution: f64,
    pub room_count: (u32, u32),
    /// Room side length range, meters.
    pub room_size: (f64, f64),
    pub corridor_width: (f64, f64),
    /// Obstacles per square meter of free space.
    pub clutter_density: f64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        WorldSpec {
            seed: 0,
            extent: (30.0, 30.0),
            resolution: 0.05,
            room_count: (4, 7),
            room_size: (4.0, 7.0),
            corridor_width: (0.8, 1.6),
            clutter_density: 0.04,
        }
    }
}

/// Rasterized world: `occupied[i]` is true for solid cells. The world frame
/// has cell (0,0)'s center at the origin.
#[derive(Debug, Clone)]
pub struct WorldMap {
    pub width: u32,
    pub height: u32,
    pub resolution: f64,
    pub occupied: Vec<bool>,
}

impl WorldMap {
    #[inline]
    pub fn index(&self, col: u32, row: u32) -> usize {
        (row * self.width + col) as usize
    }

    #[inline]
    pub fn is_occupied(&self, col: i64, row: i64) -> bool {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            return true; // outside the map counts as solid
        }
        self.occupied[(row * self.width as i64 + col) as usize]
    }

    /// Cell index containing a metric point.
    pub fn cell_of(&self, x: f64, y: f64) -> (i64, i64) {
        (
            (x / self.resolution).round() as i64,
            (y / self.resolution).round() as i64,
        )
    }
}

/// A generated dataset: the world plus submaps with exact poses.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub world: WorldMap,
    pub submaps: Vec<Submap>,
    pub spec: WorldSpec,
}

/// How [`generate_benchmark`] arranges submap windows.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapPlan {
    /// Submaps carved around each anchor; intra-cluster pairs overlap.
    pub cluster_size: usize,
    /// Window extent per submap, meters.
    pub window: (f64, f64),
    pub sensor_range: f64,
    /// Max window-center offset within a cluster, meters.
    pub jitter: f64,
    /// Minimum anchor separation, meters.
    pub anchor_separation: f64,
}

impl Default for OverlapPlan {
    fn default() -> Self {
        OverlapPlan {
            cluster_size: 2,
            window: (10.0, 10.0),
            sensor_range: 12.0,
            jitter: 1.0,
            anchor_separation: 9.0,
        }
    }
}

fn fill_rect(world: &mut WorldMap, x0: f64, y0: f64, x1: f64, y1: f64, value: bool) {
    let c0 = ((x0 / world.resolution).round() as i64).max(0);
    let r0 = ((y0 / world.resolution).round() as i64).max(0);
    let c1 = ((x1 / world.resolution).round() as i64).min(world.width as i64 - 1);
    let r1 = ((y1 / world.resolution).round() as i64).min(world.height as i64 - 1);
    for r in r0..=r1 {
        for c in c0..=c1 {
            let i = (r * world.width as i64 + c) as usize;
            world.occupied[i] = value;
        }
    }
}

/// Generates the world raster: everything solid, rooms and corridors carved
/// free, then clutter re-inserted. Deterministic per seed.
pub fn generate_world(spec: &WorldSpec) -> Result<WorldMap> {
    if spec.extent.0 <= 0.0 || spec.extent.1 <= 0.0 {
        return Err(Error::Generation("extent must be positive".into()));
    }
    if spec.room_count.0 > spec.room_count.1 || spec.room_size.0 > spec.room_size.1 {
        return Err(Error::Generation("empty range in spec".into()));
    }
    let width = (spec.extent.0 / spec.resolution).round() as u32 + 1;
    let height = (spec.extent.1 / spec.resolution).round() as u32 + 1;
    let mut world = WorldMap {
        width,
        height,
        resolution: spec.resolution,
        occupied: vec![true; (width * height) as usize],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_rooms = rng.gen_range(spec.room_count.0..=spec.room_count.1);
    if spec.room_size.0 + 1.0 > spec.extent.0.min(spec.extent.1) {
        return Err(Error::Generation("rooms cannot fit inside the extent".into()));
    }
    let mut centers: Vec<(f64, f64)> = Vec::new();
    for _ in 0..n_rooms {
        let rw = rng.gen_range(spec.room_size.0..=spec.room_size.1);
        let rh = rng.gen_range(spec.room_size.0..=spec.room_size.1);
        let rw = rw.min(spec.extent.0 - 1.0);
        let rh = rh.min(spec.extent.1 - 1.0);
        let cx = rng.gen_range(rw / 2.0 + 0.5..=spec.extent.0 - rw / 2.0 - 0.5);
        let cy = rng.gen_range(rh / 2.0 + 0.5..=spec.extent.1 - rh / 2.0 - 0.5);
        fill_rect(
            &mut world,
            cx - rw / 2.0,
            cy - rh / 2.0,
            cx + rw / 2.0,
            cy + rh / 2.0,
            false,
        );
        centers.push((cx, cy));
    }
    // L-shaped corridors between consecutive rooms
    for pair in centers.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        let hw = rng.gen_range(spec.corridor_width.0..=spec.corridor_width.1) / 2.0;
        fill_rect(&mut world, x0.min(x1), y0 - hw, x0.max(x1), y0 + hw, false);
        fill_rect(&mut world, x1 - hw, y0.min(y1), x1 + hw, y0.max(y1), false);
    }
    // convex clutter proportional to the carved free area
    let free_cells = world.occupied.iter().filter(|&&o| !o).count();
    let free_area = free_cells as f64 * spec.resolution * spec.resolution;
    let n_clutter = (spec.clutter_density * free_area).round() as usize;
    for _ in 0..n_clutter {
        // rejection-sample a free center
        for _attempt in 0..50 {
            let c = rng.gen_range(0..world.width);
            let r = rng.gen_range(0..world.height);
            if world.occupied[world.index(c, r)] {
                continue;
            }
            let hx = rng.gen_range(0.1..0.35);
            let hy = rng.gen_range(0.1..0.35);
            let x = c as f64 * spec.resolution;
            let y = r as f64 * spec.resolution;
            fill_rect(&mut world, x - hx, y - hy, x + hx, y + hy, true);
            break;
        }
    }
    if world.occupied.iter().all(|&o| o) {
        return Err(Error::Generation("no free space was carved".into()));
    }
    Ok(world)
}

/// Grid traversal visibility: walks the segment from `from` to the center of
/// `target`, cell by cell; any solid cell before the target blocks the ray.
/// When the ray crosses a cell corner exactly, the x axis steps first.
pub fn visible(world: &WorldMap, from: (f64, f64), target: (i64, i64)) -> bool {
    let res = world.resolution;
    let to = (target.0 as f64 * res, target.1 as f64 * res);
    let (mut c, mut r) = world.cell_of(from.0, from.1);
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    let step_c: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_r: i64 = if dy > 0.0 { 1 } else { -1 };
    // parametric distance to the next cell boundary along each axis
    let next_boundary = |cell: i64, step: i64| (cell as f64 + 0.5 * step as f64) * res;
    let mut t_max_x = if dx == 0.0 {
        f64::INFINITY
    } else {
        (next_boundary(c, step_c) - from.0) / dx
    };
    let mut t_max_y = if dy == 0.0 {
        f64::INFINITY
    } else {
        (next_boundary(r, step_r) - from.1) / dy
    };
    let t_delta_x = if dx == 0.0 { f64::INFINITY } else { (res / dx).abs() };
    let t_delta_y = if dy == 0.0 { f64::INFINITY } else { (res / dy).abs() };
    let mut guard = 2 * (world.width + world.height) as i64 + 4;
    while (c, r) != target {
        guard -= 1;
        if guard < 0 {
            return false;
        }
        if t_max_x <= t_max_y {
            // ties resolve toward the x axis (increasing traversal order)
            c += step_c;
            t_max_x += t_delta_x;
        } else {
            r += step_r;
            t_max_y += t_delta_y;
        }
        if (c, r) == target {
            break;
        }
        if world.is_occupied(c, r) {
            return false;
        }
    }
    true
}

/// Independent dense-sampling visibility oracle for tests: samples the
/// segment at sub-cell resolution, skipping samples that fall within an
/// epsilon of a cell boundary (where the traversal tie rule decides).
pub fn visible_oracle(world: &WorldMap, from: (f64, f64), target: (i64, i64)) -> bool {
    let res = world.resolution;
    let to = (target.0 as f64 * res, target.1 as f64 * res);
    let len = ((to.0 - from.0).powi(2) + (to.1 - from.1).powi(2)).sqrt();
    let steps = (len / (res * 0.05)).ceil() as usize + 1;
    let start = world.cell_of(from.0, from.1);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let x = from.0 + t * (to.0 - from.0);
        let y = from.1 + t * (to.1 - from.1);
        let near_boundary = |v: f64| {
            let frac = (v / res + 0.5).fract().abs();
            frac < 1e-6 || frac > 1.0 - 1e-6
        };
        if near_boundary(x) || near_boundary(y) {
            continue;
        }
        let cell = world.cell_of(x, y);
        if cell == start || cell == target {
            continue;
        }
        if world.is_occupied(cell.0, cell.1) {
            return false;
        }
    }
    true
}

/// Carves a submap: a window of the world observed from `viewpoints` by
/// cell-center ray casting within `sensor_range`. The window is centered on
/// the viewpoint centroid, snapped to the cell lattice.
pub fn carve_submap(
    world: &WorldMap,
    id: u64,
    viewpoints: &[Pose2],
    sensor_range: f64,
    window: (f64, f64),
) -> Result<Submap> {
    for v in viewpoints {
        let (c, r) = world.cell_of(v.x, v.y);
        if world.is_occupied(c, r) {
            return Err(Error::BadViewpoint(v.x, v.y));
        }
    }
    if viewpoints.is_empty() {
        return Err(Error::Generation("no viewpoints".into()));
    }
    let n = viewpoints.len() as f64;
    let cx: f64 = viewpoints.iter().map(|v| v.x).sum::<f64>() / n;
    let cy: f64 = viewpoints.iter().map(|v| v.y).sum::<f64>() / n;
    let res = world.resolution;
    let wcells = (window.0 / res).round() as i64 + 1;
    let hcells = (window.1 / res).round() as i64 + 1;
    let c0 = (cx / res).round() as i64 - wcells / 2;
    let r0 = (cy / res).round() as i64 - hcells / 2;

    let mut grid = OccupancyGrid::new_unknown(
        wcells as u32,
        hcells as u32,
        res,
        Pose2::identity(),
    );
    let range2 = sensor_range * sensor_range;
    for r in 0..hcells {
        for c in 0..wcells {
            let (wc, wr) = (c0 + c, r0 + r);
            if wc < 0 || wr < 0 || wc >= world.width as i64 || wr >= world.height as i64 {
                continue;
            }
            let px = wc as f64 * res;
            let py = wr as f64 * res;
            let observed = viewpoints.iter().any(|v| {
                let d2 = (px - v.x).powi(2) + (py - v.y).powi(2);
                d2 <= range2 && visible(world, (v.x, v.y), (wc, wr))
            });
            if observed {
                let i = grid.index(c as u32, r as u32);
                grid.cells[i] = if world.is_occupied(wc, wr) {
                    P_OCCUPIED
                } else {
                    P_FREE
                };
            }
        }
    }
    Ok(Submap {
        id,
        pose: Pose2::new(c0 as f64 * res, r0 as f64 * res, 0.0),
        grid,
    })
}

/// Free cells within `radius` meters of a point, for viewpoint placement.
fn free_cells_near(world: &WorldMap, center: (f64, f64), radius: f64) -> Vec<(i64, i64)> {
    let res = world.resolution;
    let (cc, cr) = world.cell_of(center.0, center.1);
    let rad = (radius / res).ceil() as i64;
    let mut out = Vec::new();
    for dr in -rad..=rad {
        for dc in -rad..=rad {
            let (c, r) = (cc + dc, cr + dr);
            if (dc * dc + dr * dr) as f64 * res * res <= radius * radius
                && !world.is_occupied(c, r)
            {
                out.push((c, r));
            }
        }
    }
    out
}

/// Generates a benchmark: clusters of overlapping submaps around anchors
/// spread through the world. Intra-cluster pairs are the planned matches;
/// inter-cluster pairs are (mostly) disjoint.
pub fn generate_benchmark(
    spec: &WorldSpec,
    n_submaps: usize,
    plan: &OverlapPlan,
) -> Result<SyntheticDataset> {
    let world = generate_world(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(0x5eed));
    let n_clusters = n_submaps.div_ceil(plan.cluster_size);
    // anchors: free cells with pairwise separation
    let mut anchors: Vec<(f64, f64)> = Vec::new();
    let mut attempts = 0;
    while anchors.len() < n_clusters {
        attempts += 1;
        if attempts > 20000 {
            return Err(Error::Generation(format!(
                "could not place {n_clusters} anchors at separation {}",
                plan.anchor_separation
            )));
        }
        let c = rng.gen_range(0..world.width) as i64;
        let r = rng.gen_range(0..world.height) as i64;
        if world.is_occupied(c, r) {
            continue;
        }
        let x = c as f64 * world.resolution;
        let y = r as f64 * world.resolution;
        let min_sep = anchors
            .iter()
            .map(|a| ((a.0 - x).powi(2) + (a.1 - y).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        if min_sep >= plan.anchor_separation {
            anchors.push((x, y));
        }
    }
    let mut submaps = Vec::new();
    let mut id = 0u64;
    'outer: for anchor in &anchors {
        let candidates = free_cells_near(&world, *anchor, 3.0);
        for _ in 0..plan.cluster_size {
            if submaps.len() >= n_submaps {
                break 'outer;
            }
            // several viewpoints jittered around the anchor so most of the
            // window is observed
            let mut viewpoints = Vec::new();
            for _ in 0..6 {
                let &(c, r) = &candidates[rng.gen_range(0..candidates.len())];
                viewpoints.push(Pose2::new(
                    c as f64 * world.resolution,
                    r as f64 * world.resolution,
                    0.0,
                ));
            }
            // window-center jitter decorrelates grid alignment within a pair
            let jx = rng.gen_range(-plan.jitter..=plan.jitter);
            let jy = rng.gen_range(-plan.jitter..=plan.jitter);
            viewpoints[0] = Pose2::new(viewpoints[0].x + jx, viewpoints[0].y + jy, 0.0);
            let (c, r) = world.cell_of(viewpoints[0].x, viewpoints[0].y);
            if world.is_occupied(c, r) {
                viewpoints[0] = Pose2::new(anchor.0, anchor.1, 0.0);
            }
            let submap = carve_submap(&world, id, &viewpoints, plan.sensor_range, plan.window)?;
            submaps.push(submap);
            id += 1;
        }
    }
    Ok(SyntheticDataset {
        world,
        submaps,
        spec: spec.clone(),
    })
}
