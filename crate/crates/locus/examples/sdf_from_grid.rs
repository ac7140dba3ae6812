//! Computes a signed distance field for a small hand-built occupancy grid
//! and prints it as an ASCII heat map.
//!
//! Run with: cargo run --example sdf_from_grid

use locus::{binarize, compute_sdf, OccupancyGrid, Pose2};

fn main() {
    // 21x21 room at 10 cm resolution: walls on the border, a pillar inside
    let n = 21u32;
    let mut grid = OccupancyGrid::new_unknown(n, n, 0.1, Pose2::identity());
    for r in 0..n {
        for c in 0..n {
            let wall = r == 0 || c == 0 || r == n - 1 || c == n - 1;
            let pillar = (5..=6).contains(&r) && (13..=14).contains(&c);
            let i = grid.index(c, r);
            grid.cells[i] = if wall || pillar { 0.9 } else { 0.1 };
        }
    }

    let sdf = compute_sdf(&binarize(&grid, 0.5)).expect("valid field");

    // darker = closer to a surface; '#' marks the surface interior
    let shades = [' ', '.', ':', '-', '=', '+', '*'];
    for r in (0..n).rev() {
        let mut line = String::new();
        for c in 0..n {
            let v = sdf.value(c, r);
            line.push(if v < 0.0 {
                '#'
            } else {
                let idx = ((v / 0.15) as usize).min(shades.len() - 1);
                shades[idx]
            });
        }
        println!("{line}");
    }
    let center = sdf.value(n / 2, n / 2);
    println!("\ndistance at room center: {center:.3} m");
}
