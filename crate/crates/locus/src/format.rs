//! Grid container file format and PGM import/export.
//!
//! A container file is a text header terminated by a blank line, followed by
//! a binary payload of little-endian 32-bit floats in row-major order:
//!
//! ```text
//! locus-grid 1
//! width 320
//! height 200
//! resolution 0.05
//! origin 0 0 0
//! encoding float32
//!
//! <width*height f32 LE>
//! ```
//!
//! Unknown cells are encoded as `-1.0`. Optional `id` and `pose` lines carry
//! submap identity and its global pose; they default to `0` and identity on
//! load. SDF files use `encoding float32-sdf` and append a validity bitmask
//! (one bit per cell, row-major, LSB first) after the float payload.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{OccupancyGrid, Submap, UNKNOWN_SENTINEL};
use crate::pose::Pose2;
use crate::sdf::SdfGrid;

const MAGIC: &str = "locus-grid 1";

struct Header {
    width: u32,
    height: u32,
    resolution: f64,
    origin: Pose2,
    encoding: String,
    id: u64,
    pose: Pose2,
    /// Byte offset of the first payload byte.
    payload_offset: usize,
}

fn write_header(out: &mut String, sub_id: u64, pose: Pose2, g: GeomRef, encoding: &str) {
    use std::fmt::Write;
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "width {}", g.width).unwrap();
    writeln!(out, "height {}", g.height).unwrap();
    writeln!(out, "resolution {}", g.resolution).unwrap();
    writeln!(out, "origin {} {} {}", g.origin.x, g.origin.y, g.origin.theta).unwrap();
    writeln!(out, "encoding {encoding}").unwrap();
    writeln!(out, "id {sub_id}").unwrap();
    writeln!(out, "pose {} {} {}", pose.x, pose.y, pose.theta).unwrap();
    out.push('\n');
}

#[derive(Clone, Copy)]
struct GeomRef {
    width: u32,
    height: u32,
    resolution: f64,
    origin: Pose2,
}

fn parse_header(path: &Path, data: &[u8]) -> Result<Header> {
    let err = |offset: usize, msg: &str| Error::parse(path, offset as u64, msg);
    let mut offset = 0usize;
    let mut lines = Vec::new();
    // header is ASCII text up to the first blank line
    loop {
        let rest = &data[offset..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| err(offset, "malformed header: missing blank-line terminator"))?;
        let line = std::str::from_utf8(&rest[..nl])
            .map_err(|_| err(offset, "malformed header: non-UTF-8 bytes"))?;
        let line_offset = offset;
        offset += nl + 1;
        if line.is_empty() {
            break;
        }
        lines.push((line_offset, line.to_string()));
    }
    if lines.is_empty() || lines[0].1 != MAGIC {
        return Err(err(0, "malformed header: expected `locus-grid 1` magic"));
    }
    let mut width = None;
    let mut height = None;
    let mut resolution = None;
    let mut origin = None;
    let mut encoding = None;
    let mut id = 0u64;
    let mut pose = Pose2::identity();
    for &(lo, ref line) in &lines[1..] {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or("");
        let vals: Vec<&str> = parts.collect();
        let one = || -> Result<&str> {
            if vals.len() == 1 {
                Ok(vals[0])
            } else {
                Err(err(lo, &format!("malformed header line `{line}`")))
            }
        };
        let three = |k: &str| -> Result<(f64, f64, f64)> {
            if vals.len() != 3 {
                return Err(err(lo, &format!("malformed `{k}` line, expected 3 values")));
            }
            let p: Vec<f64> = vals
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(lo, &format!("malformed `{k}` line, non-numeric value")))?;
            Ok((p[0], p[1], p[2]))
        };
        match key {
            "width" => {
                width = Some(one()?.parse::<u32>().map_err(|_| {
                    err(lo, "malformed header: width must be a non-negative integer")
                })?)
            }
            "height" => {
                height = Some(one()?.parse::<u32>().map_err(|_| {
                    err(lo, "malformed header: height must be a non-negative integer")
                })?)
            }
            "resolution" => {
                let r = one()?
                    .parse::<f64>()
                    .map_err(|_| err(lo, "malformed header: resolution must be a float"))?;
                if !(r > 0.0) {
                    return Err(err(lo, "resolution must be > 0"));
                }
                resolution = Some(r);
            }
            "origin" => {
                let (x, y, t) = three("origin")?;
                origin = Some(Pose2::new(x, y, t));
            }
            "encoding" => encoding = Some(one()?.to_string()),
            "id" => {
                id = one()?
                    .parse::<u64>()
                    .map_err(|_| err(lo, "malformed header: id must be an integer"))?
            }
            "pose" => {
                let (x, y, t) = three("pose")?;
                pose = Pose2::new(x, y, t);
            }
            _ => return Err(err(lo, &format!("malformed header: unknown key `{key}`"))),
        }
    }
    let missing = |k: &str| err(0, &format!("malformed header: missing `{k}`"));
    Ok(Header {
        width: width.ok_or_else(|| missing("width"))?,
        height: height.ok_or_else(|| missing("height"))?,
        resolution: resolution.ok_or_else(|| missing("resolution"))?,
        origin: origin.ok_or_else(|| missing("origin"))?,
        encoding: encoding.ok_or_else(|| missing("encoding"))?,
        id,
        pose,
        payload_offset: offset,
    })
}

fn read_floats(path: &Path, data: &[u8], start: usize, count: usize) -> Result<Vec<f32>> {
    let need = count * 4;
    if data.len() < start + need {
        return Err(Error::parse(
            path,
            data.len() as u64,
            format!(
                "truncated payload: expected {} bytes of float data, found {}",
                need,
                data.len().saturating_sub(start)
            ),
        ));
    }
    Ok(data[start..start + need]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect())
}

/// Writes a submap in the grid container format.
pub fn save_grid(submap: &Submap, path: &Path) -> Result<()> {
    let g = &submap.grid;
    let mut header = String::new();
    write_header(
        &mut header,
        submap.id,
        submap.pose,
        GeomRef {
            width: g.width,
            height: g.height,
            resolution: g.resolution,
            origin: g.origin,
        },
        "float32",
    );
    let mut bytes = header.into_bytes();
    for &v in &g.cells {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a submap from the grid container format.
pub fn load_grid(path: &Path) -> Result<Submap> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let h = parse_header(path, &data)?;
    if h.encoding != "float32" {
        return Err(Error::parse(
            path,
            0,
            format!("expected encoding float32, found `{}`", h.encoding),
        ));
    }
    let count = (h.width as usize) * (h.height as usize);
    let cells = read_floats(path, &data, h.payload_offset, count)?;
    for (i, &v) in cells.iter().enumerate() {
        let ok = (0.0..=1.0).contains(&v) || v == UNKNOWN_SENTINEL;
        if !ok {
            return Err(Error::parse(
                path,
                (h.payload_offset + i * 4) as u64,
                format!("value out of range: cell {i} = {v}, expected [0,1] or -1"),
            ));
        }
    }
    Ok(Submap {
        id: h.id,
        pose: h.pose,
        grid: OccupancyGrid {
            width: h.width,
            height: h.height,
            resolution: h.resolution,
            origin: h.origin,
            cells,
        },
    })
}

/// Writes an SDF grid: float payload plus validity bitmask.
pub fn save_sdf(sdf: &SdfGrid, path: &Path) -> Result<()> {
    let mut header = String::new();
    write_header(
        &mut header,
        0,
        Pose2::identity(),
        GeomRef {
            width: sdf.width,
            height: sdf.height,
            resolution: sdf.resolution,
            origin: sdf.origin,
        },
        "float32-sdf",
    );
    let mut bytes = header.into_bytes();
    for &v in &sdf.values {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    let n = sdf.values.len();
    let mut mask = vec![0u8; n.div_ceil(8)];
    for (i, &v) in sdf.valid.iter().enumerate() {
        if v {
            mask[i / 8] |= 1 << (i % 8);
        }
    }
    bytes.extend_from_slice(&mask);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads an SDF grid written by [`save_sdf`].
pub fn load_sdf(path: &Path) -> Result<SdfGrid> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let h = parse_header(path, &data)?;
    if h.encoding != "float32-sdf" {
        return Err(Error::parse(
            path,
            0,
            format!("expected encoding float32-sdf, found `{}`", h.encoding),
        ));
    }
    let count = (h.width as usize) * (h.height as usize);
    let values = read_floats(path, &data, h.payload_offset, count)?;
    let mask_start = h.payload_offset + count * 4;
    let mask_len = count.div_ceil(8);
    if data.len() < mask_start + mask_len {
        return Err(Error::parse(
            path,
            data.len() as u64,
            "truncated payload: validity bitmask incomplete",
        ));
    }
    let mask = &data[mask_start..mask_start + mask_len];
    let valid = (0..count).map(|i| mask[i / 8] >> (i % 8) & 1 == 1).collect();
    Ok(SdfGrid {
        width: h.width,
        height: h.height,
        resolution: h.resolution,
        origin: h.origin,
        values: values.into_iter().map(f64::from).collect(),
        valid,
    })
}

/// Imports an 8-bit binary PGM plus a sidecar header file holding the same
/// keys as the grid container header. PGM value 255 maps to occupancy 1.0,
/// 0 to 0.0 (linear in between); `unknown_byte`, when given, maps to UNKNOWN.
pub fn import_pgm(pgm_path: &Path, header_path: &Path, unknown_byte: Option<u8>) -> Result<Submap> {
    let sidecar = fs::read(header_path).map_err(|e| Error::io(header_path, e))?;
    // sidecar must end with the blank-line terminator; tolerate its absence
    let mut sidecar = sidecar;
    if !sidecar.ends_with(b"\n\n") {
        if !sidecar.ends_with(b"\n") {
            sidecar.push(b'\n');
        }
        sidecar.push(b'\n');
    }
    let h = parse_header(header_path, &sidecar)?;

    let data = fs::read(pgm_path).map_err(|e| Error::io(pgm_path, e))?;
    let (w, ph, payload) = parse_pgm(pgm_path, &data)?;
    if w != h.width || ph != h.height {
        return Err(Error::parse(
            pgm_path,
            0,
            format!(
                "PGM dimensions {w}x{ph} do not match sidecar header {}x{}",
                h.width, h.height
            ),
        ));
    }
    let cells = payload
        .iter()
        .map(|&b| {
            if Some(b) == unknown_byte {
                UNKNOWN_SENTINEL
            } else {
                f32::from(b) / 255.0
            }
        })
        .collect();
    Ok(Submap {
        id: h.id,
        pose: h.pose,
        grid: OccupancyGrid {
            width: h.width,
            height: h.height,
            resolution: h.resolution,
            origin: h.origin,
            cells,
        },
    })
}

fn parse_pgm<'a>(path: &Path, data: &'a [u8]) -> Result<(u32, u32, &'a [u8])> {
    let mut pos = 0usize;
    let token = |pos: &mut usize| -> Result<String> {
        // skip whitespace and comments
        loop {
            while *pos < data.len() && data[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < data.len() && data[*pos] == b'#' {
                while *pos < data.len() && data[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::parse(path, start as u64, "truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&data[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    if magic != "P5" {
        return Err(Error::parse(path, 0, "expected binary PGM magic `P5`"));
    }
    let w: u32 = token(&mut pos)?
        .parse()
        .map_err(|_| Error::parse(path, pos as u64, "malformed PGM width"))?;
    let h: u32 = token(&mut pos)?
        .parse()
        .map_err(|_| Error::parse(path, pos as u64, "malformed PGM height"))?;
    let maxval: u32 = token(&mut pos)?
        .parse()
        .map_err(|_| Error::parse(path, pos as u64, "malformed PGM maxval"))?;
    if maxval != 255 {
        return Err(Error::parse(path, pos as u64, "only maxval 255 supported"));
    }
    // single whitespace byte separates header from payload
    pos += 1;
    let count = (w as usize) * (h as usize);
    if data.len() < pos + count {
        return Err(Error::parse(
            path,
            data.len() as u64,
            "truncated PGM payload",
        ));
    }
    Ok((w, h, &data[pos..pos + count]))
}

/// Writes a plain 8-bit binary PGM.
pub fn write_pgm(path: &Path, width: u32, height: u32, pixels: &[u8]) -> Result<()> {
    assert_eq!(pixels.len(), (width * height) as usize);
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn sample_submap() -> Submap {
        Submap {
            id: 7,
            pose: Pose2::new(1.5, -2.0, 0.3),
            grid: OccupancyGrid {
                width: 2,
                height: 2,
                resolution: 0.05,
                origin: Pose2::identity(),
                cells: vec![0.1, 0.9, UNKNOWN_SENTINEL, 0.5],
            },
        }
    }

    #[test]
    fn round_trip_preserves_all_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.grid");
        let s = sample_submap();
        save_grid(&s, &path).unwrap();
        let loaded = load_grid(&path).unwrap();
        assert_eq!(loaded, s);
        assert_eq!(loaded.grid.resolution, 0.05);
    }

    #[test]
    fn out_of_range_value_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.grid");
        let mut s = sample_submap();
        s.grid.cells[1] = 1.3;
        // bypass save-side validation by writing raw
        save_grid(&s, &path).unwrap();
        match load_grid(&path) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("value out of range")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_names_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.grid");
        save_grid(&sample_submap(), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, &bytes).unwrap();
        match load_grid(&path) {
            Err(Error::Parse {
                offset, message, ..
            }) => {
                assert_eq!(offset, bytes.len() as u64);
                assert!(message.contains("truncated"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.grid");
        fs::write(&path, b"locus-grid 2\nwidth 1\n\n").unwrap();
        assert!(matches!(load_grid(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let s = sample_submap();
        let r = save_grid(&s, Path::new("/nonexistent-dir/x.grid"));
        assert!(matches!(r, Err(Error::Io { .. })));
    }

    #[test]
    fn pgm_import_maps_values_and_sentinel() {
        let dir = tempfile::tempdir().unwrap();
        let pgm = dir.path().join("m.pgm");
        let side = dir.path().join("m.hdr");
        write_pgm(&pgm, 2, 2, &[255, 0, 128, 7]).unwrap();
        fs::write(
            &side,
            "locus-grid 1\nwidth 2\nheight 2\nresolution 0.05\norigin 0 0 0\nencoding float32\n",
        )
        .unwrap();
        let s = import_pgm(&pgm, &side, Some(7)).unwrap();
        assert_eq!(s.grid.cells[0], 1.0);
        assert_eq!(s.grid.cells[1], 0.0);
        assert!((s.grid.cells[2] - 128.0 / 255.0).abs() < 1e-7);
        assert_eq!(s.grid.cells[3], UNKNOWN_SENTINEL);
    }

    proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(20))]
        #[test]
        fn random_grids_round_trip(seed in 0u64..1000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let w = rng.gen_range(1u32..20);
            let h = rng.gen_range(1u32..20);
            let cells: Vec<f32> = (0..w * h)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        UNKNOWN_SENTINEL
                    } else {
                        rng.gen_range(0.0f32..=1.0)
                    }
                })
                .collect();
            let s = Submap {
                id: rng.gen(),
                pose: Pose2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-3.0..3.0)),
                grid: OccupancyGrid {
                    width: w,
                    height: h,
                    resolution: rng.gen_range(0.01..0.5),
                    origin: Pose2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0),
                    cells,
                },
            };
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.grid");
            save_grid(&s, &path).unwrap();
            prop_assert_eq!(load_grid(&path).unwrap(), s);
        }
    }
}
