//! Plain-text mesh format:
//!
//! ```text
//! vertices N triangles M h <value>
//! x y boundary_flag      (N lines)
//! i j k                  (M lines)
//! ```

use std::io::{BufRead, Write};

use super::{MeshParams, TriMesh};
use crate::error::{Error, Result};
use crate::geometry::Point2;

pub fn write_mesh<W: Write>(mesh: &TriMesh, mut out: W) -> Result<()> {
    writeln!(
        out,
        "vertices {} triangles {} h {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        mesh.params.max_cell_measure
    )?;
    for (p, b) in mesh.vertices.iter().zip(&mesh.boundary) {
        writeln!(out, "{} {} {}", p.x, p.y, u8::from(*b))?;
    }
    for t in &mesh.triangles {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

fn bad(line: usize, what: &str) -> Error {
    Error::Parse(format!("mesh line {line}: {what}"))
}

/// Reads a mesh; quality metadata not stored in the file (chord tolerance,
/// angle bound) takes the defaults for the stored `h`.
pub fn read_mesh<R: BufRead>(input: R) -> Result<TriMesh> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let header = header?;
    let f: Vec<&str> = header.split_whitespace().collect();
    if f.len() != 6 || f[0] != "vertices" || f[2] != "triangles" || f[4] != "h" {
        return Err(bad(1, "expected `vertices N triangles M h <value>`"));
    }
    let nv: usize = f[1].parse().map_err(|_| bad(1, "bad vertex count"))?;
    let nt: usize = f[3].parse().map_err(|_| bad(1, "bad triangle count"))?;
    let h: f64 = f[5].parse().map_err(|_| bad(1, "bad h"))?;
    let mut vertices = Vec::with_capacity(nv);
    let mut boundary = Vec::with_capacity(nv);
    let mut triangles = Vec::with_capacity(nt);
    for (i, line) in lines {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.is_empty() {
            continue;
        }
        if parts.len() != 3 {
            return Err(bad(i + 1, "expected 3 fields"));
        }
        if vertices.len() < nv {
            let x: f64 = parts[0].parse().map_err(|_| bad(i + 1, "bad x"))?;
            let y: f64 = parts[1].parse().map_err(|_| bad(i + 1, "bad y"))?;
            let flag = match parts[2] {
                "0" => false,
                "1" => true,
                _ => return Err(bad(i + 1, "boundary flag must be 0 or 1")),
            };
            vertices.push(Point2::new(x, y));
            boundary.push(flag);
        } else {
            let mut idx = [0usize; 3];
            for (k, p) in parts.iter().enumerate() {
                idx[k] = p.parse().map_err(|_| bad(i + 1, "bad index"))?;
            }
            triangles.push(idx);
        }
    }
    if vertices.len() != nv || triangles.len() != nt {
        return Err(Error::Parse(format!(
            "mesh body has {} vertices and {} triangles, header says {nv} and {nt}",
            vertices.len(),
            triangles.len()
        )));
    }
    let params = MeshParams::new(h);
    Ok(TriMesh { vertices, triangles, boundary, params, angle_floor: params.min_angle })
}
