//! Conforming triangulations of a region with a maximum cell measure (area).

mod io;
mod smooth;
mod triangulation;

pub use io::{read_mesh, write_mesh};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{orient, Point2, Region};

pub(crate) use triangulation::min_angle;

pub const DEFAULT_MIN_ANGLE: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshParams {
    /// Upper bound on triangle area.
    pub max_cell_measure: f64,
    pub chord_tolerance: f64,
    /// Degrees.
    pub min_angle: f64,
}

impl MeshParams {
    /// Parameters with the default boundary tolerance `sqrt(h) / 10` and a 20 degree
    /// quality bound.
    pub fn new(h: f64) -> Self {
        Self { max_cell_measure: h, chord_tolerance: h.sqrt() / 10.0, min_angle: DEFAULT_MIN_ANGLE }
    }

    pub fn with_chord_tolerance(mut self, tol: f64) -> Self {
        self.chord_tolerance = tol;
        self
    }

    pub fn halved(self) -> Self {
        Self { max_cell_measure: self.max_cell_measure / 2.0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_cell_measure.is_finite() && self.max_cell_measure > 0.0) {
            return Err(Error::InvalidParams(format!("h must be positive, got {}", self.max_cell_measure)));
        }
        if !(self.chord_tolerance.is_finite() && self.chord_tolerance > 0.0) {
            return Err(Error::InvalidParams(format!(
                "chord tolerance must be positive, got {}",
                self.chord_tolerance
            )));
        }
        if !(self.min_angle > 0.0 && self.min_angle <= 30.0) {
            return Err(Error::InvalidParams(format!("min angle must lie in (0, 30], got {}", self.min_angle)));
        }
        Ok(())
    }
}

/// Triangle mesh with counterclockwise triangles and boundary-vertex flags.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub params: MeshParams,
    /// Smallest-angle guarantee actually enforced (degrees); below
    /// `params.min_angle` only when the domain has sharp corners.
    pub angle_floor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshStats {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub interior_dof_count: usize,
    pub max_area: f64,
    /// Degrees.
    pub min_angle_observed: f64,
    pub total_area: f64,
}

impl TriMesh {
    pub fn triangle(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * orient(a, b, c)
    }

    pub fn stats(&self) -> MeshStats {
        mesh_stats(self)
    }
}

pub fn generate_mesh(region: &Region, params: MeshParams) -> Result<TriMesh> {
    params.validate()?;
    let polyline = region.boundary_polyline(params.chord_tolerance);
    let mut tri = triangulation::Refiner::run(&polyline.vertices, params.max_cell_measure, params.min_angle)?;
    smooth::smooth(&mut tri.vertices, &tri.triangles, &tri.boundary, params.max_cell_measure);
    Ok(TriMesh {
        vertices: tri.vertices,
        triangles: tri.triangles,
        boundary: tri.boundary,
        params,
        angle_floor: tri.angle_floor.to_degrees(),
    })
}

/// Mesh of the same region with half the cell measure and the same boundary
/// tolerance.
pub fn refine_half(region: &Region, params: MeshParams) -> Result<TriMesh> {
    generate_mesh(region, params.halved())
}

pub fn mesh_stats(mesh: &TriMesh) -> MeshStats {
    let mut max_area: f64 = 0.0;
    let mut total = 0.0;
    let mut min_ang = f64::INFINITY;
    for t in 0..mesh.triangles.len() {
        let area = mesh.triangle_area(t);
        max_area = max_area.max(area);
        total += area;
        let [a, b, c] = mesh.triangle(t);
        min_ang = min_ang.min(min_angle(a, b, c).to_degrees());
    }
    MeshStats {
        vertex_count: mesh.vertices.len(),
        triangle_count: mesh.triangles.len(),
        interior_dof_count: mesh.boundary.iter().filter(|b| !**b).count(),
        max_area,
        min_angle_observed: min_ang,
        total_area: total,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Orientation { triangle: usize },
    AreaBound { triangle: usize },
    MinAngle { triangle: usize },
    /// Edge shared by more than two triangles.
    NonManifoldEdge { a: usize, b: usize },
    /// Vertex not used by any triangle.
    DanglingVertex { vertex: usize },
    /// Boundary flag disagrees with the edge topology.
    BoundaryFlag { vertex: usize },
    BadIndex { triangle: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Orientation { triangle } => write!(f, "triangle {triangle}: not counterclockwise"),
            Self::AreaBound { triangle } => write!(f, "triangle {triangle}: area exceeds max cell measure"),
            Self::MinAngle { triangle } => write!(f, "triangle {triangle}: angle below quality floor"),
            Self::NonManifoldEdge { a, b } => write!(f, "edge ({a},{b}): shared by more than two triangles"),
            Self::DanglingVertex { vertex } => write!(f, "vertex {vertex}: not referenced (conformity)"),
            Self::BoundaryFlag { vertex } => write!(f, "vertex {vertex}: boundary flag inconsistent"),
            Self::BadIndex { triangle } => write!(f, "triangle {triangle}: vertex index out of range"),
        }
    }
}

/// Checks orientation, area bound, quality floor, conformity and boundary flags.
pub fn validate_mesh(mesh: &TriMesh) -> Vec<Violation> {
    let mut out = Vec::new();
    let nv = mesh.vertices.len();
    let mut used = vec![false; nv];
    let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
    let h = mesh.params.max_cell_measure;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= nv) {
            out.push(Violation::BadIndex { triangle: t });
            continue;
        }
        for &v in tri {
            used[v] = true;
        }
        let area = mesh.triangle_area(t);
        if area <= 0.0 {
            out.push(Violation::Orientation { triangle: t });
        } else if area > h * (1.0 + 1e-12) {
            out.push(Violation::AreaBound { triangle: t });
        }
        let [a, b, c] = mesh.triangle(t);
        if area > 0.0 && min_angle(a, b, c).to_degrees() < mesh.angle_floor * (1.0 - 1e-9) {
            out.push(Violation::MinAngle { triangle: t });
        }
        for i in 0..3 {
            let (x, y) = (tri[i], tri[(i + 1) % 3]);
            *edges.entry((x.min(y), x.max(y))).or_default() += 1;
        }
    }
    let mut on_boundary = vec![false; nv];
    let mut bad_edges: Vec<(usize, usize)> = Vec::new();
    for (&(a, b), &count) in &edges {
        if count == 1 {
            on_boundary[a] = true;
            on_boundary[b] = true;
        } else if count > 2 {
            bad_edges.push((a, b));
        }
    }
    bad_edges.sort_unstable();
    out.extend(bad_edges.into_iter().map(|(a, b)| Violation::NonManifoldEdge { a, b }));
    for v in 0..nv {
        if !used[v] {
            out.push(Violation::DanglingVertex { vertex: v });
        } else if on_boundary[v] && !mesh.boundary.get(v).copied().unwrap_or(false) {
            out.push(Violation::BoundaryFlag { vertex: v });
        }
    }
    out
}
