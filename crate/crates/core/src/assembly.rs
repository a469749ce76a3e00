//! Lagrange finite elements on triangles: element stiffness and mass matrices
//! and global assembly with Dirichlet elimination.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::TriMesh;
use crate::quadrature::QuadratureRule;
use crate::sparse::SparseSymMatrix;

const DEGENERATE_AREA: f64 = 1e-14;

/// Reference basis of order 1 (3 nodes) or 2 (6 nodes) on the unit triangle.
///
/// Local node order: the three vertices, then the midpoints of edges
/// (v0, v1), (v1, v2), (v2, v0).
#[derive(Clone, Debug, PartialEq)]
pub struct ElementBasis {
    order: u8,
    quadrature: QuadratureRule,
}

impl ElementBasis {
    pub fn new(order: u8) -> Result<Self> {
        match order {
            1 => Ok(Self::linear()),
            2 => Ok(Self::quadratic()),
            o => Err(Error::InvalidParams(format!("element order must be 1 or 2, got {o}"))),
        }
    }

    pub fn linear() -> Self {
        Self { order: 1, quadrature: QuadratureRule::degree2() }
    }

    pub fn quadratic() -> Self {
        Self { order: 2, quadrature: QuadratureRule::degree4() }
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    pub fn num_nodes(&self) -> usize {
        if self.order == 1 {
            3
        } else {
            6
        }
    }

    pub fn reference_nodes(&self) -> Vec<[f64; 2]> {
        let mut n = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        if self.order == 2 {
            n.extend([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]);
        }
        n
    }

    /// Shape function values at a reference point (first `num_nodes` entries).
    pub fn values(&self, xi: f64, eta: f64) -> [f64; 6] {
        let l = [1.0 - xi - eta, xi, eta];
        match self.order {
            1 => [l[0], l[1], l[2], 0.0, 0.0, 0.0],
            _ => [
                l[0] * (2.0 * l[0] - 1.0),
                l[1] * (2.0 * l[1] - 1.0),
                l[2] * (2.0 * l[2] - 1.0),
                4.0 * l[0] * l[1],
                4.0 * l[1] * l[2],
                4.0 * l[2] * l[0],
            ],
        }
    }

    /// Shape function gradients with respect to `(xi, eta)`.
    pub fn reference_gradients(&self, xi: f64, eta: f64) -> [[f64; 2]; 6] {
        let l = [1.0 - xi - eta, xi, eta];
        let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let mut g = [[0.0; 2]; 6];
        match self.order {
            1 => g[..3].copy_from_slice(&dl),
            _ => {
                for i in 0..3 {
                    let s = 4.0 * l[i] - 1.0;
                    g[i] = [s * dl[i][0], s * dl[i][1]];
                }
                for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                    g[3 + k] = [
                        4.0 * (dl[a][0] * l[b] + l[a] * dl[b][0]),
                        4.0 * (dl[a][1] * l[b] + l[a] * dl[b][1]),
                    ];
                }
            }
        }
        g
    }
}

/// Affine map of the reference triangle onto `tri`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AffineMap {
    origin: Point2,
    jac: [[f64; 2]; 2],
    det: f64,
}

impl AffineMap {
    pub fn new(tri: &[Point2; 3]) -> Result<Self> {
        let [p0, p1, p2] = *tri;
        let jac = [[p1.x - p0.x, p2.x - p0.x], [p1.y - p0.y, p2.y - p0.y]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !(det.abs() / 2.0 >= DEGENERATE_AREA) {
            return Err(Error::DegenerateTriangle(det / 2.0));
        }
        Ok(Self { origin: p0, jac, det })
    }

    pub fn area(&self) -> f64 {
        self.det.abs() / 2.0
    }

    pub fn forward(&self, xi: f64, eta: f64) -> Point2 {
        Point2::new(
            self.origin.x + self.jac[0][0] * xi + self.jac[0][1] * eta,
            self.origin.y + self.jac[1][0] * xi + self.jac[1][1] * eta,
        )
    }

    pub fn inverse(&self, p: Point2) -> (f64, f64) {
        let (dx, dy) = (p.x - self.origin.x, p.y - self.origin.y);
        let xi = (self.jac[1][1] * dx - self.jac[0][1] * dy) / self.det;
        let eta = (-self.jac[1][0] * dx + self.jac[0][0] * dy) / self.det;
        (xi, eta)
    }

    /// Physical gradient from a reference gradient.
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            (self.jac[1][1] * g[0] - self.jac[1][0] * g[1]) / self.det,
            (-self.jac[0][1] * g[0] + self.jac[0][0] * g[1]) / self.det,
        ]
    }
}

/// Element stiffness matrix `int grad(phi_i) . grad(phi_j)`.
pub fn element_stiffness(tri: &[Point2; 3], basis: &ElementBasis) -> Result<DMatrix<f64>> {
    let map = AffineMap::new(tri)?;
    let n = basis.num_nodes();
    let q = basis.quadrature();
    let mut k = DMatrix::zeros(n, n);
    for (pt, w) in q.points.iter().zip(&q.weights) {
        let g = basis.reference_gradients(pt[0], pt[1]);
        let phys: Vec<[f64; 2]> = g[..n].iter().map(|&gi| map.gradient(gi)).collect();
        let scale = w * map.det.abs();
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] += scale * (phys[i][0] * phys[j][0] + phys[i][1] * phys[j][1]);
            }
        }
    }
    Ok(k)
}

/// Element mass matrix `int phi_i phi_j`.
pub fn element_mass(tri: &[Point2; 3], basis: &ElementBasis) -> Result<DMatrix<f64>> {
    let map = AffineMap::new(tri)?;
    let n = basis.num_nodes();
    let q = basis.quadrature();
    let mut m = DMatrix::zeros(n, n);
    for (pt, w) in q.points.iter().zip(&q.weights) {
        let phi = basis.values(pt[0], pt[1]);
        let scale = w * map.det.abs();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += scale * (phi[i] * phi[j]);
            }
        }
    }
    Ok(m)
}

const ELIMINATED: usize = usize::MAX;

/// Finite-element nodes of a mesh and their map onto interior equations.
///
/// Nodes are the mesh vertices followed, for order 2, by one node per edge in
/// order of first appearance. Nodes on the boundary are eliminated (Dirichlet).
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    order: u8,
    nodes: Vec<Point2>,
    on_boundary: Vec<bool>,
    cells: Vec<[usize; 6]>,
    node_to_dof: Vec<usize>,
    dof_to_node: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &TriMesh, order: u8) -> Result<Self> {
        if order != 1 && order != 2 {
            return Err(Error::InvalidParams(format!("element order must be 1 or 2, got {order}")));
        }
        let mut nodes = mesh.vertices.clone();
        let mut on_boundary = mesh.boundary.clone();
        let mut cells = Vec::with_capacity(mesh.triangles.len());
        if order == 1 {
            cells.extend(mesh.triangles.iter().map(|t| [t[0], t[1], t[2], 0, 0, 0]));
        } else {
            let edge = |a: usize, b: usize| (a.min(b), a.max(b));
            let mut count: HashMap<(usize, usize), u8> = HashMap::new();
            for t in &mesh.triangles {
                for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                    *count.entry(edge(a, b)).or_default() += 1;
                }
            }
            let mut edge_node: HashMap<(usize, usize), usize> = HashMap::new();
            for t in &mesh.triangles {
                let mut cell = [t[0], t[1], t[2], 0, 0, 0];
                for (k, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])].into_iter().enumerate() {
                    let e = edge(a, b);
                    let id = *edge_node.entry(e).or_insert_with(|| {
                        nodes.push(mesh.vertices[a].midpoint(mesh.vertices[b]));
                        on_boundary.push(count[&e] == 1);
                        nodes.len() - 1
                    });
                    cell[3 + k] = id;
                }
                cells.push(cell);
            }
        }
        let mut node_to_dof = vec![ELIMINATED; nodes.len()];
        let mut dof_to_node = Vec::new();
        for (i, b) in on_boundary.iter().enumerate() {
            if !b {
                node_to_dof[i] = dof_to_node.len();
                dof_to_node.push(i);
            }
        }
        Ok(Self { order, nodes, on_boundary, cells, node_to_dof, dof_to_node })
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn n_dof(&self) -> usize {
        self.dof_to_node.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.on_boundary[node]
    }

    /// Local-to-global node indices of element `t`.
    pub fn cell_nodes(&self, t: usize) -> &[usize] {
        &self.cells[t][..if self.order == 1 { 3 } else { 6 }]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Interior equation index of a node, or `None` if eliminated.
    pub fn dof(&self, node: usize) -> Option<usize> {
        let d = self.node_to_dof[node];
        (d != ELIMINATED).then_some(d)
    }

    pub fn node_of(&self, dof: usize) -> usize {
        self.dof_to_node[dof]
    }

    /// Expands interior coefficients to all nodes (boundary nodes get 0).
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.nodes.len()];
        for (d, &node) in self.dof_to_node.iter().enumerate() {
            full[node] = coeffs[d];
        }
        full
    }
}

/// Stiffness matrix, mass matrix and the equation numbering they use.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub stiffness: SparseSymMatrix,
    pub mass: SparseSymMatrix,
    pub dofs: DofMap,
}

/// Assembles global `K` and `M` over interior degrees of freedom.
pub fn assemble(mesh: &TriMesh, basis: &ElementBasis) -> Result<Assembled> {
    let dofs = DofMap::new(mesh, basis.order())?;
    if dofs.n_dof() == 0 {
        return Err(Error::NoInteriorDofs);
    }
    let (stiffness, mass) = assemble_over(mesh, basis, &dofs, |node| dofs.dof(node), dofs.n_dof())?;
    Ok(Assembled { stiffness, mass, dofs })
}

/// Assembles over every node with no boundary elimination (Neumann operator);
/// used to check partition-of-unity sums.
pub fn assemble_all_nodes(mesh: &TriMesh, basis: &ElementBasis) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    let dofs = DofMap::new(mesh, basis.order())?;
    assemble_over(mesh, basis, &dofs, Some, dofs.n_nodes())
}

fn assemble_over(
    mesh: &TriMesh,
    basis: &ElementBasis,
    dofs: &DofMap,
    index: impl Fn(usize) -> Option<usize>,
    n: usize,
) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in 0..dofs.num_cells() {
        let local: Vec<usize> = dofs.cell_nodes(t).iter().filter_map(|&v| index(v)).collect();
        for &i in &local {
            rows[i].extend_from_slice(&local);
        }
    }
    for r in &mut rows {
        r.sort_unstable();
        r.dedup();
    }
    let mut k = SparseSymMatrix::from_pattern(rows);
    let mut m = k.clone();
    for t in 0..dofs.num_cells() {
        let tri = mesh.triangle(t);
        let ke = element_stiffness(&tri, basis)?;
        let me = element_mass(&tri, basis)?;
        let local: Vec<Option<usize>> = dofs.cell_nodes(t).iter().map(|&v| index(v)).collect();
        for (a, ia) in local.iter().enumerate() {
            let Some(i) = *ia else { continue };
            for (b, ib) in local.iter().enumerate() {
                let Some(j) = *ib else { continue };
                k.add(i, j, ke[(a, b)]);
                m.add(i, j, me[(a, b)]);
            }
        }
    }
    Ok((k, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Region, RegionSpec};
    use crate::mesh::{generate_mesh, MeshParams};
    use approx::assert_relative_eq;

    fn right() -> [Point2; 3] {
        [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]
    }

    fn equilateral() -> [Point2; 3] {
        [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 3f64.sqrt() / 2.0)]
    }

    #[test]
    fn linear_right_triangle_matrices() {
        let k = element_stiffness(&right(), &ElementBasis::linear()).unwrap();
        let expect = nalgebra::dmatrix![2.0, -1.0, -1.0; -1.0, 1.0, 0.0; -1.0, 0.0, 1.0] * 0.5;
        assert!((k - expect).abs().max() < 1e-14);
        let m = element_mass(&right(), &ElementBasis::linear()).unwrap();
        let expect = nalgebra::dmatrix![2.0, 1.0, 1.0; 1.0, 2.0, 1.0; 1.0, 1.0, 2.0] / 24.0;
        assert!((m - expect).abs().max() < 1e-14);
    }

    #[test]
    fn equilateral_stiffness_diagonal() {
        // Hand integration: |opposite edge|^2 / (4 area) = 1 / sqrt(3).
        let k = element_stiffness(&equilateral(), &ElementBasis::linear()).unwrap();
        for i in 0..3 {
            assert_relative_eq!(k[(i, i)], 1.0 / 3f64.sqrt(), epsilon = 1e-14);
        }
        // Cross-check with a high-order collapsed rule, independent of the element rule.
        let map = AffineMap::new(&equilateral()).unwrap();
        let q = QuadratureRule::collapsed_gauss(4);
        let b = ElementBasis::linear();
        let mut acc = 0.0;
        for (p, w) in q.points.iter().zip(&q.weights) {
            let g = map.gradient(b.reference_gradients(p[0], p[1])[0]);
            acc += w * map.det.abs() * (g[0] * g[0] + g[1] * g[1]);
        }
        assert_relative_eq!(acc, 1.0 / 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn row_sums_and_mass_totals() {
        let tris = [
            right(),
            equilateral(),
            [Point2::new(0.3, -0.2), Point2::new(2.0, 0.1), Point2::new(-0.5, 1.7)],
        ];
        for basis in [ElementBasis::linear(), ElementBasis::quadratic()] {
            for tri in &tris {
                let k = element_stiffness(tri, &basis).unwrap();
                let m = element_mass(tri, &basis).unwrap();
                let area = AffineMap::new(tri).unwrap().area();
                for i in 0..basis.num_nodes() {
                    assert!(k.row(i).sum().abs() < 1e-13);
                }
                assert!((m.sum() - area).abs() < 1e-13);
                assert!((&k - k.transpose()).abs().max() < 1e-14);
                assert!(m.clone().cholesky().is_some());
                assert!(k.symmetric_eigenvalues().min() > -1e-12);
            }
        }
        let m2 = element_mass(&right(), &ElementBasis::quadratic()).unwrap();
        assert_relative_eq!(m2.sum(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn basis_partition_of_unity_and_kronecker() {
        for basis in [ElementBasis::linear(), ElementBasis::quadratic()] {
            let nodes = basis.reference_nodes();
            for (j, nj) in nodes.iter().enumerate() {
                let v = basis.values(nj[0], nj[1]);
                for i in 0..basis.num_nodes() {
                    assert_eq!(v[i], if i == j { 1.0 } else { 0.0 });
                }
            }
            for p in [[0.2, 0.3], [0.7, 0.1], [0.0, 0.0]] {
                let s: f64 = basis.values(p[0], p[1])[..basis.num_nodes()].iter().sum();
                assert_relative_eq!(s, 1.0, epsilon = 1e-15);
                let g = basis.reference_gradients(p[0], p[1]);
                let gs = g[..basis.num_nodes()].iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
                assert!(gs[0].abs() < 1e-14 && gs[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = ElementBasis::quadratic();
        let (x, y, e) = (0.23, 0.41, 1e-6);
        let g = b.reference_gradients(x, y);
        let (vxp, vxm) = (b.values(x + e, y), b.values(x - e, y));
        let (vyp, vym) = (b.values(x, y + e), b.values(x, y - e));
        for i in 0..6 {
            assert!((g[i][0] - (vxp[i] - vxm[i]) / (2.0 * e)).abs() < 1e-8);
            assert!((g[i][1] - (vyp[i] - vym[i]) / (2.0 * e)).abs() < 1e-8);
        }
    }

    #[test]
    fn scaling_covariance() {
        let s = 3.7;
        let tri = [Point2::new(0.1, 0.2), Point2::new(1.3, 0.4), Point2::new(0.5, 1.1)];
        let scaled = tri.map(|p| Point2::new(s * p.x, s * p.y));
        for basis in [ElementBasis::linear(), ElementBasis::quadratic()] {
            let k0 = element_stiffness(&tri, &basis).unwrap();
            let k1 = element_stiffness(&scaled, &basis).unwrap();
            assert!((k0 - k1).abs().max() < 1e-13);
            let m0 = element_mass(&tri, &basis).unwrap();
            let m1 = element_mass(&scaled, &basis).unwrap();
            assert!((m0 * (s * s) - m1).abs().max() < 1e-13);
        }
    }

    #[test]
    fn degenerate_triangle_is_an_error() {
        let tri = [Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)];
        assert!(matches!(element_stiffness(&tri, &ElementBasis::linear()), Err(Error::DegenerateTriangle(_))));
        assert!(matches!(element_mass(&tri, &ElementBasis::quadratic()), Err(Error::DegenerateTriangle(_))));
    }

    fn four_triangle_square() -> TriMesh {
        TriMesh {
            vertices: vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.0, 1.0),
                Point2::new(0.5, 0.5),
            ],
            triangles: vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]],
            boundary: vec![true, true, true, true, false],
            params: MeshParams::new(1.0),
            angle_floor: 20.0,
        }
    }

    #[test]
    fn single_interior_node_square() {
        let a = assemble(&four_triangle_square(), &ElementBasis::linear()).unwrap();
        assert_eq!(a.stiffness.dim(), 1);
        assert_relative_eq!(a.stiffness.get(0, 0), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn all_boundary_mesh_has_no_dofs() {
        let mut m = four_triangle_square();
        m.boundary[4] = true;
        assert!(matches!(assemble(&m, &ElementBasis::linear()), Err(Error::NoInteriorDofs)));
    }

    #[test]
    fn mass_sums_to_area_including_eliminated_nodes() {
        let r = Region::new(RegionSpec::default_stadium()).unwrap();
        let mesh = generate_mesh(&r, MeshParams::new(0.05)).unwrap();
        let area = mesh.stats().total_area;
        for basis in [ElementBasis::linear(), ElementBasis::quadratic()] {
            let (k, m) = assemble_all_nodes(&mesh, &basis).unwrap();
            assert_relative_eq!(m.values().iter().sum::<f64>(), area, epsilon = 1e-12);
            assert!(k.values().iter().sum::<f64>().abs() < 1e-10);
            let a = assemble(&mesh, &basis).unwrap();
            assert_eq!(a.stiffness.asymmetry(), 0.0);
            assert_eq!(a.mass.asymmetry(), 0.0);
        }
    }
}
