//! Region to spectrum: meshing, assembly and eigensolve in one place.

use std::fmt;
use std::sync::Arc;

use crate::assembly::{assemble, DofMap, ElementBasis};
use crate::eigensolve::{smallest_eigenpairs, SolverOpts, Spectrum};
use crate::error::Error;
use crate::geometry::Region;
use crate::mesh::{generate_mesh, MeshParams, TriMesh};
use crate::sparse::SparseSymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Mesh,
    Assembly,
    Solve,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Mesh => "mesh",
            Stage::Assembly => "assembly",
            Stage::Solve => "eigensolve",
        })
    }
}

/// An error tagged with the pipeline stage that produced it.
#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: Error,
}

impl StageError {
    pub fn mesh(source: Error) -> Self {
        Self { stage: Stage::Mesh, source }
    }

    pub fn assembly(source: Error) -> Self {
        Self { stage: Stage::Assembly, source }
    }

    pub fn solve(source: Error) -> Self {
        Self { stage: Stage::Solve, source }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

fn at(stage: Stage) -> impl FnOnce(Error) -> StageError {
    move |source| StageError { stage, source }
}

/// A meshed region with assembled operators.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub region: Region,
    pub mesh: TriMesh,
    pub basis: ElementBasis,
    pub dofs: Arc<DofMap>,
    pub stiffness: SparseSymMatrix,
    pub mass: SparseSymMatrix,
}

impl Discretization {
    pub fn build(region: &Region, params: MeshParams, order: u8) -> Result<Self, StageError> {
        let basis = ElementBasis::new(order).map_err(at(Stage::Assembly))?;
        let mesh = generate_mesh(region, params).map_err(at(Stage::Mesh))?;
        let a = assemble(&mesh, &basis).map_err(at(Stage::Assembly))?;
        Ok(Self {
            region: region.clone(),
            mesh,
            basis,
            dofs: Arc::new(a.dofs),
            stiffness: a.stiffness,
            mass: a.mass,
        })
    }

    pub fn n_dof(&self) -> usize {
        self.stiffness.dim()
    }

    /// Area of the meshed (polygonal) domain.
    pub fn area(&self) -> f64 {
        self.mesh.stats().total_area
    }

    pub fn solve(&self, opts: &SolverOpts) -> Result<Spectrum, StageError> {
        let s = smallest_eigenpairs(&self.stiffness, &self.mass, opts).map_err(at(Stage::Solve))?;
        Ok(s.with_dofs(self.dofs.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub disc: Discretization,
    pub spectrum: Spectrum,
}

pub fn run_pipeline(region: &Region, params: MeshParams, order: u8, opts: &SolverOpts) -> Result<Solution, StageError> {
    let disc = Discretization::build(region, params, order)?;
    let spectrum = disc.solve(opts)?;
    Ok(Solution { disc, spectrum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RegionSpec;

    #[test]
    fn stages_are_named() {
        let r = Region::new(RegionSpec::Circle { radius: 1.0 }).unwrap();
        let e = run_pipeline(&r, MeshParams::new(0.05), 3, &SolverOpts::new(1)).unwrap_err();
        assert_eq!(e.stage, Stage::Assembly);
        let e = run_pipeline(&r, MeshParams::new(-1.0), 1, &SolverOpts::new(1)).unwrap_err();
        assert_eq!(e.stage, Stage::Mesh);
        assert!(e.to_string().starts_with("mesh stage failed"));
        let e = run_pipeline(&r, MeshParams::new(0.5), 1, &SolverOpts::new(1000)).unwrap_err();
        assert_eq!(e.stage, Stage::Solve);
    }

    #[test]
    fn disk_ground_state() {
        let r = Region::new(RegionSpec::Circle { radius: 1.0 }).unwrap();
        let s = run_pipeline(&r, MeshParams::new(0.01).with_chord_tolerance(1e-4), 2, &SolverOpts::new(1)).unwrap();
        let k = s.spectrum.pairs[0].k;
        assert!(k > 2.4048 && k < 2.42, "{k}");
        assert!(s.spectrum.dofs.is_some());
    }
}
