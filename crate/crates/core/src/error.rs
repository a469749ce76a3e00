use thiserror::Error;

/// Errors raised anywhere in the meshing, assembly and solve pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid region spec: {0}")]
    InvalidSpec(String),
    #[error("cannot parse region spec: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
    #[error("degenerate triangle (area {0:e})")]
    DegenerateTriangle(f64),
    #[error("mesh has no interior degrees of freedom")]
    NoInteriorDofs,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("factorization hit a zero pivot at column {0}")]
    ZeroPivot(usize),
    #[error("eigensolver did not converge: {converged} of {requested} pairs certified")]
    NoConvergence {
        requested: usize,
        converged: usize,
        partial: Box<crate::eigensolve::Spectrum>,
    },
    #[error("argument outside validity window: {0}")]
    OutOfValidityWindow(String),
    #[error("refinement error denominator must be positive, got {0}")]
    NonpositiveDenominator(f64),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("coefficient vector is zero")]
    ZeroVector,
    #[error("state is not normalized (M-norm squared {0})")]
    NotNormalized(f64),
    #[error("no closed-form spectrum for region `{0}`")]
    UnsupportedRegionForOracle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
