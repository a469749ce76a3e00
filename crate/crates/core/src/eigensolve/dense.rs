//! Dense generalized symmetric-definite eigensolver, used as an oracle for
//! small systems.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

/// All eigenpairs of `K x = lambda M x`, ascending; columns of the returned
/// matrix are M-orthonormal eigenvectors.
pub fn dense_generalized_eigen(k: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if k.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: m.dim() });
    }
    dense_pencil(k.to_dense(), m.to_dense())
}

pub(crate) fn dense_pencil(k: DMatrix<f64>, m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = k.nrows();
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::InvalidParams("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L^-1 K L^-T
    let mut y = k;
    if !l.solve_lower_triangular_mut(&mut y) {
        return Err(Error::InvalidParams("singular mass factor".into()));
    }
    let mut c = y.transpose();
    l.solve_lower_triangular_mut(&mut c);
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in idx.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    let lt = l.transpose();
    lt.solve_upper_triangular_mut(&mut vecs);
    Ok((values, vecs))
}
