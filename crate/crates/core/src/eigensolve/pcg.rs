//! Factorization-free cross-check: block inverse iteration with
//! Jacobi-preconditioned conjugate-gradient inner solves and Rayleigh-Ritz.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseSymMatrix};

use super::dense::dense_pencil;
use super::lanczos::rayleigh_residual;
use super::{check_dims, EigenPair, SolverOpts, Spectrum, START_SEED};

/// Solves `A x = b` for SPD `A`; `x` holds the initial guess.
pub(crate) fn pcg(a: &SparseSymMatrix, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> bool {
    let n = b.len();
    let dinv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r: Vec<f64> = a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    if norm2(&r) <= rtol * bnorm {
        return true;
    }
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm2(&r) <= rtol * bnorm {
            return true;
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    false
}

/// Smallest eigenpairs without a sparse factorization.
pub fn smallest_eigenpairs_iterative(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    opts: &SolverOpts,
) -> Result<Spectrum> {
    check_dims(k, m, opts)?;
    let n = k.dim();
    let nstates = opts.num_states;
    let p = (nstates + opts.block_size.max(4)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
    let inner_tol = (opts.rel_residual_tol * 1e-3).max(1e-14);
    let mut pairs = Vec::new();
    for _ in 0..opts.max_iterations {
        let mut y = x.clone();
        for c in 0..p {
            let rhs = m.mul_vec(x.column(c).as_slice());
            let col = &mut y.as_mut_slice()[c * n..(c + 1) * n];
            pcg(k, &rhs, col, inner_tol, 20 * n);
        }
        let ky = DMatrix::from_fn(n, p, |_, _| 0.0);
        let (mut kyv, mut myv) = (ky.clone(), ky);
        for c in 0..p {
            k.mul_vec_into(y.column(c).as_slice(), &mut kyv.as_mut_slice()[c * n..(c + 1) * n]);
            m.mul_vec_into(y.column(c).as_slice(), &mut myv.as_mut_slice()[c * n..(c + 1) * n]);
        }
        let kp = y.tr_mul(&kyv);
        let mp = y.tr_mul(&myv);
        let kp = (&kp + kp.transpose()) * 0.5;
        let mp = (&mp + mp.transpose()) * 0.5;
        let (vals, vecs) = dense_pencil(kp, mp)?;
        x = &y * vecs;
        pairs.clear();
        let mut done = true;
        for i in 0..nstates {
            let xi: Vec<f64> = x.column(i).iter().copied().collect();
            let (lambda, residual) = rayleigh_residual(k, m, &xi);
            debug_assert!((lambda - vals[i]).abs() <= 1e-6 * lambda.abs());
            done &= residual <= opts.rel_residual_tol;
            pairs.push(EigenPair::new(lambda, xi, residual, opts.rel_residual_tol)?);
        }
        if done {
            return Ok(Spectrum { pairs, inertia_verified: false, dofs: None });
        }
    }
    let converged = pairs.iter().filter(|p| p.converged).count();
    Err(Error::NoConvergence {
        requested: nstates,
        converged,
        partial: Box::new(Spectrum { pairs, inertia_verified: false, dofs: None }),
    })
}
