//! Shift-invert block Lanczos with thick restart and full
//! reorthogonalization in the M inner product.
//!
//! The operator is `OP = (K - sigma M)^-1 M`, self-adjoint in the M inner
//! product. Eigenvalues `theta` of `OP` map to `lambda = sigma + 1 / theta`;
//! the wanted pairs are those with the largest `|theta|`, i.e. the `lambda`
//! closest to the shift. Vectors in `locked` are projected out of every
//! Krylov block.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sparse::{dot, norm2, SparseSymMatrix};

use super::ldl::LdlFactor;

pub(crate) struct Window<'a> {
    pub k: &'a SparseSymMatrix,
    pub m: &'a SparseSymMatrix,
    pub factor: &'a LdlFactor,
    pub locked: &'a DMatrix<f64>,
    pub nev: usize,
    pub block: usize,
    pub max_iterations: usize,
    pub tol: f64,
    pub seed: u64,
}

pub(crate) struct RitzPair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

pub(crate) struct WindowOutcome {
    /// Wanted pairs, ascending in lambda.
    pub pairs: Vec<RitzPair>,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest Krylov basis used for `nev` wanted pairs with block size `b`.
pub(crate) fn basis_limit(nev: usize, b: usize) -> usize {
    (2 * nev + 2 * b).max(nev + 4 * b)
}

fn mat_cols(a: &SparseSymMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut out = DMatrix::zeros(n, x.ncols());
    for c in 0..x.ncols() {
        let src = &x.as_slice()[c * n..(c + 1) * n];
        a.mul_vec_into(src, &mut out.as_mut_slice()[c * n..(c + 1) * n]);
    }
    out
}

/// Explicit relative residual `||K x - lambda M x|| / ||K x||` and the
/// Rayleigh quotient `lambda`.
pub(crate) fn rayleigh_residual(k: &SparseSymMatrix, m: &SparseSymMatrix, x: &[f64]) -> (f64, f64) {
    let kx = k.mul_vec(x);
    let mx = m.mul_vec(x);
    let lambda = dot(x, &kx) / dot(x, &mx);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
    (lambda, norm2(&r) / norm2(&kx))
}

impl Window<'_> {
    fn apply_op(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let n = v.nrows();
        let mut w = mat_cols(self.m, v);
        std::thread::scope(|s| {
            for col in w.as_mut_slice().chunks_mut(n) {
                s.spawn(move || {
                    let mut work = Vec::new();
                    self.factor.solve_in_place(col, &mut work);
                });
            }
        });
        w
    }

    /// Removes the M-components of `w` along the locked vectors and the first
    /// `p` columns of `q`; returns the accumulated coefficients along `q`.
    fn project(&self, w: &mut DMatrix<f64>, q: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(p, w.ncols());
        for _ in 0..2 {
            let mw = mat_cols(self.m, w);
            if self.locked.ncols() > 0 {
                let cd = self.locked.tr_mul(&mw);
                w.gemm(-1.0, self.locked, &cd, 1.0);
            }
            if p > 0 {
                let qv = q.columns(0, p);
                let cq = qv.tr_mul(&mw);
                w.gemm(-1.0, &qv, &cq, 1.0);
                acc += cq;
            }
        }
        acc
    }

    fn m_norm(&self, x: &[f64]) -> f64 {
        dot(x, &self.m.mul_vec(x)).max(0.0).sqrt()
    }

    /// M-orthonormalizes the columns of `w` (already orthogonal to `q` and the
    /// locked set): `w = v * b`. Collapsed columns are replaced by random
    /// vectors with a zero coefficient.
    fn m_qr(
        &self,
        w: &mut DMatrix<f64>,
        scale: &[f64],
        q: &DMatrix<f64>,
        p: usize,
        rng: &mut ChaCha8Rng,
    ) -> DMatrix<f64> {
        let n = w.nrows();
        let b = w.ncols();
        let mut bmat = DMatrix::zeros(b, b);
        for c in 0..b {
            for _ in 0..2 {
                let mw = self.m.mul_vec(w.column(c).as_slice());
                for j in 0..c {
                    let coef = dot(w.column(j).as_slice(), &mw);
                    bmat[(j, c)] += coef;
                    let vj = w.column(j).clone_owned();
                    w.column_mut(c).axpy(-coef, &vj, 1.0);
                }
            }
            let nrm = self.m_norm(w.column(c).as_slice());
            if nrm > 1e-10 * scale[c] && nrm > 0.0 {
                w.column_mut(c).scale_mut(1.0 / nrm);
                bmat[(c, c)] = nrm;
                continue;
            }
            // Invariant subspace reached in this direction.
            loop {
                let mut z = DMatrix::from_fn(n, 1, |_, _| rng.random_range(-1.0..1.0));
                self.project(&mut z, q, p);
                for _ in 0..2 {
                    let mz = self.m.mul_vec(z.as_slice());
                    for j in 0..c {
                        let coef = dot(w.column(j).as_slice(), &mz);
                        let vj = w.column(j).clone_owned();
                        z.column_mut(0).axpy(-coef, &vj, 1.0);
                    }
                }
                let nz = self.m_norm(z.as_slice());
                if nz > 1e-8 {
                    w.set_column(c, &(z.column(0) / nz));
                    break;
                }
            }
        }
        bmat
    }

    pub fn run(&self) -> WindowOutcome {
        let n = self.k.dim();
        let b = self.block;
        let nev = self.nev;
        let max_basis = basis_limit(nev, b);
        assert!(max_basis + b + self.locked.ncols() <= n, "window too large for the problem dimension");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut q = DMatrix::<f64>::zeros(n, max_basis + b);
        let mut p = 0usize;
        let mut h = DMatrix::<f64>::zeros(0, 0);

        let mut v = DMatrix::from_fn(n, b, |_, _| rng.random_range(-1.0..1.0));
        self.project(&mut v, &q, 0);
        let ones = vec![1.0; b];
        self.m_qr(&mut v, &ones, &q, 0, &mut rng);

        let mut tol_int = self.tol;
        let mut best: Vec<RitzPair> = Vec::new();
        for iter in 1..=self.max_iterations {
            let mut w = self.apply_op(&v);
            let scale: Vec<f64> = (0..b).map(|c| self.m_norm(w.column(c).as_slice())).collect();
            q.columns_mut(p, b).copy_from(&v);
            let pc = p + b;
            let c = self.project(&mut w, &q, pc);
            let mut hn = DMatrix::zeros(pc, pc);
            hn.view_mut((0, 0), (p, p)).copy_from(&h);
            hn.view_mut((0, p), (pc, b)).copy_from(&c);
            hn.view_mut((p, 0), (b, pc)).copy_from(&c.transpose());
            let block_h = c.rows(p, b);
            hn.view_mut((p, p), (b, b)).copy_from(&((&block_h + block_h.transpose()) * 0.5));
            h = hn;
            let bmat = self.m_qr(&mut w, &scale, &q, pc, &mut rng);
            v = w;
            p = pc;

            let eig = SymmetricEigen::new(h.clone());
            let mut order: Vec<usize> = (0..p).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()));
            if p >= nev {
                let wanted = &order[..nev];
                // Residual of OP x - theta x is V_new * B * s_last.
                let converged = wanted.iter().all(|&i| {
                    let s = eig.eigenvectors.column(i);
                    let tail = s.rows(p - b, b);
                    let est = (&bmat * tail).norm() / eig.eigenvalues[i].abs();
                    est <= tol_int
                });
                if converged || iter == self.max_iterations {
                    let qv = q.columns(0, p);
                    let mut pairs: Vec<RitzPair> = wanted
                        .iter()
                        .map(|&i| {
                            let x = &qv * eig.eigenvectors.column(i);
                            let x: Vec<f64> = x.iter().copied().collect();
                            let nx = self.m_norm(&x);
                            let x: Vec<f64> = x.iter().map(|v| v / nx).collect();
                            let (lambda, residual) = rayleigh_residual(self.k, self.m, &x);
                            RitzPair { lambda, vector: x, residual }
                        })
                        .collect();
                    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
                    let ok = pairs.iter().all(|r| r.residual <= self.tol);
                    if ok {
                        return WindowOutcome { pairs, converged: true, iterations: iter };
                    }
                    best = pairs;
                    if converged {
                        tol_int *= 0.1;
                        if tol_int < 1e-15 {
                            break;
                        }
                    }
                }
            }
            if p + b > max_basis {
                let keep = (nev + (max_basis - nev) / 2).min(p).max(nev);
                let sel: Vec<usize> = order[..keep].to_vec();
                let mut s = DMatrix::zeros(p, keep);
                for (dst, &src) in sel.iter().enumerate() {
                    s.set_column(dst, &eig.eigenvectors.column(src));
                }
                let qk = q.columns(0, p) * &s;
                q.columns_mut(0, keep).copy_from(&qk);
                h = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    keep,
                    sel.iter().map(|&i| eig.eigenvalues[i]),
                ));
                // The next projection recomputes the coupling to the residual block.
                p = keep;
            }
        }
        WindowOutcome { pairs: best, converged: false, iterations: self.max_iterations }
    }
}
