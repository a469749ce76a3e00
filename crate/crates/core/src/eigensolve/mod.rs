//! Smallest eigenpairs of the pencil `K x = lambda M x`.
//!
//! The main path is shift-invert block Lanczos over successive spectral
//! windows. After each window, the eigenvalues found below a cut placed in a
//! spectral gap are certified complete by the inertia of `K - cut M`.

mod dense;
mod lanczos;
pub mod ldl;
pub mod ordering;
mod pcg;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::assembly::DofMap;
use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

pub use dense::dense_generalized_eigen;
pub use ldl::{LdlFactor, Symbolic};
pub use pcg::smallest_eigenpairs_iterative;

use lanczos::{basis_limit, rayleigh_residual, Window};

/// Seed of the deterministic starting blocks (ChaCha8, uniform on [-1, 1]).
pub const START_SEED: u64 = 0x5eed_b111_a4d5;

const MAX_WINDOW: usize = 48;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOpts {
    pub num_states: usize,
    pub rel_residual_tol: f64,
    /// Block expansions allowed per spectral window.
    pub max_iterations: usize,
    pub shift: f64,
    pub block_size: usize,
}

impl Default for SolverOpts {
    fn default() -> Self {
        Self { num_states: 10, rel_residual_tol: 1e-9, max_iterations: 600, shift: 0.0, block_size: 4 }
    }
}

impl SolverOpts {
    pub fn new(num_states: usize) -> Self {
        Self { num_states, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_states == 0 {
            return Err(Error::InvalidParams("num_states must be at least 1".into()));
        }
        if !(self.rel_residual_tol > 0.0 && self.rel_residual_tol <= 1e-4) {
            return Err(Error::InvalidParams(format!(
                "rel_residual_tol must lie in (0, 1e-4], got {}",
                self.rel_residual_tol
            )));
        }
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(Error::InvalidParams(format!("shift must be >= 0, got {}", self.shift)));
        }
        if self.block_size == 0 {
            return Err(Error::InvalidParams("block_size must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub k: f64,
    /// Coefficients over interior degrees of freedom, M-normalized.
    pub coeffs: Vec<f64>,
    /// Relative residual `||K x - lambda M x|| / ||K x||`.
    pub residual: f64,
    pub converged: bool,
}

impl EigenPair {
    fn new(lambda: f64, mut coeffs: Vec<f64>, residual: f64, tol: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParams(format!("non-positive eigenvalue {lambda}: pencil is not definite")));
        }
        // Sign convention: the entry of largest magnitude is positive.
        let big = coeffs.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if big < 0.0 {
            coeffs.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(Self { lambda, k: lambda.sqrt(), coeffs, residual, converged: residual <= tol })
    }
}

#[derive(Clone, Debug, Default)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
    /// Whether completeness below the last eigenvalue was checked by inertia.
    pub inertia_verified: bool,
    pub dofs: Option<Arc<DofMap>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.k).collect()
    }

    pub fn with_dofs(mut self, dofs: Arc<DofMap>) -> Self {
        self.dofs = Some(dofs);
        self
    }
}

/// Number of eigenvalues of the pencil strictly below `cut`.
pub fn count_below(k: &SparseSymMatrix, m: &SparseSymMatrix, sym: &Symbolic, cut: f64) -> Result<usize> {
    let a = SparseSymMatrix::linear_combination(1.0, k, -cut, m)?;
    Ok(LdlFactor::factor(&a, sym)?.inertia().0)
}

/// Factors `K - sigma M`, nudging `sigma` upward on an exact zero pivot.
fn factor_shifted(k: &SparseSymMatrix, m: &SparseSymMatrix, sym: &Symbolic, sigma: f64) -> Result<(f64, LdlFactor)> {
    let mut s = sigma;
    for attempt in 0..6 {
        let a = SparseSymMatrix::linear_combination(1.0, k, -s, m)?;
        match LdlFactor::factor(&a, sym) {
            Ok(f) => return Ok((s, f)),
            Err(Error::ZeroPivot(_)) => {
                s = if s == 0.0 { 1e-8 } else { s * (1.0 + 1e-6 * 10f64.powi(attempt)) };
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::ZeroPivot(0))
}

fn dense_path(k: &SparseSymMatrix, m: &SparseSymMatrix, opts: &SolverOpts) -> Result<Spectrum> {
    let (vals, vecs) = dense_generalized_eigen(k, m)?;
    let mut pairs = Vec::with_capacity(opts.num_states);
    for i in 0..opts.num_states {
        let x: Vec<f64> = vecs.column(i).iter().copied().collect();
        let (_, residual) = rayleigh_residual(k, m, &x);
        pairs.push(EigenPair::new(vals[i], x, residual, opts.rel_residual_tol)?);
    }
    Ok(Spectrum { pairs, inertia_verified: false, dofs: None })
}

fn check_dims(k: &SparseSymMatrix, m: &SparseSymMatrix, opts: &SolverOpts) -> Result<()> {
    opts.validate()?;
    if k.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: m.dim() });
    }
    if opts.num_states > k.dim() {
        return Err(Error::InvalidParams(format!(
            "requested {} states but the system has only {} degrees of freedom",
            opts.num_states,
            k.dim()
        )));
    }
    Ok(())
}

/// Picks a cut strictly inside a gap of the sorted `lambdas`, below the
/// largest value; returns the cut and how many values lie beneath it.
fn gap_cut(lambdas: &[f64], floor: f64) -> Option<(f64, usize)> {
    for i in (1..lambdas.len()).rev() {
        let (lo, hi) = (lambdas[i - 1], lambdas[i]);
        if hi - lo > 1e-8 * hi && lo >= floor {
            return Some((0.5 * (lo + hi), i));
        }
    }
    None
}

/// The `num_states` smallest eigenpairs of `K x = lambda M x`.
pub fn smallest_eigenpairs(k: &SparseSymMatrix, m: &SparseSymMatrix, opts: &SolverOpts) -> Result<Spectrum> {
    check_dims(k, m, opts)?;
    let n = k.dim();
    let nstates = opts.num_states;
    let b = opts.block_size;
    let guard = b.max(4);
    let sym = Symbolic::analyze(&SparseSymMatrix::linear_combination(1.0, k, -1.0, m)?);

    let mut accepted: Vec<EigenPair> = Vec::new();
    let mut locked = DMatrix::<f64>::zeros(n, 0);
    let mut floor = 0.0f64;
    let mut sigma = opts.shift;
    let mut window_no = 0u64;
    while accepted.len() < nstates {
        let need = nstates - accepted.len();
        let mut nev = need.min(MAX_WINDOW) + guard;
        let mut attempt = 0;
        loop {
            if basis_limit(nev, b) + b + locked.ncols() > n {
                // Too small for a Krylov window: finish densely.
                return dense_path(k, m, opts);
            }
            let (s, factor) = factor_shifted(k, m, &sym, sigma)?;
            let win = Window {
                k,
                m,
                factor: &factor,
                locked: &locked,
                nev,
                block: b,
                max_iterations: opts.max_iterations,
                tol: opts.rel_residual_tol,
                seed: START_SEED ^ (window_no << 8) ^ attempt,
            };
            let out = win.run();
            log::debug!(
                "window {window_no} sigma {s:.6e} nev {nev}: {} iterations, converged {}",
                out.iterations,
                out.converged
            );
            let fresh: Vec<_> = out.pairs.into_iter().filter(|p| p.lambda > floor).collect();
            if !out.converged {
                let mut partial = accepted;
                for p in fresh {
                    partial.push(EigenPair::new(p.lambda, p.vector, p.residual, opts.rel_residual_tol)?);
                }
                partial.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
                let converged = partial.iter().filter(|p| p.converged).count().min(nstates);
                partial.truncate(nstates);
                return Err(Error::NoConvergence {
                    requested: nstates,
                    converged,
                    partial: Box::new(Spectrum { pairs: partial, inertia_verified: false, dofs: None }),
                });
            }
            let lambdas: Vec<f64> = fresh.iter().map(|p| p.lambda).collect();
            let verdict = match gap_cut(&lambdas, floor) {
                Some((cut, found)) => {
                    let total = count_below(k, m, &sym, cut)?;
                    (total == accepted.len() + found).then_some((cut, found))
                }
                None => None,
            };
            let Some((cut, found)) = verdict else {
                attempt += 1;
                if attempt > 4 {
                    return Err(Error::NoConvergence {
                        requested: nstates,
                        converged: accepted.len(),
                        partial: Box::new(Spectrum { pairs: accepted, inertia_verified: true, dofs: None }),
                    });
                }
                log::debug!("window {window_no}: inertia mismatch, widening");
                nev = nev * 3 / 2 + 1;
                sigma = floor;
                continue;
            };
            let mut spacing = 0.0;
            if found > 1 {
                spacing = (lambdas[found - 1] - lambdas[0]) / (found - 1) as f64;
            }
            let mut cols = Vec::with_capacity(found);
            for p in fresh.into_iter().take(found) {
                cols.push(nalgebra::DVector::from_vec(p.vector.clone()));
                accepted.push(EigenPair::new(p.lambda, p.vector, p.residual, opts.rel_residual_tol)?);
            }
            let mut all: Vec<nalgebra::DVector<f64>> = locked.column_iter().map(|c| c.clone_owned()).collect();
            all.extend(cols);
            locked = DMatrix::from_columns(&all);
            floor = cut;
            let next_need = nstates.saturating_sub(accepted.len()).min(MAX_WINDOW);
            sigma = cut + 0.4 * spacing * next_need as f64;
            break;
        }
        window_no += 1;
    }
    accepted.truncate(nstates);
    Ok(Spectrum { pairs: accepted, inertia_verified: true, dofs: None })
}

/// Relative residuals `||K x - lambda M x|| / ||K x||`, recomputed from the
/// returned vectors.
pub fn residual_report(k: &SparseSymMatrix, m: &SparseSymMatrix, spectrum: &Spectrum) -> Result<Vec<f64>> {
    if k.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: m.dim() });
    }
    spectrum
        .pairs
        .iter()
        .map(|p| {
            if p.coeffs.len() != k.dim() {
                return Err(Error::DimensionMismatch { expected: k.dim(), found: p.coeffs.len() });
            }
            let kx = k.mul_vec(&p.coeffs);
            let mx = m.mul_vec(&p.coeffs);
            let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - p.lambda * b).collect();
            Ok(crate::sparse::norm2(&r) / crate::sparse::norm2(&kx))
        })
        .collect()
}

/// Energies `E = k^2 / 2` in units with `hbar = m = 1`.
pub fn energies(spectrum: &Spectrum) -> Vec<f64> {
    spectrum.pairs.iter().map(|p| 0.5 * p.k * p.k).collect()
}

/// Largest `|x_i^T M x_j - delta_ij|` over the returned vectors.
pub fn orthonormality_defect(m: &SparseSymMatrix, spectrum: &Spectrum) -> f64 {
    let mx: Vec<Vec<f64>> = spectrum.pairs.iter().map(|p| m.mul_vec(&p.coeffs)).collect();
    let mut worst = 0.0f64;
    for (i, pi) in spectrum.pairs.iter().enumerate() {
        for (j, mxj) in mx.iter().enumerate() {
            let g = crate::sparse::dot(&pi.coeffs, mxj);
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests;
