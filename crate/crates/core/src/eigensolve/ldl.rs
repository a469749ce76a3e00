//! Sparse `L D L^T` factorization without pivoting (up-looking, elimination
//! tree based), with a symbolic phase reusable across shifts.

use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

use super::ordering::{nested_dissection, Ordering};

const NONE: usize = usize::MAX;

/// Relative pivot size below which the factorization reports a zero pivot.
pub const PIVOT_TOL: f64 = 1e-13;

/// Structure of the factor for a fixed sparsity pattern and ordering.
#[derive(Clone, Debug)]
pub struct Symbolic {
    n: usize,
    ordering: Ordering,
    // Upper triangle of the permuted matrix in compressed-column form.
    ap: Vec<usize>,
    ai: Vec<usize>,
    // For each stored entry of the source matrix, its slot in `ax` (or NONE).
    scatter: Vec<usize>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    src_row_ptr: Vec<usize>,
    src_col_idx: Vec<usize>,
}

impl Symbolic {
    pub fn analyze(a: &SparseSymMatrix) -> Self {
        Self::with_ordering(a, nested_dissection(a))
    }

    pub fn with_ordering(a: &SparseSymMatrix, ordering: Ordering) -> Self {
        let n = a.dim();
        let inv = &ordering.inverse;
        let mut count = vec![0usize; n];
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (r, c) = (inv[i], inv[j]);
                if r <= c {
                    count[c] += 1;
                }
            }
        }
        let mut ap = vec![0usize; n + 1];
        for c in 0..n {
            ap[c + 1] = ap[c] + count[c];
        }
        let mut next = ap[..n].to_vec();
        let mut ai = vec![0usize; ap[n]];
        let mut scatter = vec![NONE; a.nnz()];
        for i in 0..n {
            let start = a.row_ptr()[i];
            for (k, (j, _)) in a.row(i).enumerate() {
                let (r, c) = (inv[i], inv[j]);
                if r <= c {
                    ai[next[c]] = r;
                    scatter[start + k] = next[c];
                    next[c] += 1;
                }
            }
        }
        // Elimination tree and column counts.
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &row in &ai[ap[j]..ap[j + 1]] {
                let mut i = row;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        Self {
            n,
            ordering,
            ap,
            ai,
            scatter,
            etree,
            lp,
            src_row_ptr: a.row_ptr().to_vec(),
            src_col_idx: a.col_idx().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Strictly-lower nonzeros in `L`.
    pub fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    pub fn ordering(&self) -> &Ordering {
        &self.ordering
    }

    fn matches(&self, a: &SparseSymMatrix) -> bool {
        a.dim() == self.n && a.row_ptr() == self.src_row_ptr && a.col_idx() == self.src_col_idx
    }
}

/// Numeric factor `P A P^T = L D L^T`.
#[derive(Clone, Debug)]
pub struct LdlFactor {
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    lp: Vec<usize>,
    perm: Vec<usize>,
}

impl LdlFactor {
    /// Analyzes and factors in one step.
    pub fn new(a: &SparseSymMatrix) -> Result<Self> {
        Self::factor(a, &Symbolic::analyze(a))
    }

    pub fn factor(a: &SparseSymMatrix, sym: &Symbolic) -> Result<Self> {
        if !sym.matches(a) {
            return Err(Error::DimensionMismatch { expected: sym.n, found: a.dim() });
        }
        let n = sym.n;
        let mut ax = vec![0.0; sym.ai.len()];
        let mut row_scale = vec![0.0f64; n];
        for i in 0..n {
            let start = a.row_ptr()[i];
            for (k, (_, v)) in a.row(i).enumerate() {
                row_scale[sym.ordering.inverse[i]] = row_scale[sym.ordering.inverse[i]].max(v.abs());
                let slot = sym.scatter[start + k];
                if slot != NONE {
                    ax[slot] += v;
                }
            }
        }
        let (ap, ai, etree, lp) = (&sym.ap, &sym.ai, &sym.etree, &sym.lp);
        let mut li = vec![0usize; lp[n]];
        let mut lx = vec![0.0; lp[n]];
        let mut d = vec![0.0; n];
        let mut used = vec![false; n];
        let mut y = vec![0.0; n];
        let mut y_idx: Vec<usize> = Vec::with_capacity(n);
        let mut elim: Vec<usize> = Vec::with_capacity(n);
        let mut next_space = lp[..n].to_vec();
        for k in 0..n {
            y_idx.clear();
            for p in ap[k]..ap[k + 1] {
                let b = ai[p];
                if b == k {
                    d[k] += ax[p];
                    continue;
                }
                y[b] += ax[p];
                if !used[b] {
                    used[b] = true;
                    elim.clear();
                    elim.push(b);
                    let mut nxt = etree[b];
                    while nxt != NONE && nxt < k && !used[nxt] {
                        used[nxt] = true;
                        elim.push(nxt);
                        nxt = etree[nxt];
                    }
                    y_idx.extend(elim.iter().rev());
                }
            }
            for &c in y_idx.iter().rev() {
                let yc = y[c];
                let end = next_space[c];
                for j in lp[c]..end {
                    y[li[j]] -= lx[j] * yc;
                }
                let l = yc / d[c];
                li[end] = k;
                lx[end] = l;
                d[k] -= yc * l;
                next_space[c] += 1;
                y[c] = 0.0;
                used[c] = false;
            }
            let scale = if row_scale[k] > 0.0 { row_scale[k] } else { 1.0 };
            if !(d[k].abs() > PIVOT_TOL * scale) {
                return Err(Error::ZeroPivot(sym.ordering.perm[k]));
            }
        }
        Ok(Self { li, lx, d, lp: lp.clone(), perm: sym.ordering.perm.clone() })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// `(negative, positive)` pivot counts, equal to the inertia of `A`.
    pub fn inertia(&self) -> (usize, usize) {
        let neg = self.d.iter().filter(|&&v| v < 0.0).count();
        (neg, self.d.len() - neg)
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64], work: &mut Vec<f64>) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        work.clear();
        work.extend(self.perm.iter().map(|&old| b[old]));
        let x = &mut work[..];
        for i in 0..n {
            let xi = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                x[self.li[j]] -= self.lx[j] * xi;
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[j] * x[self.li[j]];
            }
            x[i] = acc;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        let mut w = Vec::new();
        self.solve_in_place(&mut x, &mut w);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian_1d(n: usize, shift: f64) -> SparseSymMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 - shift));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSymMatrix::from_triplets(n, &t)
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplacian_1d(200, 0.0);
        let f = LdlFactor::new(&a).unwrap();
        let x: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.mul_vec(&x);
        let y = f.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-9);
        }
        assert_eq!(f.inertia(), (0, 200));
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        // Eigenvalues of the 1D Laplacian: 2 - 2 cos(j pi / (n + 1)).
        let n = 50;
        let shift = 1.1;
        let a = laplacian_1d(n, shift);
        let f = LdlFactor::new(&a).unwrap();
        let expected = (1..=n)
            .filter(|&j| 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < shift)
            .count();
        assert_eq!(f.inertia().0, expected);
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let y = f.solve(&a.mul_vec(&x));
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-8 * u.abs());
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(LdlFactor::new(&a), Err(Error::ZeroPivot(_))));
    }

    #[test]
    fn pattern_mismatch_is_rejected() {
        let sym = Symbolic::analyze(&laplacian_1d(5, 0.0));
        let other = SparseSymMatrix::identity(5);
        assert!(LdlFactor::factor(&other, &sym).is_err());
    }

    proptest! {
        #[test]
        fn random_spd_solves(seed in 0u64..500, n in 1usize..40) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut t = Vec::new();
            let mut diag = vec![1.0; n];
            for i in 0..n {
                for j in 0..i {
                    if rng.random::<f64>() < 0.15 {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        t.push((i, j, v));
                        t.push((j, i, v));
                        diag[i] += v.abs();
                        diag[j] += v.abs();
                    }
                }
            }
            for (i, d) in diag.iter().enumerate() {
                t.push((i, i, *d));
            }
            let a = SparseSymMatrix::from_triplets(n, &t);
            let f = LdlFactor::new(&a).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = f.solve(&a.mul_vec(&x));
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-10);
            }
            prop_assert_eq!(f.inertia().0, 0);
        }
    }
}
