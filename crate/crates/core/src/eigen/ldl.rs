//! Sparse `L D Lᴴ` factorization of Hermitian positive definite matrices.
//!
//! Up-looking elimination driven by the elimination tree; `L` is unit lower
//! triangular stored by columns and `D` is real.

use num_complex::Complex64;
use thiserror::Error;

use super::ordering::{adjacency, nested_dissection};
use crate::fem::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdlError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("pivot {pivot} is not positive (d = {value:e}); matrix is singular or indefinite")]
    NonPositivePivot { pivot: usize, value: f64 },
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<Complex64>,
    d: Vec<f64>,
}

impl LdlFactor {
    /// Factors `a` after a nested-dissection reordering.
    pub fn new(a: &CsrMatrix) -> Result<Self, LdlError> {
        if a.nrows() != a.ncols() {
            return Err(LdlError::NotSquare(a.nrows(), a.ncols()));
        }
        let adj = adjacency(a.nrows(), a.indptr(), a.indices());
        let perm = nested_dissection(&adj);
        Self::with_permutation(a, perm)
    }

    pub fn with_permutation(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, LdlError> {
        let n = a.nrows();
        let mut inv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        // Column k of the permuted upper triangle: entries (i, k), i <= k,
        // equal to conj of row k's entries left of the diagonal.
        let mut up: Vec<usize> = vec![0; n + 1];
        let mut ui: Vec<usize> = Vec::with_capacity(a.nnz() / 2 + n);
        let mut ux: Vec<Complex64> = Vec::with_capacity(a.nnz() / 2 + n);
        for k in 0..n {
            let (cols, vals) = a.row(perm[k]);
            for (&j, &v) in cols.iter().zip(vals) {
                let i = inv[j];
                if i <= k {
                    ui.push(i);
                    ux.push(v.conj());
                }
            }
            up[k + 1] = ui.len();
        }

        // Symbolic: elimination tree and column counts.
        let none = usize::MAX;
        let mut parent = vec![none; n];
        let mut flag = vec![none; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &i0 in &ui[up[k]..up[k + 1]] {
                let mut i = i0;
                while i < k && flag[i] != k {
                    if parent[i] == none {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }

        // Numeric.
        let total = lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![Complex64::new(0.0, 0.0); total];
        let mut d = vec![0.0f64; n];
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        let mut pattern = vec![0usize; n];
        lnz.iter_mut().for_each(|c| *c = 0);
        flag.iter_mut().for_each(|f| *f = none);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let mut diag_scale = 0.0f64;
            for p in up[k]..up[k + 1] {
                let mut i = ui[p];
                y[i] += ux[p];
                if i == k {
                    diag_scale = ux[p].re.abs();
                }
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k].re;
            y[k] = Complex64::new(0.0, 0.0);
            while top < n {
                let i = pattern[top];
                let yi = y[i];
                y[i] = Complex64::new(0.0, 0.0);
                let start = lp[i];
                let end = start + lnz[i];
                for p in start..end {
                    y[li[p]] -= lx[p] * yi;
                }
                let l_ki = yi.conj() / d[i];
                dk -= (l_ki * yi).re;
                li[end] = k;
                lx[end] = l_ki;
                lnz[i] += 1;
                top += 1;
            }
            if !(dk > 1e-14 * diag_scale) || !dk.is_finite() {
                return Err(LdlError::NonPositivePivot { pivot: k, value: dk });
            }
            d[k] = dk;
        }
        Ok(Self { n, perm, lp, li, lx, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros of the strictly lower factor.
    pub fn nnz(&self) -> usize {
        self.lp[self.n]
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..self.n {
            let xj = x[j];
            if xj != Complex64::new(0.0, 0.0) {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj /= *dj;
        }
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p].conj() * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }
}
