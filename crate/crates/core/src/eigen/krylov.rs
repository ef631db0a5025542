//! Block Krylov iteration with full reorthogonalization and thick restart.
//!
//! Finds the largest eigenvalues of an operator `T` that is self-adjoint in
//! the inner product `⟨u, v⟩ = uᴴ M v` (the shift-inverted pencil).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::jacobi::hermitian_eigen;
use crate::fem::sparse::dot;

pub trait Operator {
    fn dim(&self) -> usize;
    /// `T x`.
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
    /// `M x`.
    fn mass(&self, x: &[Complex64]) -> Vec<Complex64>;
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub block: usize,
    pub max_basis: usize,
    /// Converged when `‖T y − θ y‖_M ≤ tol · θ`.
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            block: 4,
            max_basis: 0,
            tol: 1e-10,
            max_iterations: 2000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RitzPairs {
    /// Descending.
    pub theta: Vec<f64>,
    /// M-orthonormal.
    pub vectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub applications: usize,
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn combine(basis: &[Vec<Complex64>], coef: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (v, &c) in basis.iter().zip(coef) {
        if c != Complex64::new(0.0, 0.0) {
            axpy(&mut out, c, v);
        }
    }
    out
}

struct Basis {
    v: Vec<Vec<Complex64>>,
    mv: Vec<Vec<Complex64>>,
    tv: Vec<Vec<Complex64>>,
}

impl Basis {
    /// Orthogonalizes `w` against the basis (two passes); returns it with `M w`, or
    /// `None` if it is numerically dependent.
    fn orthogonalize<O: Operator>(&self, op: &O, mut w: Vec<Complex64>) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
        let mut mw = op.mass(&w);
        let n0 = dot(&w, &mw).re.max(0.0).sqrt();
        if n0 == 0.0 || !n0.is_finite() {
            return None;
        }
        for _ in 0..2 {
            for (v, mv) in self.v.iter().zip(&self.mv) {
                let h = dot(mv, &w);
                axpy(&mut w, -h, v);
                axpy(&mut mw, -h, mv);
            }
        }
        let nrm = dot(&w, &mw).re.max(0.0).sqrt();
        if !(nrm > 1e-10 * n0) {
            return None;
        }
        let s = Complex64::new(1.0 / nrm, 0.0);
        w.iter_mut().for_each(|x| *x *= s);
        // Recompute M w from the normalized vector for accuracy.
        let mw = op.mass(&w);
        Some((w, mw))
    }
}

/// The `nev` largest eigenpairs of `T`.
pub fn largest_eigenpairs<O: Operator>(op: &O, nev: usize, opts: &KrylovOptions) -> RitzPairs {
    let n = op.dim();
    let nev = nev.min(n);
    let bs = opts.block.clamp(1, n.max(1));
    let max_basis = if opts.max_basis == 0 {
        (2 * nev + 4 * bs).max(nev + 24)
    } else {
        opts.max_basis
    }
    .min(n);
    let keep = (nev + bs).min(max_basis.saturating_sub(bs)).max(nev);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };
    let mut basis = Basis {
        v: Vec::new(),
        mv: Vec::new(),
        tv: Vec::new(),
    };
    let mut h: Vec<Vec<Complex64>> = Vec::new();
    let mut applications = 0usize;
    // The first block passes through T so that it lies in the operator's range.
    let mut candidates: Vec<Vec<Complex64>> = (0..bs)
        .map(|_| {
            applications += 1;
            op.apply(&random(&mut rng))
        })
        .collect();
    let mut best = RitzPairs {
        theta: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
        converged: false,
        applications: 0,
    };
    let mut stalled = 0;
    for _iter in 0..opts.max_iterations {
        let mut added = 0;
        for w in candidates.drain(..) {
            if basis.v.len() >= max_basis {
                break;
            }
            if let Some((w, mw)) = basis.orthogonalize(op, w) {
                let tw = op.apply(&w);
                applications += 1;
                basis.v.push(w);
                basis.mv.push(mw);
                basis.tv.push(tw);
                let k = basis.v.len();
                for row in h.iter_mut() {
                    row.push(Complex64::new(0.0, 0.0));
                }
                h.push(vec![Complex64::new(0.0, 0.0); k]);
                for i in 0..k {
                    h[i][k - 1] = dot(&basis.mv[i], &basis.tv[k - 1]);
                    h[k - 1][i] = h[i][k - 1].conj();
                }
                added += 1;
            }
        }
        let k = basis.v.len();
        let exhausted = added == 0;
        if k >= nev && (k >= (nev + bs).min(max_basis) || exhausted) {
            let flat: Vec<Complex64> = h.iter().flat_map(|r| r.iter().copied()).collect();
            let (theta, s) = hermitian_eigen(&flat, k);
            let col = |j: usize| -> Vec<Complex64> { (0..k).map(|i| s[i * k + j]).collect() };
            let mut vectors = Vec::with_capacity(nev);
            let mut tvs = Vec::with_capacity(nev);
            let mut residuals = Vec::with_capacity(nev);
            let mut all = true;
            for j in 0..nev {
                let c = col(j);
                let y = combine(&basis.v, &c, n);
                let ty = combine(&basis.tv, &c, n);
                let mut r = ty.clone();
                axpy(&mut r, Complex64::new(-theta[j], 0.0), &y);
                let rn = dot(&r, &op.mass(&r)).re.max(0.0).sqrt();
                let rel = rn / theta[j].abs().max(f64::MIN_POSITIVE);
                all &= rel <= opts.tol;
                vectors.push(y);
                tvs.push(ty);
                residuals.push(rel);
            }
            best = RitzPairs {
                theta: theta[..nev].to_vec(),
                vectors,
                residuals,
                converged: all,
                applications,
            };
            if all {
                return best;
            }
            if exhausted {
                stalled += 1;
                if k == n || stalled > 3 {
                    return best;
                }
                // Invariant subspace found but not all requested pairs: inject fresh directions.
                candidates = (0..bs)
                    .map(|_| {
                        applications += 1;
                        op.apply(&random(&mut rng))
                    })
                    .collect();
                continue;
            }
            if k + bs > max_basis {
                // Thick restart: keep the leading Ritz vectors, continue with their residuals.
                let kept: Vec<Vec<Complex64>> = (0..keep).map(col).collect();
                let v: Vec<_> = kept.iter().map(|c| combine(&basis.v, c, n)).collect();
                let tv: Vec<_> = kept.iter().map(|c| combine(&basis.tv, c, n)).collect();
                let mv: Vec<_> = kept.iter().map(|c| combine(&basis.mv, c, n)).collect();
                let mut next = Vec::new();
                for j in 0..keep {
                    if next.len() == bs {
                        break;
                    }
                    if j < nev && best.residuals[j] <= opts.tol {
                        continue;
                    }
                    let mut r = tv[j].clone();
                    axpy(&mut r, Complex64::new(-theta[j], 0.0), &v[j]);
                    next.push(r);
                }
                basis = Basis { v, mv, tv };
                h = (0..keep)
                    .map(|i| (0..keep).map(|j| dot(&basis.mv[i], &basis.tv[j])).collect())
                    .collect();
                for i in 0..keep {
                    for j in 0..i {
                        let avg = 0.5 * (h[i][j] + h[j][i].conj());
                        h[i][j] = avg;
                        h[j][i] = avg.conj();
                    }
                }
                candidates = next;
                if candidates.is_empty() {
                    candidates = (0..bs)
                        .map(|_| {
                            applications += 1;
                            op.apply(&random(&mut rng))
                        })
                        .collect();
                }
                continue;
            }
        }
        if exhausted && k < nev {
            stalled += 1;
            if stalled > 3 {
                break;
            }
            candidates = (0..bs)
                .map(|_| {
                    applications += 1;
                    op.apply(&random(&mut rng))
                })
                .collect();
            continue;
        }
        // Krylov continuation: T applied to the newest block.
        candidates = basis.tv[k - added..].to_vec();
    }
    best.applications = applications;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);

    impl Operator for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
            x.iter().zip(&self.0).map(|(a, b)| a * b).collect()
        }
        fn mass(&self, x: &[Complex64]) -> Vec<Complex64> {
            x.to_vec()
        }
    }

    #[test]
    fn diagonal_operator_with_multiplicity() {
        let mut d: Vec<f64> = (0..300).map(|i| 1.0 / (1.0 + i as f64)).collect();
        d[1] = d[0];
        d[2] = d[0];
        let r = largest_eigenpairs(&Diag(d.clone()), 5, &KrylovOptions::default());
        assert!(r.converged);
        let mut sorted = d.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in r.theta.iter().zip(&sorted) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn operator_with_nullspace() {
        // Half of the spectrum is zero, as for the projected saddle operator.
        let d: Vec<f64> = (0..80).map(|i| if i % 2 == 0 { 0.0 } else { 1.0 / i as f64 }).collect();
        let r = largest_eigenpairs(&Diag(d), 3, &KrylovOptions::default());
        assert!(r.converged);
        assert!((r.theta[0] - 1.0).abs() < 1e-12);
        assert!((r.theta[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.theta[2] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn tiny_dimension() {
        let r = largest_eigenpairs(&Diag(vec![2.0, 5.0]), 2, &KrylovOptions::default());
        assert!(r.converged);
        assert!((r.theta[0] - 5.0).abs() < 1e-14 && (r.theta[1] - 2.0).abs() < 1e-14);
    }
}
