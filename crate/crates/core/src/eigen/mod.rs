//! Smallest eigenpairs of Hermitian pencils by shift-invert block Krylov iteration.
//!
//! Definite pencils factor `K + sM`. Saddle pencils `[[A, C], [Cᴴ, 0]]` are
//! solved through the primal space: when the discrete gradient `G` with
//! `C = B G` and `A G = 0` is available, `K + sM` is inverted blockwise with
//! two sparse positive definite factorizations (`A + sB` and `Gᴴ B G`);
//! otherwise a dense Schur complement on the multiplier space is used.

pub mod dense;
pub mod jacobi;
pub mod krylov;
pub mod ldl;
pub mod ordering;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::sparse::{dot, norm2};
use crate::fem::{CsrMatrix, HermitianPencil, Layout, SaddleBlocks};
use krylov::{largest_eigenpairs, KrylovOptions, Operator};
use ldl::LdlFactor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("requested {requested} modes but the pencil has only {available} finite eigenvalues")]
    TooManyModes { requested: usize, available: usize },
    #[error("iteration did not converge (worst relative residual {0:e})")]
    NoConvergence(f64),
    #[error("residual check failed for mode {mode}: {residual:e} > {tol:e}")]
    Residual { mode: usize, residual: f64, tol: f64 },
    #[error("pencil layout does not match the solver")]
    Layout,
    #[error("every returned mode is near zero")]
    AllNearZero,
    #[error("invalid options: {0}")]
    Options(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub num_modes: usize,
    /// Magnitude of the (negative) spectral shift; `None` picks one from the pencil.
    pub shift: Option<f64>,
    pub residual_tol: f64,
    /// Finite eigenvalues above `infinite_cutoff × median` are treated as infinite.
    pub infinite_cutoff: f64,
    pub zero_frac: f64,
    pub block_size: usize,
    pub krylov_tol: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            num_modes: 4,
            shift: None,
            residual_tol: 1e-8,
            infinite_cutoff: 1e12,
            zero_frac: 1e-3,
            block_size: 4,
            krylov_tol: 1e-10,
            seed: 0x5eed,
        }
    }
}

impl SolveOptions {
    pub fn with_modes(num_modes: usize) -> Self {
        Self {
            num_modes,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), EigenError> {
        if self.num_modes == 0 {
            return Err(EigenError::Options("num_modes must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(EigenError::Options("residual_tol must be positive".into()));
        }
        if let Some(s) = self.shift {
            if !(s.is_finite() && s >= 0.0) {
                return Err(EigenError::Options("shift must be finite and non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending `λ = k_t²`.
    pub eigenvalues: Vec<f64>,
    /// Primal parts, normalized to unit `M` (or `B`) norm.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Multiplier parts for saddle pencils.
    pub multipliers: Option<Vec<Vec<Complex64>>>,
    /// `‖Kx − λMx‖₂ / ((‖K‖∞ + |λ| ‖M‖∞) ‖x‖₂)`.
    pub residuals: Vec<f64>,
    /// `‖Cᴴ ξ‖₂ / ‖ξ‖₂` for saddle pencils.
    pub constraint_residuals: Option<Vec<f64>>,
    /// Shift actually used (the pencil was factored at `−shift`).
    pub shift: f64,
}

fn default_shift(k: &CsrMatrix, m: &CsrMatrix) -> f64 {
    let n = k.nrows().max(1) as f64;
    let (tk, tm) = (k.trace_re(), m.trace_re());
    let s = if tm > 0.0 { 0.1 * tk / (tm * n) } else { 1.0 };
    if s.is_finite() && s > 0.0 {
        s
    } else {
        1.0
    }
}

struct DefiniteOp<'a> {
    m: &'a CsrMatrix,
    f: LdlFactor,
}

impl Operator for DefiniteOp<'_> {
    fn dim(&self) -> usize {
        self.m.nrows()
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.f.solve(&self.m.mul_vec(x))
    }
    fn mass(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.m.mul_vec(x)
    }
}

enum MultiplierSolve {
    /// `Gᴴ B G`, valid when `C = B G` and `A G = 0`.
    Gradient { g: CsrMatrix, lg: LdlFactor },
    /// Dense Schur complement `Cᴴ (A + sB)⁻¹ C`.
    Schur(Cholesky<Complex64, Dyn>),
}

/// Solver for `(K + sM) [x; y] = [f; g]` on a saddle pencil.
pub struct SaddleSolver<'a> {
    blocks: &'a SaddleBlocks,
    s: f64,
    h: LdlFactor,
    mult: MultiplierSolve,
}

impl<'a> SaddleSolver<'a> {
    pub fn new(blocks: &'a SaddleBlocks, s: f64, use_gradient: bool) -> Result<Self, EigenError> {
        let hmat = blocks.a.add_scaled(&blocks.b, s);
        let h = LdlFactor::new(&hmat).map_err(|e| EigenError::Factorization(e.to_string()))?;
        let m = blocks.c.ncols();
        let structured = use_gradient
            && blocks.g.ncols() == m
            && blocks.g.nrows() == blocks.a.nrows()
            && Self::gradient_identities_hold(blocks);
        let mult = if structured {
            let bg = blocks.b.matmul(&blocks.g);
            let lgm = blocks.g.adjoint().matmul(&bg);
            let lg = LdlFactor::new(&lgm).map_err(|e| EigenError::Factorization(e.to_string()))?;
            MultiplierSolve::Gradient { g: blocks.g.clone(), lg }
        } else {
            if m > 4000 {
                return Err(EigenError::Factorization(format!(
                    "{m} multipliers without a gradient structure is too many for the dense Schur complement"
                )));
            }
            let mut s_mat = DMatrix::<Complex64>::zeros(m, m);
            let ch = blocks.c.adjoint();
            let mut col = vec![Complex64::new(0.0, 0.0); m];
            for j in 0..m {
                // Column j of C.
                let mut cj = vec![Complex64::new(0.0, 0.0); blocks.c.nrows()];
                for (r, cj_r) in cj.iter_mut().enumerate() {
                    *cj_r = blocks.c.get(r, j);
                }
                let u = h.solve(&cj);
                ch.mul_vec_into(&u, &mut col);
                for i in 0..m {
                    s_mat[(i, j)] = col[i];
                }
            }
            let s_mat = (&s_mat + s_mat.adjoint()) * Complex64::new(0.5, 0.0);
            let chol = s_mat
                .cholesky()
                .ok_or(EigenError::Factorization("constraint block is rank deficient".into()))?;
            MultiplierSolve::Schur(chol)
        };
        Ok(Self { blocks, s, h, mult })
    }

    fn gradient_identities_hold(b: &SaddleBlocks) -> bool {
        if b.g.nnz() == 0 && b.c.nnz() > 0 {
            return false;
        }
        let bg = b.b.matmul(&b.g);
        let diff = bg.add_scaled(&b.c, -1.0).max_abs();
        let ag = b.a.matmul(&b.g).max_abs();
        diff <= 1e-10 * b.c.max_abs().max(f64::MIN_POSITIVE) && ag <= 1e-10 * b.a.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn is_structured(&self) -> bool {
        matches!(self.mult, MultiplierSolve::Gradient { .. })
    }

    fn solve_once(&self, f: &[Complex64], g: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let u = self.h.solve(f);
        let mut r = self.blocks.c.adjoint_mul_vec(&u);
        for (ri, gi) in r.iter_mut().zip(g) {
            *ri -= gi;
        }
        match &self.mult {
            MultiplierSolve::Gradient { g: grad, lg } => {
                let w = lg.solve(&r);
                let gw = grad.mul_vec(&w);
                let x: Vec<Complex64> = u.iter().zip(&gw).map(|(a, b)| a - b).collect();
                let y = w.iter().map(|z| z * self.s).collect();
                (x, y)
            }
            MultiplierSolve::Schur(chol) => {
                let y: Vec<Complex64> = chol.solve(&DVector::from_vec(r)).iter().copied().collect();
                let cy = self.blocks.c.mul_vec(&y);
                let hc = self.h.solve(&cy);
                let x = u.iter().zip(&hc).map(|(a, b)| a - b).collect();
                (x, y)
            }
        }
    }

    /// Removes the discrete-gradient component of `xi` so that `Cᴴ xi = 0` up to
    /// roundoff (`B`-orthogonal projection; identity on the Schur path).
    pub fn project_constraint(&self, xi: &mut [Complex64]) {
        if let MultiplierSolve::Gradient { g, lg } = &self.mult {
            for _ in 0..2 {
                let w = lg.solve(&self.blocks.c.adjoint_mul_vec(xi));
                let gw = g.mul_vec(&w);
                xi.iter_mut().zip(&gw).for_each(|(a, b)| *a -= b);
            }
        }
    }

    /// Multiplier of the eigenpair `(λ, ξ)` from the first block row projected onto
    /// `range(G)`: since `GᴴA = 0`, `L_G p = λ Cᴴξ`. `None` on the Schur path.
    pub fn structured_multiplier(&self, lambda: f64, xi: &[Complex64]) -> Option<Vec<Complex64>> {
        match &self.mult {
            MultiplierSolve::Gradient { lg, .. } => {
                let w = lg.solve(&self.blocks.c.adjoint_mul_vec(xi));
                Some(w.into_iter().map(|z| z * lambda).collect())
            }
            MultiplierSolve::Schur(_) => None,
        }
    }

    /// Residual of the full shifted system.
    fn residual(&self, x: &[Complex64], y: &[Complex64], f: &[Complex64], g: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let ax = self.blocks.a.mul_vec(x);
        let bx = self.blocks.b.mul_vec(x);
        let cy = self.blocks.c.mul_vec(y);
        let r1 = (0..x.len()).map(|i| f[i] - ax[i] - bx[i] * self.s - cy[i]).collect();
        let chx = self.blocks.c.adjoint_mul_vec(x);
        let r2 = (0..y.len()).map(|i| g[i] - chx[i]).collect();
        (r1, r2)
    }

    /// Solves `(K + sM)[x; y] = [f; g]` with one step of iterative refinement when needed.
    pub fn solve(&self, f: &[Complex64], g: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let (mut x, mut y) = self.solve_once(f, g);
        let (r1, r2) = self.residual(&x, &y, f, g);
        let scale = norm2(f) + norm2(g);
        if norm2(&r1) + norm2(&r2) > 1e-12 * scale {
            let (dx, dy) = self.solve_once(&r1, &r2);
            x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
            y.iter_mut().zip(&dy).for_each(|(a, b)| *a += b);
        }
        (x, y)
    }
}

struct SaddleOp<'a> {
    solver: SaddleSolver<'a>,
    zeros: Vec<Complex64>,
}

impl Operator for SaddleOp<'_> {
    fn dim(&self) -> usize {
        self.solver.blocks.a.nrows()
    }
    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.solver.solve(&self.solver.blocks.b.mul_vec(x), &self.zeros).0
    }
    fn mass(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.solver.blocks.b.mul_vec(x)
    }
}

fn pencil_residual(k: &CsrMatrix, m: &CsrMatrix, lambda: f64, x: &[Complex64]) -> f64 {
    let kx = k.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<Complex64> = kx.iter().zip(&mx).map(|(a, b)| a - b * lambda).collect();
    norm2(&r) / ((k.norm_inf() + lambda.abs() * m.norm_inf()) * norm2(x)).max(f64::MIN_POSITIVE)
}

fn krylov_opts(opts: &SolveOptions) -> KrylovOptions {
    KrylovOptions {
        block: opts.block_size.max(1),
        tol: opts.krylov_tol,
        seed: opts.seed,
        ..KrylovOptions::default()
    }
}

/// Smallest eigenpairs of a definite pencil (`M` positive definite).
pub fn solve_definite(pencil: &HermitianPencil, opts: &SolveOptions) -> Result<Spectrum, EigenError> {
    opts.check()?;
    if pencil.layout != Layout::Plain {
        return Err(EigenError::Layout);
    }
    let n = pencil.dim();
    if opts.num_modes > n {
        return Err(EigenError::TooManyModes {
            requested: opts.num_modes,
            available: n,
        });
    }
    let mut shift = opts.shift.unwrap_or_else(|| default_shift(&pencil.k, &pencil.m));
    let mut last_err = None;
    for _attempt in 0..4 {
        let shifted = pencil.k.add_scaled(&pencil.m, shift);
        match LdlFactor::new(&shifted) {
            Ok(f) => {
                let op = DefiniteOp { m: &pencil.m, f };
                let ritz = largest_eigenpairs(&op, opts.num_modes, &krylov_opts(opts));
                return finish_definite(pencil, opts, ritz, shift);
            }
            Err(e) => {
                last_err = Some(e);
                shift = if shift == 0.0 { 1.0 } else { shift * 10.0 };
            }
        }
    }
    Err(EigenError::Factorization(last_err.map(|e| e.to_string()).unwrap_or_default()))
}

fn check_convergence(ritz: &krylov::RitzPairs) -> Result<(), EigenError> {
    if !ritz.converged {
        let worst = ritz.residuals.iter().copied().fold(0.0, f64::max);
        return Err(EigenError::NoConvergence(worst));
    }
    Ok(())
}

fn finish_definite(
    pencil: &HermitianPencil,
    opts: &SolveOptions,
    ritz: krylov::RitzPairs,
    shift: f64,
) -> Result<Spectrum, EigenError> {
    check_convergence(&ritz)?;
    let mut pairs: Vec<(f64, Vec<Complex64>)> = ritz
        .vectors
        .into_iter()
        .map(|y| {
            let ky = pencil.k.mul_vec(&y);
            let my = pencil.m.mul_vec(&y);
            (dot(&y, &ky).re / dot(&y, &my).re, y)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut residuals = Vec::with_capacity(pairs.len());
    for (i, (lam, y)) in pairs.iter().enumerate() {
        let r = pencil_residual(&pencil.k, &pencil.m, *lam, y);
        if !(r <= opts.residual_tol) {
            return Err(EigenError::Residual {
                mode: i,
                residual: r,
                tol: opts.residual_tol,
            });
        }
        residuals.push(r);
    }
    Ok(Spectrum {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.1).collect(),
        multipliers: None,
        residuals,
        constraint_residuals: None,
        shift,
    })
}

/// Smallest finite eigenpairs of a saddle pencil.
pub fn solve_saddle(pencil: &HermitianPencil, opts: &SolveOptions) -> Result<Spectrum, EigenError> {
    solve_saddle_with(pencil, opts, true)
}

/// As [`solve_saddle`], optionally ignoring the gradient structure (dense Schur path).
pub fn solve_saddle_with(pencil: &HermitianPencil, opts: &SolveOptions, use_gradient: bool) -> Result<Spectrum, EigenError> {
    opts.check()?;
    let Layout::Saddle {
        primal_dim,
        multiplier_dim,
    } = pencil.layout
    else {
        return Err(EigenError::Layout);
    };
    let owned;
    let blocks = match &pencil.blocks {
        Some(b) => b,
        None => {
            owned = split_blocks(pencil, primal_dim, multiplier_dim);
            &owned
        }
    };
    let finite = primal_dim.saturating_sub(multiplier_dim);
    if opts.num_modes > finite {
        return Err(EigenError::TooManyModes {
            requested: opts.num_modes,
            available: finite,
        });
    }
    let mut shift = opts.shift.unwrap_or_else(|| default_shift(&blocks.a, &blocks.b));
    let mut last = String::new();
    for _attempt in 0..4 {
        match SaddleSolver::new(blocks, shift, use_gradient) {
            Ok(solver) => {
                let op = SaddleOp {
                    solver,
                    zeros: vec![Complex64::new(0.0, 0.0); multiplier_dim],
                };
                let ritz = largest_eigenpairs(&op, opts.num_modes, &krylov_opts(opts));
                return finish_saddle(pencil, blocks, opts, &op, ritz, shift);
            }
            Err(e) => {
                last = e.to_string();
                shift = if shift == 0.0 { 1.0 } else { shift * 10.0 };
            }
        }
    }
    Err(EigenError::Factorization(last))
}

fn split_blocks(pencil: &HermitianPencil, p: usize, m: usize) -> SaddleBlocks {
    let prim: Vec<usize> = (0..p).collect();
    let mult: Vec<usize> = (p..p + m).collect();
    SaddleBlocks {
        a: pencil.k.submatrix(&prim, &prim),
        b: pencil.m.submatrix(&prim, &prim),
        c: pencil.k.submatrix(&prim, &mult),
        g: CsrMatrix::zeros(p, m),
    }
}

fn finish_saddle(
    pencil: &HermitianPencil,
    blocks: &SaddleBlocks,
    opts: &SolveOptions,
    op: &SaddleOp,
    ritz: krylov::RitzPairs,
    shift: f64,
) -> Result<Spectrum, EigenError> {
    check_convergence(&ritz)?;
    let theta_max = ritz.theta.iter().copied().fold(0.0, f64::max);
    let mut pairs = Vec::new();
    for (theta, mut xi) in ritz.theta.iter().zip(ritz.vectors) {
        if *theta <= 1e-12 * theta_max {
            continue;
        }
        op.solver.project_constraint(&mut xi);
        let nb = dot(&xi, &blocks.b.mul_vec(&xi)).re.sqrt();
        xi.iter_mut().for_each(|z| *z /= nb);
        let axi = blocks.a.mul_vec(&xi);
        let bxi = blocks.b.mul_vec(&xi);
        let lam = dot(&xi, &axi).re / dot(&xi, &bxi).re;
        // (K + sM) z = (λ + s) M z  ⇒  multiplier = (λ + s) y for the rhs [Bξ; 0].
        let zeta = op.solver.structured_multiplier(lam, &xi).unwrap_or_else(|| {
            let (_, y) = op.solver.solve(&bxi, &op.zeros);
            y.iter().map(|v| v * (lam + shift)).collect()
        });
        pairs.push((lam, xi, zeta));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pairs.len() < opts.num_modes {
        return Err(EigenError::TooManyModes {
            requested: opts.num_modes,
            available: pairs.len(),
        });
    }
    let median = pairs[pairs.len() / 2].0.abs();
    if let Some(i) = pairs
        .iter()
        .position(|p| p.0 > opts.infinite_cutoff * median.max(f64::MIN_POSITIVE))
    {
        pairs.truncate(i);
    }
    let mut residuals = Vec::new();
    let mut constraint = Vec::new();
    for (i, (lam, xi, zeta)) in pairs.iter().enumerate() {
        let mut z = xi.clone();
        z.extend_from_slice(zeta);
        let r = pencil_residual(&pencil.k, &pencil.m, *lam, &z);
        if !(r <= opts.residual_tol) {
            return Err(EigenError::Residual {
                mode: i,
                residual: r,
                tol: opts.residual_tol,
            });
        }
        residuals.push(r);
        constraint.push(norm2(&blocks.c.adjoint_mul_vec(xi)) / norm2(xi));
    }
    Ok(Spectrum {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        eigenvectors: pairs.iter().map(|p| p.1.clone()).collect(),
        multipliers: Some(pairs.into_iter().map(|p| p.2).collect()),
        residuals,
        constraint_residuals: Some(constraint),
        shift,
    })
}

/// Dispatches on the pencil layout.
pub fn solve(pencil: &HermitianPencil, opts: &SolveOptions) -> Result<Spectrum, EigenError> {
    match pencil.layout {
        Layout::Plain => solve_definite(pencil, opts),
        Layout::Saddle { .. } => solve_saddle(pencil, opts),
    }
}

/// All finite eigenvalues by the dense reference route, ascending.
pub fn solve_dense(pencil: &HermitianPencil, shift: Option<f64>) -> Result<Vec<f64>, EigenError> {
    match pencil.layout {
        Layout::Plain => Ok(dense::dense_definite(&pencil.k, &pencil.m)?.0),
        Layout::Saddle { primal_dim, .. } => {
            let s = shift.unwrap_or_else(|| {
                let prim: Vec<usize> = (0..primal_dim).collect();
                default_shift(&pencil.k.submatrix(&prim, &prim), &pencil.m.submatrix(&prim, &prim))
            });
            dense::dense_saddle(&pencil.k, &pencil.m, primal_dim, s)
        }
    }
}

/// Splits indices into near-zero and nonzero modes.
///
/// A mode is near zero when `√λ < zero_frac · median(top half of √λ)`.
pub fn classify_near_zero(eigenvalues: &[f64], zero_frac: f64) -> Result<(Vec<usize>, Vec<usize>), EigenError> {
    if eigenvalues.is_empty() {
        return Err(EigenError::Options("empty spectrum".into()));
    }
    let mut roots: Vec<f64> = eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    roots.sort_by(f64::total_cmp);
    let top = &roots[roots.len() / 2..];
    let median = top[top.len() / 2];
    let threshold = zero_frac * median;
    if !(median > 0.0) {
        return Err(EigenError::AllNearZero);
    }
    let (mut zero, mut nonzero) = (Vec::new(), Vec::new());
    for (i, l) in eigenvalues.iter().enumerate() {
        if l.max(0.0).sqrt() < threshold {
            zero.push(i);
        } else {
            nonzero.push(i);
        }
    }
    if nonzero.is_empty() {
        return Err(EigenError::AllNearZero);
    }
    Ok((zero, nonzero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, DofKind, DofMap, Formulation};
    use crate::medium::MediumSpec;
    use crate::mesh::{generate_annulus, generate_rectangle};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn plain(k: &[f64], m: &[f64], n: usize) -> HermitianPencil {
        let to = |v: &[f64]| {
            let t: Vec<_> = (0..n * n).filter(|&i| v[i] != 0.0).map(|i| (i / n, i % n, c(v[i]))).collect();
            CsrMatrix::from_triplets(n, n, &t)
        };
        let dummy = generate_rectangle(1.0, 1.0, 1, 1).unwrap();
        HermitianPencil {
            k: to(k),
            m: to(m),
            layout: Layout::Plain,
            primal: DofMap::new(&dummy, DofKind::NodalAll),
            multiplier: None,
            blocks: None,
        }
    }

    #[test]
    fn two_by_two_definite() {
        let p = plain(&[0.0, 0.0, 0.0, 2.0], &[1.0, 0.0, 0.0, 1.0], 2);
        let s = solve_definite(&p, &SolveOptions::with_modes(2)).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-12 && (s.eigenvalues[1] - 2.0).abs() < 1e-12);
        let p = plain(&[2.0, -1.0, -1.0, 2.0], &[1.0, 0.0, 0.0, 1.0], 2);
        let s = solve_definite(&p, &SolveOptions::with_modes(2)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12 && (s.eigenvalues[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn toy_saddle_matches_dense() {
        // K = [[2,0,1],[0,3,0],[1,0,0]], M = diag(1,1,0): the only finite eigenvalue is 3.
        let k = CsrMatrix::from_triplets(3, 3, &[(0, 0, c(2.0)), (1, 1, c(3.0)), (0, 2, c(1.0)), (2, 0, c(1.0))]);
        let m = CsrMatrix::from_triplets(3, 3, &[(0, 0, c(1.0)), (1, 1, c(1.0))]);
        let dummy = generate_rectangle(1.0, 1.0, 1, 1).unwrap();
        let p = HermitianPencil {
            k,
            m,
            layout: Layout::Saddle {
                primal_dim: 2,
                multiplier_dim: 1,
            },
            primal: DofMap::new(&dummy, DofKind::NodalAll),
            multiplier: Some(DofMap::new(&dummy, DofKind::NodalAll)),
            blocks: None,
        };
        let s = solve_saddle(&p, &SolveOptions::with_modes(1)).unwrap();
        assert!((s.eigenvalues[0] - 3.0).abs() < 1e-12);
        let d = solve_dense(&p, None).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0] - 3.0).abs() < 1e-12);
        assert!(solve_saddle(&p, &SolveOptions::with_modes(2)).is_err());
    }

    #[test]
    fn scalar_te_has_constant_mode() {
        let mesh = generate_rectangle(1.2e-3, 1e-3, 6, 5).unwrap();
        let p = assemble(Formulation::ScalarTE, &mesh, &MediumSpec::reference()).unwrap();
        let s = solve_definite(&p, &SolveOptions::with_modes(3)).unwrap();
        let (zero, nonzero) = classify_near_zero(&s.eigenvalues, 1e-3).unwrap();
        assert_eq!(zero, vec![0]);
        assert_eq!(nonzero.len(), 2);
        let v = &s.eigenvectors[0];
        let spread = v.iter().map(|z| (z - v[0]).norm()).fold(0.0, f64::max);
        assert!(spread < 1e-6 * v[0].norm());
    }

    #[test]
    fn sparse_matches_dense_on_small_pencils() {
        let spec = MediumSpec::reference();
        for mesh in [
            generate_rectangle(1.2e-3, 1e-3, 4, 3).unwrap(),
            generate_annulus(1e-3, 2e-3, 2, 12).unwrap(),
        ] {
            for f in Formulation::ALL {
                let p = assemble(f, &mesh, &spec).unwrap();
                let dense = solve_dense(&p, None).unwrap();
                let q = 4;
                let s = solve(&p, &SolveOptions::with_modes(q)).unwrap();
                for i in 0..q {
                    let scale = dense[q - 1].abs();
                    assert!(
                        (s.eigenvalues[i] - dense[i]).abs() <= 1e-8 * scale.max(dense[i].abs()),
                        "{f:?} {i}: {} vs {}",
                        s.eigenvalues[i],
                        dense[i]
                    );
                }
            }
        }
    }

    #[test]
    fn schur_path_agrees_with_gradient_path() {
        let mesh = generate_annulus(1e-3, 2e-3, 3, 16).unwrap();
        let p = assemble(Formulation::VectorTM, &mesh, &MediumSpec::reference()).unwrap();
        let a = solve_saddle_with(&p, &SolveOptions::with_modes(5), true).unwrap();
        let b = solve_saddle_with(&p, &SolveOptions::with_modes(5), false).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() <= 1e-9 * a.eigenvalues[4]);
        }
    }

    #[test]
    fn scaling_and_shift_invariance() {
        let mesh = generate_rectangle(1.2e-3, 1e-3, 8, 6).unwrap();
        let p = assemble(Formulation::ScalarTM, &mesh, &MediumSpec::reference()).unwrap();
        let base = solve(&p, &SolveOptions::with_modes(4)).unwrap();
        let mut scaled = p.clone();
        scaled.k = p.k.scale(7.5);
        scaled.m = p.m.scale(7.5);
        let other = solve(&scaled, &SolveOptions::with_modes(4)).unwrap();
        let shifted = solve(
            &p,
            &SolveOptions {
                shift: Some(base.shift * 30.0),
                ..SolveOptions::with_modes(4)
            },
        )
        .unwrap();
        for i in 0..4 {
            assert!((base.eigenvalues[i] - other.eigenvalues[i]).abs() <= 1e-10 * base.eigenvalues[i]);
            assert!((base.eigenvalues[i] - shifted.eigenvalues[i]).abs() <= 1e-8 * base.eigenvalues[i]);
        }
    }

    #[test]
    fn classify_examples() {
        let (z, nz) = classify_near_zero(&[1e-9, 4.0, 9.0, 16.0], 1e-3).unwrap();
        assert_eq!((z, nz), (vec![0], vec![1, 2, 3]));
        let (z, _) = classify_near_zero(&[4.0, 9.0, 16.0], 1e-3).unwrap();
        assert!(z.is_empty());
        assert!(classify_near_zero(&[0.0, 0.0], 1e-3).is_err());
    }
}
