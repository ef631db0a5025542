//! Dense reference solvers built on nalgebra, used for small pencils and as a test oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::EigenError;
use crate::fem::CsrMatrix;

/// Eigenpairs of `K x = λ M x` with `M` positive definite, ascending.
pub fn dense_definite(k: &CsrMatrix, m: &CsrMatrix) -> Result<(Vec<f64>, Vec<DVector<Complex64>>), EigenError> {
    let (kd, md) = (k.to_dense(), m.to_dense());
    let chol = md
        .cholesky()
        .ok_or(EigenError::Factorization("dense mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or(EigenError::Factorization("singular Cholesky factor".into()))?;
    let mut c = &linv * kd * linv.adjoint();
    c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = c.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lh_inv = linv.adjoint();
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = idx.iter().map(|&i| &lh_inv * eig.eigenvectors.column(i)).collect();
    Ok((vals, vecs))
}

/// Finite eigenvalues of the saddle pencil `[[A, C], [Cᴴ, 0]]`, `[[B, 0], [0, 0]]`, ascending.
///
/// Inverts `K − sM` (`s < 0`) densely, restricts to the primal block `W`, and
/// solves the Hermitian problem `Lᴴ W L` with `B = L Lᴴ`. The eigenvalues
/// `μ = 1/(λ − s)` vanish on the infinite part of the spectrum.
pub fn dense_saddle(k: &CsrMatrix, m: &CsrMatrix, primal_dim: usize, shift: f64) -> Result<Vec<f64>, EigenError> {
    let s = -shift.abs();
    let shifted: DMatrix<Complex64> = k.to_dense() - m.to_dense() * Complex64::new(s, 0.0);
    let inv = shifted
        .lu()
        .try_inverse()
        .ok_or(EigenError::Factorization("shifted saddle matrix is singular".into()))?;
    let w = inv.view((0, 0), (primal_dim, primal_dim)).into_owned();
    let b = m.to_dense().view((0, 0), (primal_dim, primal_dim)).into_owned();
    let l = b
        .cholesky()
        .ok_or(EigenError::Factorization("primal mass block is not positive definite".into()))?
        .l();
    let mut h = l.adjoint() * w * &l;
    h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mu = h.symmetric_eigen().eigenvalues;
    let mu_max = mu.iter().copied().fold(0.0, f64::max);
    let mut vals: Vec<f64> = mu.iter().filter(|&&x| x > 1e-10 * mu_max).map(|&x| s + 1.0 / x).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}
