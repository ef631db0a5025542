//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use num_complex::Complex64;

/// Eigen-decomposition of the Hermitian `n × n` matrix `a` (row-major).
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as columns of a row-major `n × n` matrix.
pub fn hermitian_eigen(a: &[Complex64], n: usize) -> (Vec<f64>, Vec<Complex64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i].conj());
            m[i * n + j] = avg;
            m[j * n + i] = avg.conj();
        }
        m[i * n + i] = Complex64::new(m[i * n + i].re, 0.0);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let total: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].norm_sqr())
            .sum();
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r == 0.0 || r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let tau = (m[q * n + q].re - m[p * n + p].re) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]] on (p, q).
                let e = phase.conj();
                let u = [Complex64::new(c, 0.0), Complex64::new(s, 0.0), -e * s, e * c];
                // A ← A U
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = akp * u[0] + akq * u[2];
                    m[k * n + q] = akp * u[1] + akq * u[3];
                }
                // A ← Uᴴ A
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = u[0].conj() * apk + u[2].conj() * aqk;
                    m[q * n + k] = u[1].conj() * apk + u[3].conj() * aqk;
                }
                m[p * n + q] = Complex64::new(0.0, 0.0);
                m[q * n + p] = Complex64::new(0.0, 0.0);
                m[p * n + p] = Complex64::new(m[p * n + p].re, 0.0);
                m[q * n + q] = Complex64::new(m[q * n + q].re, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = vkp * u[0] + vkq * u[2];
                    v[k * n + q] = vkp * u[1] + vkq * u[3];
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].re.total_cmp(&m[i * n + i].re));
    let vals: Vec<f64> = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vecs = vec![Complex64::new(0.0, 0.0); n * n];
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + col] = v[k * n + i];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two() {
        let a = [2.0, -1.0, -1.0, 2.0].map(|x| Complex64::new(x, 0.0));
        let (vals, _) = hermitian_eigen(&a, 2);
        assert!((vals[0] - 3.0).abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_hermitian_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 3, 8, 25] {
            let mut a = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 0..n {
                for j in i..n {
                    let z = if i == j {
                        Complex64::new(rng.random_range(-1.0..1.0), 0.0)
                    } else {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    };
                    a[i * n + j] = z;
                    a[j * n + i] = z.conj();
                }
            }
            let (vals, vecs) = hermitian_eigen(&a, n);
            let dm = nalgebra::DMatrix::from_row_slice(n, n, &a);
            let mut reference: Vec<f64> = dm.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in vals.iter().zip(&reference) {
                assert!((x - y).abs() < 1e-12);
            }
            let vm = nalgebra::DMatrix::from_row_slice(n, n, &vecs);
            let av = &dm * &vm;
            for c in 0..n {
                for r in 0..n {
                    assert!((av[(r, c)] - vm[(r, c)] * vals[c]).norm() < 1e-12);
                }
            }
            assert!((vm.adjoint() * &vm - nalgebra::DMatrix::identity(n, n)).norm() < 1e-12);
        }
    }
}
