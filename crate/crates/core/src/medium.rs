//! Homogeneous block-anisotropic media.
//!
//! The transverse tensors have the form `[[d, jα], [−jα, d]]`, the only
//! Hermitian 2×2 matrices (up to the identity scale) that commute with the
//! quarter-turn rotation of the cross-section.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vacuum permeability (H/m).
pub const MU0: f64 = 1.25663706212e-6;
/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m), tied to [`MU0`] and [`C0`].
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

/// Relative tolerance for the `bε + aμ = 0` condition.
pub const TOL_II: f64 = 1e-12;
/// Relative tolerance for the commutation test against the quarter-turn rotation.
pub const TOL_COMM: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediumError {
    #[error("tensor is singular (det = {0:e})")]
    Singular(f64),
    #[error("matrix is not of the form [[d, jα], [−jα, d]]: {0}")]
    NotGroupForm(String),
    #[error("the coupling condition bε + aμ = 0 is violated (relative residual {0:e})")]
    ConditionII(f64),
    #[error("εμ + ab = {0} is not positive")]
    NonPositiveProduct(f64),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type C2 = Matrix2<Complex64>;

/// `[[d, jα], [−jα, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseTensor {
    pub d: f64,
    pub alpha: f64,
}

impl TransverseTensor {
    pub const fn new(d: f64, alpha: f64) -> Self {
        Self { d, alpha }
    }

    pub const fn isotropic(d: f64) -> Self {
        Self { d, alpha: 0.0 }
    }

    pub fn matrix(&self) -> C2 {
        C2::new(
            Complex64::new(self.d, 0.0),
            Complex64::new(0.0, self.alpha),
            Complex64::new(0.0, -self.alpha),
            Complex64::new(self.d, 0.0),
        )
    }

    /// Accepts a raw matrix only if it is Hermitian and commutes with the rotation.
    pub fn from_matrix(m: &C2) -> Result<Self, MediumError> {
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let tol = TOL_COMM * scale;
        if !commutes_with_rotation(m) {
            return Err(MediumError::NotGroupForm("does not commute with the rotation".into()));
        }
        if (m - m.adjoint()).iter().any(|z| z.norm() > tol) {
            return Err(MediumError::NotGroupForm("not Hermitian".into()));
        }
        if m[(0, 1)].re.abs() > tol {
            return Err(MediumError::NotGroupForm("off-diagonal entry has a real part".into()));
        }
        Ok(Self::new(m[(0, 0)].re, m[(0, 1)].im))
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        [self.d - self.alpha.abs(), self.d + self.alpha.abs()]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.d.is_finite() && self.alpha.is_finite() && self.d > self.alpha.abs()
    }

    pub fn det(&self) -> f64 {
        self.d * self.d - self.alpha * self.alpha
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.d * s, self.alpha * s)
    }

    /// Exact inverse, again of the same form.
    pub fn inverse(&self) -> Result<Self, MediumError> {
        let det = self.det();
        if !(det.abs() > 1e-300 && det.abs() > 1e-14 * self.d * self.d) {
            return Err(MediumError::Singular(det));
        }
        Ok(Self::new(self.d / det, -self.alpha / det))
    }

    /// `D·v` for a complex 2-vector.
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let j = Complex64::i();
        [v[0] * self.d + j * self.alpha * v[1], -j * self.alpha * v[0] + v[1] * self.d]
    }

    /// `D·g` for a real 2-vector.
    pub fn apply_real(&self, g: [f64; 2]) -> [Complex64; 2] {
        [
            Complex64::new(self.d * g[0], self.alpha * g[1]),
            Complex64::new(self.d * g[1], -self.alpha * g[0]),
        ]
    }

    /// `uᵀ D v` for real vectors (no conjugation).
    pub fn bilinear(&self, u: [f64; 2], v: [f64; 2]) -> Complex64 {
        Complex64::new(self.d * (u[0] * v[0] + u[1] * v[1]), self.alpha * (u[0] * v[1] - u[1] * v[0]))
    }
}

/// Free-function form of [`TransverseTensor::inverse`].
pub fn inverse_transverse(t: &TransverseTensor) -> Result<TransverseTensor, MediumError> {
    t.inverse()
}

/// True iff `A·X = X·A` for the quarter-turn `A = [[0, −1], [1, 0]]`.
pub fn commutes_with_rotation(m: &C2) -> bool {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let a = C2::new(zero, -one, one, zero);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = (a * m - m * a).iter().map(|z| z.norm()).fold(0.0, f64::max);
    diff.is_finite() && diff <= TOL_COMM * scale
}

/// Relative material description (multiples of the vacuum constants).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MediumJson", into = "MediumJson")]
pub struct MediumSpec {
    pub eps_t: TransverseTensor,
    pub eps_zz: f64,
    pub mu_t: TransverseTensor,
    pub mu_zz: f64,
    pub eps0: f64,
    pub mu0: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialBlock {
    pub d: f64,
    pub alpha: f64,
    pub zz: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumJson {
    eps: MaterialBlock,
    mu: MaterialBlock,
}

impl TryFrom<MediumJson> for MediumSpec {
    type Error = MediumError;
    fn try_from(j: MediumJson) -> Result<Self, MediumError> {
        let all = [j.eps.d, j.eps.alpha, j.eps.zz, j.mu.d, j.mu.alpha, j.mu.zz];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(MediumError::Invalid("medium parameters must be finite".into()));
        }
        Ok(MediumSpec::new(
            TransverseTensor::new(j.eps.d, j.eps.alpha),
            j.eps.zz,
            TransverseTensor::new(j.mu.d, j.mu.alpha),
            j.mu.zz,
        ))
    }
}

impl From<MediumSpec> for MediumJson {
    fn from(m: MediumSpec) -> Self {
        MediumJson {
            eps: MaterialBlock {
                d: m.eps_t.d,
                alpha: m.eps_t.alpha,
                zz: m.eps_zz,
            },
            mu: MaterialBlock {
                d: m.mu_t.d,
                alpha: m.mu_t.alpha,
                zz: m.mu_zz,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    IndependentModes,
    NotGuaranteed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionI {
    pub ok: bool,
    pub eps_t_positive_definite: bool,
    pub mu_t_positive_definite: bool,
    pub eps_zz_positive: bool,
    pub mu_zz_positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub condition_i: ConditionI,
    /// `|bε + aμ| / max(|bε|, |aμ|)`, zero when both terms vanish.
    pub condition_ii_residual: f64,
    pub condition_ii_ok: bool,
    /// `εμ + ab`.
    pub product: f64,
    pub verdict: Verdict,
}

impl MediumSpec {
    pub fn new(eps_t: TransverseTensor, eps_zz: f64, mu_t: TransverseTensor, mu_zz: f64) -> Self {
        Self {
            eps_t,
            eps_zz,
            mu_t,
            mu_zz,
            eps0: EPS0,
            mu0: MU0,
        }
    }

    /// ε = μ = ε_zz = μ_zz = 1, no gyrotropy.
    pub fn vacuum() -> Self {
        Self::new(TransverseTensor::isotropic(1.0), 1.0, TransverseTensor::isotropic(1.0), 1.0)
    }

    /// ε=2, a=−1, ε_zz=1; μ=1, b=0.5, μ_zz=2.
    pub fn reference() -> Self {
        Self::new(TransverseTensor::new(2.0, -1.0), 1.0, TransverseTensor::new(1.0, 0.5), 2.0)
    }

    pub fn condition_ii_residual(&self) -> f64 {
        let be = self.mu_t.alpha * self.eps_t.d;
        let am = self.eps_t.alpha * self.mu_t.d;
        let scale = be.abs().max(am.abs());
        if scale == 0.0 {
            0.0
        } else {
            (be + am).abs() / scale.max(f64::MIN_POSITIVE)
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let c1 = ConditionI {
            eps_t_positive_definite: self.eps_t.is_positive_definite(),
            mu_t_positive_definite: self.mu_t.is_positive_definite(),
            eps_zz_positive: self.eps_zz.is_finite() && self.eps_zz > 0.0,
            mu_zz_positive: self.mu_zz.is_finite() && self.mu_zz > 0.0,
            ok: false,
        };
        let condition_i = ConditionI {
            ok: c1.eps_t_positive_definite && c1.mu_t_positive_definite && c1.eps_zz_positive && c1.mu_zz_positive,
            ..c1
        };
        let residual = self.condition_ii_residual();
        let condition_ii_ok = residual.is_finite() && residual <= TOL_II;
        let verdict = if condition_i.ok && condition_ii_ok {
            Verdict::IndependentModes
        } else {
            Verdict::NotGuaranteed
        };
        ValidationReport {
            condition_i,
            condition_ii_residual: residual,
            condition_ii_ok,
            product: self.eps_t.d * self.mu_t.d + self.eps_t.alpha * self.mu_t.alpha,
            verdict,
        }
    }

    pub fn require_valid(&self) -> Result<(), MediumError> {
        let r = self.validate();
        if !r.condition_i.ok {
            return Err(MediumError::Invalid(format!("condition I fails: {:?}", r.condition_i)));
        }
        if !r.condition_ii_ok {
            return Err(MediumError::ConditionII(r.condition_ii_residual));
        }
        Ok(())
    }

    /// `εμ + ab`, after checking `ε̄_t μ̄_t = (εμ + ab) I` entrywise.
    pub fn product_scalar(&self) -> Result<f64, MediumError> {
        let res = self.condition_ii_residual();
        if !(res <= TOL_II) {
            return Err(MediumError::ConditionII(res));
        }
        let p = self.eps_t.d * self.mu_t.d + self.eps_t.alpha * self.mu_t.alpha;
        let prod = self.eps_t.matrix() * self.mu_t.matrix();
        let target = C2::identity() * Complex64::new(p, 0.0);
        let scale = (self.eps_t.d.abs() + self.eps_t.alpha.abs()) * (self.mu_t.d.abs() + self.mu_t.alpha.abs());
        let err = (prod - target).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if err > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(MediumError::ConditionII(err / scale));
        }
        Ok(p)
    }

    /// `ω √(ε₀μ₀(εμ + ab))`.
    pub fn bulk_wavenumber(&self, omega: f64) -> Result<f64, MediumError> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(MediumError::Invalid(format!("omega must be positive, got {omega}")));
        }
        let p = self.product_scalar()?;
        if p <= 0.0 {
            return Err(MediumError::NonPositiveProduct(p));
        }
        Ok(omega * (self.eps0 * self.mu0 * p).sqrt())
    }

    /// Phase constant of a TEM mode, equal to the bulk wavenumber.
    pub fn tem_phase_constant(&self, omega: f64) -> Result<f64, MediumError> {
        self.bulk_wavenumber(omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn commutation_examples() {
        assert!(commutes_with_rotation(&C2::identity()));
        assert!(commutes_with_rotation(&C2::new(
            c(2.0, 0.0),
            c(0.0, -1.0),
            c(0.0, 1.0),
            c(2.0, 0.0)
        )));
        assert!(!commutes_with_rotation(&C2::new(
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(2.0, 0.0)
        )));
    }

    #[test]
    fn commutation_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..1000 {
            let mut z = [c(0.0, 0.0); 4];
            for v in z.iter_mut() {
                *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            // A third of the samples are forced into the commuting form.
            if k % 3 == 0 {
                z[3] = z[0];
                z[2] = -z[1];
            }
            let m = C2::new(z[0], z[1], z[2], z[3]);
            let closed = (z[0] - z[3]).norm() <= 1e-12 && (z[1] + z[2]).norm() <= 1e-12;
            assert_eq!(commutes_with_rotation(&m), closed);
        }
    }

    #[test]
    fn tensor_eigenvalues_match_generic_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let t = TransverseTensor::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            // A Hermitian 2×2 [[p, q], [q̄, p]] has eigenvalues p ± |q|.
            let m = t.matrix();
            let tr = (m[(0, 0)] + m[(1, 1)]).re;
            let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let generic = [tr / 2.0 - disc, tr / 2.0 + disc];
            let ours = t.eigenvalues();
            for k in 0..2 {
                assert!((generic[k] - ours[k]).abs() <= 1e-12 * (1.0 + ours[k].abs()));
            }
        }
    }

    #[test]
    fn from_matrix_round_trip_and_rejects() {
        let t = TransverseTensor::new(2.0, -1.0);
        assert_eq!(TransverseTensor::from_matrix(&t.matrix()).unwrap(), t);
        let bad = C2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0));
        assert!(TransverseTensor::from_matrix(&bad).is_err());
        let non_herm = C2::new(c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0));
        assert!(TransverseTensor::from_matrix(&non_herm).is_err());
    }

    #[test]
    fn validate_examples() {
        let r = MediumSpec::reference().validate();
        assert_eq!(r.verdict, Verdict::IndependentModes);
        assert_eq!(r.condition_ii_residual, 0.0);
        assert_eq!(MediumSpec::vacuum().validate().verdict, Verdict::IndependentModes);
        let mut m = MediumSpec::reference();
        m.mu_t.alpha = 1.0;
        let r = m.validate();
        assert_eq!(r.verdict, Verdict::NotGuaranteed);
        assert!(r.condition_ii_residual > 0.1);
        let mut m = MediumSpec::reference();
        m.eps_t.alpha = -2.5;
        m.mu_t.alpha = 1.25;
        assert!(!m.validate().condition_i.ok);
    }

    #[test]
    fn condition_ii_scale_covariance() {
        for (s, t) in [(2.0, 3.0), (0.1, 7.0), (1e3, 1e-3)] {
            let mut m = MediumSpec::reference();
            m.eps_t = m.eps_t.scaled(s);
            m.mu_t = m.mu_t.scaled(t);
            assert_eq!(m.condition_ii_residual(), 0.0);
            assert_eq!(m.validate().verdict, Verdict::IndependentModes);
        }
        // A nonzero residual keeps its relative size under scaling.
        let mut m = MediumSpec::reference();
        m.mu_t.alpha = 0.6;
        let r0 = m.condition_ii_residual();
        m.eps_t = m.eps_t.scaled(5.0);
        m.mu_t = m.mu_t.scaled(0.2);
        assert!((m.condition_ii_residual() - r0).abs() < 1e-14);
    }

    #[test]
    fn product_scalar_examples() {
        assert_eq!(MediumSpec::reference().product_scalar().unwrap(), 1.5);
        assert_eq!(MediumSpec::vacuum().product_scalar().unwrap(), 1.0);
        let m = MediumSpec::new(TransverseTensor::new(3.0, 1.0), 1.0, TransverseTensor::new(3.0, -1.0), 1.0);
        assert_eq!(m.product_scalar().unwrap(), 8.0);
        let mut bad = MediumSpec::reference();
        bad.mu_t.alpha = 1.0;
        assert!(bad.product_scalar().is_err());
    }

    #[test]
    fn condition_ii_matrix_identities() {
        let m = MediumSpec::reference();
        let (e, u) = (m.eps_t.matrix(), m.mu_t.matrix());
        let p = m.product_scalar().unwrap();
        let comm = (e * u - u * e).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let prod = (e * u - C2::identity() * c(p, 0.0))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(comm <= 1e-14 * p);
        assert!(prod <= 1e-14 * p);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            TransverseTensor::isotropic(1.0).inverse().unwrap(),
            TransverseTensor::isotropic(1.0)
        );
        let m = MediumSpec::reference();
        let inv = m.mu_t.inverse().unwrap();
        assert!((inv.d - 2.0 / 1.5).abs() < 1e-15);
        assert!((inv.alpha + 1.0 / 1.5).abs() < 1e-15);
        let via = m.eps_t.scaled(1.0 / 1.5);
        assert!((inv.d - via.d).abs() < 1e-15 && (inv.alpha - via.alpha).abs() < 1e-15);
        let e_inv = m.eps_t.inverse().unwrap();
        let via = m.mu_t.scaled(1.0 / 1.5);
        assert!((e_inv.d - via.d).abs() < 1e-15 && (e_inv.alpha - via.alpha).abs() < 1e-15);
        let t = TransverseTensor::new(1.7, 0.3);
        let back = t.inverse().unwrap().inverse().unwrap();
        assert!((back.d - t.d).abs() <= 1e-14 * t.d && (back.alpha - t.alpha).abs() <= 1e-14 * t.d);
        assert!(TransverseTensor::new(1.0, 1.0).inverse().is_err());
        let prod = t.matrix() * t.inverse().unwrap().matrix();
        assert!((prod - C2::identity()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn bulk_wavenumber_examples() {
        let k = MediumSpec::vacuum().bulk_wavenumber(C0).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
        let k = MediumSpec::reference()
            .bulk_wavenumber(2.0 * std::f64::consts::PI * 1e9)
            .unwrap();
        let expect = 2.0 * std::f64::consts::PI * 1e9 / C0 * 1.5f64.sqrt();
        assert!((k - expect).abs() < 1e-12 * expect);
        assert!((k - 25.67).abs() < 0.01);
        let k2 = MediumSpec::reference()
            .bulk_wavenumber(4.0 * std::f64::consts::PI * 1e9)
            .unwrap();
        assert!((k2 - 2.0 * k).abs() < 1e-12 * k);
        assert_eq!(
            MediumSpec::reference().tem_phase_constant(1e9).unwrap(),
            MediumSpec::reference().bulk_wavenumber(1e9).unwrap()
        );
    }

    #[test]
    fn json_shape() {
        let m: MediumSpec =
            serde_json::from_str(r#"{"eps": {"d": 2, "alpha": -1, "zz": 1}, "mu": {"d": 1, "alpha": 0.5, "zz": 2}}"#).unwrap();
        assert_eq!(m, MediumSpec::reference());
        let back: MediumSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MediumSpec>(
            r#"{"eps": {"d": 2, "alpha": -1, "zz": 1, "x": 0}, "mu": {"d": 1, "alpha": 0.5, "zz": 2}}"#
        )
        .is_err());
    }
}
