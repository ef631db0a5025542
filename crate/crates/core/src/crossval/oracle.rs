//! Closed-form TM cut-offs for separable cross-sections.
//!
//! With a constant transverse tensor the gyrotropic part drops out of the
//! Dirichlet problem, so the TM spectrum is that of `−(ε/ε_zz)Δ`.

use std::f64::consts::PI;

use super::bessel::{bessel_j, bessel_j_zero, bessel_y, scan_roots};
use super::CrossvalError;
use crate::medium::MediumSpec;

/// Reference zeros `(m, n, j_{m,n})` of `J_m`.
pub const BESSEL_J_ZEROS: [(u32, usize, f64); 4] = [
    (0, 1, 2.404825557695773),
    (1, 1, 3.831705970207512),
    (2, 1, 5.135622301840683),
    (0, 2, 5.520078110286311),
];

fn speed_ratio(spec: &MediumSpec) -> Result<f64, CrossvalError> {
    let r = spec.eps_t.d / spec.eps_zz;
    if !(r > 0.0 && r.is_finite()) {
        return Err(CrossvalError::InvalidInput(format!("ε/ε_zz = {r} is not positive")));
    }
    Ok(r.sqrt())
}

fn check_length(name: &str, v: f64) -> Result<(), CrossvalError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CrossvalError::InvalidInput(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// `√(ε/ε_zz) π √((m/a)² + (n/b)²)`, `m, n ≥ 1`, the first `count` ascending.
pub fn oracle_tm_rectangle(a: f64, b: f64, spec: &MediumSpec, count: usize) -> Result<Vec<f64>, CrossvalError> {
    check_length("a", a)?;
    check_length("b", b)?;
    let s = speed_ratio(spec)?;
    let n = count.max(1);
    let mut v: Vec<f64> = (1..=n)
        .flat_map(|m| (1..=n).map(move |k| ((m as f64 / a).powi(2) + (k as f64 / b).powi(2)).sqrt()))
        .map(|x| s * PI * x)
        .collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    Ok(v)
}

/// Merges per-order root lists, doubling orders `m ≥ 1`, keeping the first `count`.
fn merge(per_order: Vec<(u32, Vec<f64>)>, count: usize) -> Vec<f64> {
    let mut all: Vec<f64> = Vec::new();
    for (m, roots) in per_order {
        for r in roots {
            all.push(r);
            if m > 0 {
                all.push(r);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all.truncate(count);
    all
}

/// `√(ε/ε_zz) j_{m,n}/R`, with `m ≥ 1` zeros counted twice.
///
/// Zeros are found by bisection on the series/asymptotic `J_m`; the tabulated
/// values are checked against that search.
pub fn oracle_tm_disc(r: f64, spec: &MediumSpec, count: usize) -> Result<Vec<f64>, CrossvalError> {
    check_length("R", r)?;
    let s = speed_ratio(spec)?;
    for (m, n, tab) in BESSEL_J_ZEROS {
        let found = bessel_j_zero(m, n).ok_or(CrossvalError::Bracketing { order: m, index: n })?;
        if (found - tab).abs() > 1e-10 * tab {
            return Err(CrossvalError::TableMismatch {
                order: m,
                index: n,
                table: tab,
                computed: found,
            });
        }
    }
    let need = count.max(1);
    let mut per_order = Vec::new();
    for m in 0..need as u32 {
        let roots: Vec<f64> = (1..=need)
            .map(|n| bessel_j_zero(m, n).ok_or(CrossvalError::Bracketing { order: m, index: n }))
            .collect::<Result<_, _>>()?;
        per_order.push((m, roots));
    }
    Ok(merge(per_order, count).into_iter().map(|j| s * j / r).collect())
}

/// `J_m(k r₁) Y_m(k r₂) − J_m(k r₂) Y_m(k r₁)`.
pub fn cross_product(m: u32, k: f64, r1: f64, r2: f64) -> f64 {
    bessel_j(m, k * r1) * bessel_y(m, k * r2) - bessel_j(m, k * r2) * bessel_y(m, k * r1)
}

/// Roots `k` of the Bessel cross product, per order, by bracketed bisection.
pub fn annulus_zeros(m: u32, r1: f64, r2: f64, count: usize) -> Result<Vec<f64>, CrossvalError> {
    let spacing = PI / (r2 - r1);
    let f = |k: f64| cross_product(m, k, r1, r2);
    let roots = scan_roots(
        f,
        1e-3 * spacing,
        spacing / 40.0,
        count,
        spacing * (count + m as usize + 4) as f64 * 4.0,
    );
    if roots.len() < count {
        return Err(CrossvalError::Bracketing {
            order: m,
            index: roots.len() + 1,
        });
    }
    Ok(roots)
}

/// `√(ε/ε_zz) χ` over cross-product zeros `χ`, with `m ≥ 1` counted twice.
pub fn oracle_tm_annulus(r1: f64, r2: f64, spec: &MediumSpec, count: usize) -> Result<Vec<f64>, CrossvalError> {
    check_length("r1", r1)?;
    check_length("r2", r2)?;
    if r1 >= r2 {
        return Err(CrossvalError::InvalidInput(format!("need r1 < r2, got {r1} >= {r2}")));
    }
    let s = speed_ratio(spec)?;
    let need = count.max(1);
    let mut per_order = Vec::new();
    for m in 0..need as u32 {
        per_order.push((m, annulus_zeros(m, r1, r2, need)?));
    }
    Ok(merge(per_order, count).into_iter().map(|k| s * k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn rectangle_examples() {
        let spec = MediumSpec::reference();
        let v = oracle_tm_rectangle(1.2e-3, 1.0e-3, &spec, 4).unwrap();
        for (x, y) in v.iter().zip([5783.3, 8635.3, 9626.4, 11566.6]) {
            assert!(rel(*x, y) < 1e-4, "{x} vs {y}");
        }
        let iso = oracle_tm_rectangle(1.0, 1.0, &MediumSpec::vacuum(), 1).unwrap();
        assert!(rel(iso[0], PI * 2f64.sqrt()) < 1e-15);
        let (a, b) = (0.7, 1.9);
        let k11 = oracle_tm_rectangle(a, b, &MediumSpec::vacuum(), 1).unwrap()[0];
        let k22 = PI * ((2.0 / a).powi(2) + (2.0 / b).powi(2)).sqrt();
        assert!(rel(k22, 2.0 * k11) < 1e-15);
    }

    #[test]
    fn disc_examples() {
        let spec = MediumSpec::reference();
        let v = oracle_tm_disc(2e-3, &spec, 4).unwrap();
        for (x, y) in v.iter().zip([1700.5, 2709.4, 2709.4, 3631.4]) {
            assert!(rel(*x, y) < 1e-4, "{x} vs {y}");
        }
        assert_eq!(v[1], v[2]);
        let w = oracle_tm_disc(4e-3, &spec, 4).unwrap();
        for (x, y) in v.iter().zip(&w) {
            assert!(rel(*y, 0.5 * x) < 1e-14);
        }
    }

    #[test]
    fn annulus_examples() {
        let spec = MediumSpec::reference();
        let v = oracle_tm_annulus(1e-3, 2e-3, &spec, 5).unwrap();
        // scipy.special cross-product zeros in units of 1/mm.
        let reference = [
            3.1230309195956925,
            3.1965783808106347,
            3.1965783808106347,
            3.4069214265675254,
            3.4069214265675254,
        ];
        for (x, y) in v.iter().zip(reference) {
            assert!(rel(*x, 2f64.sqrt() * y * 1e3) < 1e-11, "{x}");
        }
        assert!(rel(v[0], 4.42e3) < 5e-3);
    }

    #[test]
    fn thin_annulus_limit() {
        let (r1, r2) = (1.0, 1.1);
        let z = annulus_zeros(0, r1, r2, 1).unwrap()[0];
        assert!(rel(z, PI / (r2 - r1)) < 0.02);
    }

    #[test]
    fn rejects_bad_input() {
        let spec = MediumSpec::reference();
        assert!(oracle_tm_annulus(2.0, 1.0, &spec, 2).is_err());
        assert!(oracle_tm_disc(-1.0, &spec, 2).is_err());
        assert!(oracle_tm_rectangle(1.0, 0.0, &spec, 2).is_err());
    }
}
