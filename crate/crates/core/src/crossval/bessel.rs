//! Integer-order Bessel functions of the first and second kind, and root search.
//!
//! `J₀, J₁, Y₀, Y₁` use the ascending series below `SWITCH` and the Hankel
//! asymptotic expansion above it. Higher orders recur upward (`Y_n` always,
//! `J_n` when `n < x`) or use the ascending series directly.

use std::f64::consts::{FRAC_2_PI, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SWITCH: f64 = 12.0;

/// Ascending series `Σ (−x²/4)^k / (k! (n+k)!) · (x/2)^n`.
fn j_series(n: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= 0.5 * x / k as f64;
    }
    let mut sum = term;
    for k in 1..300 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Hankel expansion: returns `(P, Q)` with `μ = 4n²`.
fn hankel_pq(n: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n as f64).powi(2);
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // Terms alternate P, Q, P, ... with signs (+, −, −, +) per pair.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn asymptotic(n: u32, x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(n, x);
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    let a = (FRAC_2_PI / x).sqrt();
    let (s, c) = chi.sin_cos();
    (a * (p * c - q * s), a * (p * s + q * c))
}

fn harmonic(m: u32) -> f64 {
    (1..=m).map(|j| 1.0 / j as f64).sum()
}

fn y0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..300u32 {
        term *= q / (k as f64 * k as f64);
        let t = if k % 2 == 1 { term } else { -term } * harmonic(k);
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j_series(0, x) + sum)
}

fn y1_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term * (harmonic(0) + harmonic(1) - 2.0 * EULER_GAMMA);
    for k in 1..300u32 {
        term *= q / (k as f64 * (k + 1) as f64);
        let t = term * (harmonic(k) + harmonic(k + 1) - 2.0 * EULER_GAMMA);
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    FRAC_2_PI * (0.5 * x).ln() * j_series(1, x) - FRAC_2_PI / x - sum / PI
}

/// `J_n(x)` for `x ≥ 0`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j needs x >= 0");
    if x <= SWITCH || n as f64 >= x {
        return j_series(n, x);
    }
    let (mut a, mut b) = (asymptotic(0, x).0, asymptotic(1, x).0);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * k as f64 / x * b - a;
        a = b;
        b = c;
    }
    b
}

/// `Y_n(x)` for `x > 0`.
pub fn bessel_y(n: u32, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_y needs x > 0");
    let (mut a, mut b) = if x <= SWITCH {
        (y0_series(x), y1_series(x))
    } else {
        (asymptotic(0, x).1, asymptotic(1, x).1)
    };
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * k as f64 / x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Bisection on a sign change in `[lo, hi]` to `rtol` relative width.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rtol: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rtol * mid.abs() {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// The first `count` sign changes of `f` on `(start, ∞)`, scanned with `step`.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, start: f64, step: f64, count: usize, limit: f64) -> Vec<f64> {
    let mut roots = Vec::with_capacity(count);
    let mut a = start;
    let mut fa = f(a);
    while roots.len() < count && a < limit {
        let b = a + step;
        let fb = f(b);
        if fa.signum() != fb.signum() || fb == 0.0 {
            if let Some(r) = bisect(&f, a, b, 1e-13) {
                roots.push(r);
            }
        }
        a = b;
        fa = fb;
    }
    roots
}

/// `n`-th positive zero of `J_m`.
pub fn bessel_j_zero(m: u32, n: usize) -> Option<f64> {
    let roots = scan_roots(|x| bessel_j(m, x), 1e-3 + 0.5 * m as f64, 0.05, n, 1e3);
    roots.get(n - 1).copied()
}
