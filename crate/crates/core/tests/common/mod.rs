//! Randomized small meshes and media, plus the invariant checks shared by the
//! property tests and the acceptance harness.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use wgmodes::eigen::{classify_near_zero, solve_dense};
use wgmodes::fem::{assemble, Formulation, HermitianPencil, Layout};
use wgmodes::medium::{MediumSpec, TransverseTensor};
use wgmodes::mesh::{generate_annulus, generate_rectangle, generate_rectilinear_region, Mesh, Point2};

#[derive(Debug, Clone)]
pub enum Shape {
    Rectangle {
        a: f64,
        b: f64,
        nx: usize,
        ny: usize,
    },
    Annulus {
        r1: f64,
        r2: f64,
        nr: usize,
        nt: usize,
    },
    /// L-shape of unit grid spacing, optionally with a one-cell hole.
    Ell {
        w: usize,
        hgt: usize,
        hole: bool,
        h: f64,
    },
}

impl Shape {
    pub fn mesh(&self) -> Mesh {
        match *self {
            Shape::Rectangle { a, b, nx, ny } => generate_rectangle(a, b, nx, ny).unwrap(),
            Shape::Annulus { r1, r2, nr, nt } => generate_annulus(r1, r2, nr, nt).unwrap(),
            Shape::Ell { w, hgt, hole, h } => {
                let (w, t) = (w as f64, hgt as f64);
                let p = |x: f64, y: f64| Point2::new(x, y);
                let outer = [p(0.0, 0.0), p(w, 0.0), p(w, 2.0), p(2.0, 2.0), p(2.0, t), p(0.0, t)];
                let holes = if hole {
                    vec![vec![p(0.5, 0.5), p(1.5, 0.5), p(1.5, 1.5), p(0.5, 1.5)]]
                } else {
                    vec![]
                };
                generate_rectilinear_region(&outer, &holes, h).unwrap()
            }
        }
    }
}

pub fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (0.5f64..2.0, 0.5f64..2.0, 1usize..5, 1usize..5).prop_map(|(a, b, nx, ny)| Shape::Rectangle { a, b, nx, ny }),
        (0.0f64..0.7, 1usize..3, 4usize..10).prop_map(|(f, nr, nt)| {
            let r1 = if f < 0.2 { 0.0 } else { f };
            Shape::Annulus { r1, r2: 1.0, nr, nt }
        }),
        (3usize..5, 3usize..5, any::<bool>(), prop_oneof![Just(0.5), Just(1.0)]).prop_map(|(w, hgt, hole, h)| Shape::Ell {
            w,
            hgt,
            hole,
            h
        }),
    ]
}

/// Media satisfying both conditions: `b = −aμ/ε`.
pub fn medium() -> impl Strategy<Value = MediumSpec> {
    (1.0f64..4.0, -0.9f64..0.9, 0.5f64..3.0, 0.5f64..3.0, 0.5f64..3.0).prop_map(|(eps, af, mu, ezz, mzz)| {
        let a = af * eps;
        let b = -a * mu / eps;
        MediumSpec::new(TransverseTensor::new(eps, a), ezz, TransverseTensor::new(mu, b), mzz)
    })
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn pencils(mesh: &Mesh, spec: &MediumSpec) -> Vec<(Formulation, HermitianPencil)> {
    Formulation::ALL
        .into_iter()
        .filter_map(|f| assemble(f, mesh, spec).ok().map(|p| (f, p)))
        .collect()
}

pub fn hermiticity(shape: &Shape, spec: &MediumSpec) -> Result<(), TestCaseError> {
    let mesh = shape.mesh();
    for (f, p) in pencils(&mesh, spec) {
        let (dk, dm) = (p.k.hermitian_defect(), p.m.hermitian_defect());
        ensure(dk <= 1e-12 && dm <= 1e-12, || format!("{}: defects {dk:e} {dm:e}", f.name()))?;
    }
    Ok(())
}

pub fn mass_positive_definite(shape: &Shape, spec: &MediumSpec) -> Result<(), TestCaseError> {
    let mesh = shape.mesh();
    for (f, p) in pencils(&mesh, spec) {
        let m = match p.layout {
            Layout::Plain => p.m.to_dense(),
            Layout::Saddle { .. } => p.blocks.as_ref().unwrap().b.to_dense(),
        };
        let herm: DMatrix<Complex64> = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        ensure(herm.cholesky().is_some(), || {
            format!("{}: mass not positive definite", f.name())
        })?;
    }
    Ok(())
}

pub fn single_te_zero_mode(shape: &Shape, spec: &MediumSpec) -> Result<(), TestCaseError> {
    let mesh = shape.mesh();
    let p = assemble(Formulation::ScalarTE, &mesh, spec).unwrap();
    let ev = solve_dense(&p, None).unwrap();
    let (zero, _) = classify_near_zero(&ev, 1e-3).unwrap();
    ensure(zero.len() == 1, || format!("{} near-zero modes in {ev:?}", zero.len()))
}

pub fn euler_relation(shape: &Shape) -> Result<(), TestCaseError> {
    let m = shape.mesh();
    let (v, e, t) = (m.num_nodes() as i64, m.num_edges() as i64, m.num_triangles() as i64);
    let b = m.boundary_components() as i64;
    ensure(v - e + t == 2 - b, || format!("V−E+T = {} with B = {b}", v - e + t))?;
    ensure(m.euler_characteristic() == v - e + t, || {
        "euler_characteristic disagrees".into()
    })
}

/// Relabels nodes by `perm` and reverses the triangle order.
fn relabel(mesh: &Mesh, perm: &[usize]) -> Mesh {
    let mut nodes = vec![Point2::new(0.0, 0.0); mesh.num_nodes()];
    for (old, &new) in perm.iter().enumerate() {
        nodes[new] = mesh.nodes()[old];
    }
    let tris: Vec<[usize; 3]> = mesh.triangles().iter().rev().map(|t| t.map(|n| perm[n])).collect();
    Mesh::build_topology(nodes, tris).unwrap()
}

pub fn permutation_invariance(shape: &Shape, spec: &MediumSpec, seed: u64) -> Result<(), TestCaseError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mesh = shape.mesh();
    let mut perm: Vec<usize> = (0..mesh.num_nodes()).collect();
    perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let other = relabel(&mesh, &perm);
    for f in [Formulation::ScalarTE, Formulation::ScalarTM] {
        let (Ok(p), Ok(q)) = (assemble(f, &mesh, spec), assemble(f, &other, spec)) else {
            continue;
        };
        let scale = p.k.max_abs().max(p.m.max_abs());
        for (i, &ni) in p.primal.entities().iter().enumerate() {
            for (j, &nj) in p.primal.entities().iter().enumerate() {
                let (qi, qj) = (q.primal.dof(perm[ni]).unwrap(), q.primal.dof(perm[nj]).unwrap());
                let dk = (p.k.get(i, j) - q.k.get(qi, qj)).norm();
                let dm = (p.m.get(i, j) - q.m.get(qi, qj)).norm();
                ensure(dk.max(dm) <= 1e-12 * scale, || {
                    format!("{}: entry ({i},{j}) differs by {:e}", f.name(), dk.max(dm))
                })?;
            }
        }
    }
    // Edge orientations follow node labels, so vector pencils are compared through their spectra.
    for f in [Formulation::VectorTE, Formulation::VectorTM] {
        let (Ok(p), Ok(q)) = (assemble(f, &mesh, spec), assemble(f, &other, spec)) else {
            continue;
        };
        let (a, b) = (solve_dense(&p, None).unwrap(), solve_dense(&q, None).unwrap());
        ensure(a.len() == b.len(), || {
            format!("{}: {} vs {} finite eigenvalues", f.name(), a.len(), b.len())
        })?;
        let top = a.iter().cloned().fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            ensure((x - y).abs() <= 1e-9 * top, || format!("{}: eigenvalue {x} vs {y}", f.name()))?;
        }
    }
    Ok(())
}
