//! Cross-validation of the formulations: scalar vs vector spectrum agreement,
//! monotone convergence under refinement, and analytic TM oracles.

pub mod bessel;
pub mod oracle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::SolveOptions;
use crate::fem::Formulation;
use crate::medium::MediumSpec;
use crate::mesh::Mesh;
use crate::modes::{solve_modes, ModeSolution, ModesError};

pub use oracle::{oracle_tm_annulus, oracle_tm_disc, oracle_tm_rectangle};

/// Relative slack for non-strict monotonicity.
pub const TREND_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossvalError {
    #[error("{a} and {b} are not complementary formulations")]
    FormulationMismatch { a: &'static str, b: &'static str },
    #[error("solutions were computed on different meshes or media")]
    InputMismatch,
    #[error("{formulation} holds {available} nonzero modes, {requested} requested")]
    NotEnoughModes {
        formulation: &'static str,
        requested: usize,
        available: usize,
    },
    #[error("mesh {0} of the family is not a uniform refinement of its predecessor")]
    NotNested(usize),
    #[error("a convergence study needs at least 3 meshes, got {0}")]
    TooFewMeshes(usize),
    #[error("no sign change found for root {index} of order {order}")]
    Bracketing { order: u32, index: usize },
    #[error("tabulated zero j({order},{index}) = {table} disagrees with the computed {computed}")]
    TableMismatch {
        order: u32,
        index: usize,
        table: f64,
        computed: f64,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Modes(#[from] ModesError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePair {
    pub index: usize,
    pub k_a: f64,
    pub k_b: f64,
    pub rel_diff: f64,
    pub pass: bool,
    /// Index of the degenerate cluster (in `a`) this mode belongs to.
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub formulation_a: Formulation,
    pub formulation_b: Formulation,
    pub rtol: f64,
    pub pairs: Vec<ModePair>,
    pub pass: bool,
}

/// Groups ascending values whose neighbours lie within `rtol`.
fn clusters(v: &[f64], rtol: f64) -> Vec<usize> {
    let mut id = Vec::with_capacity(v.len());
    let mut c = 0;
    for i in 0..v.len() {
        if i > 0 && (v[i] - v[i - 1]).abs() > rtol * v[i].abs() {
            c += 1;
        }
        id.push(c);
    }
    id
}

/// Pairs the first `count` nonzero cut-offs of two complementary solutions.
///
/// Near-zero modes are excluded before pairing. Within a degenerate cluster the
/// cut-offs are compared as sorted multisets, which the ascending order already gives.
pub fn compare_spectra(a: &ModeSolution, b: &ModeSolution, count: usize, rtol: f64) -> Result<ComparisonReport, CrossvalError> {
    if a.formulation.partner() != b.formulation {
        return Err(CrossvalError::FormulationMismatch {
            a: a.formulation.name(),
            b: b.formulation.name(),
        });
    }
    if a.mesh_size != b.mesh_size || a.spec != b.spec {
        return Err(CrossvalError::InputMismatch);
    }
    let (ka, kb) = (a.nonzero_cutoffs(), b.nonzero_cutoffs());
    for (s, k) in [(a, &ka), (b, &kb)] {
        if k.len() < count {
            return Err(CrossvalError::NotEnoughModes {
                formulation: s.formulation.name(),
                requested: count,
                available: k.len(),
            });
        }
    }
    let ids = clusters(&ka[..count], rtol);
    let pairs: Vec<ModePair> = (0..count)
        .map(|i| {
            let rel_diff = (ka[i] - kb[i]).abs() / ka[i].abs();
            ModePair {
                index: i,
                k_a: ka[i],
                k_b: kb[i],
                rel_diff,
                pass: rel_diff <= rtol,
                cluster: ids[i],
            }
        })
        .collect();
    Ok(ComparisonReport {
        formulation_a: a.formulation,
        formulation_b: b.formulation,
        rtol,
        pass: pairs.iter().all(|p| p.pass),
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Decreasing,
    Increasing,
    Swing,
}

/// Non-strict trend of a sequence at relative slack `eps`; constant counts as decreasing.
pub fn classify_trend(seq: &[f64], eps: f64) -> Trend {
    let down = seq.windows(2).all(|w| w[1] <= w[0] + eps * w[0].abs());
    if down {
        return Trend::Decreasing;
    }
    let up = seq.windows(2).all(|w| w[1] >= w[0] - eps * w[0].abs());
    if up {
        Trend::Increasing
    } else {
        Trend::Swing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub formulation: Formulation,
    pub h: Vec<f64>,
    /// `sequences[mode][level]`.
    pub sequences: Vec<Vec<f64>>,
    pub trends: Vec<Trend>,
    /// Scalar formulations must decrease in every mode; vector ones are unconstrained.
    pub pass: bool,
}

/// Trend report from precomputed solutions on a nested family.
pub fn trend_from_solutions(solutions: &[ModeSolution], count: usize) -> Result<ConvergenceReport, CrossvalError> {
    if solutions.len() < 3 {
        return Err(CrossvalError::TooFewMeshes(solutions.len()));
    }
    let formulation = solutions[0].formulation;
    let mut sequences = vec![Vec::with_capacity(solutions.len()); count];
    for s in solutions {
        if s.formulation != formulation {
            return Err(CrossvalError::FormulationMismatch {
                a: formulation.name(),
                b: s.formulation.name(),
            });
        }
        let k = s.nonzero_cutoffs();
        if k.len() < count {
            return Err(CrossvalError::NotEnoughModes {
                formulation: formulation.name(),
                requested: count,
                available: k.len(),
            });
        }
        for (seq, v) in sequences.iter_mut().zip(k) {
            seq.push(v);
        }
    }
    let trends: Vec<Trend> = sequences.iter().map(|s| classify_trend(s, TREND_EPS)).collect();
    let pass = formulation.is_vector() || trends.iter().all(|t| *t == Trend::Decreasing);
    Ok(ConvergenceReport {
        formulation,
        h: solutions.iter().map(|s| s.mesh_h).collect(),
        sequences,
        trends,
        pass,
    })
}

/// Solves `formulation` on every member of a nested family and classifies each mode's trend.
pub fn convergence_trend(
    formulation: Formulation,
    family: &[Mesh],
    spec: &MediumSpec,
    count: usize,
    opts: &SolveOptions,
) -> Result<ConvergenceReport, CrossvalError> {
    if family.len() < 3 {
        return Err(CrossvalError::TooFewMeshes(family.len()));
    }
    for i in 1..family.len() {
        if !family[i - 1].is_refined_by(&family[i]) {
            return Err(CrossvalError::NotNested(i));
        }
    }
    let solutions = family
        .iter()
        .map(|m| solve_modes(formulation, m, spec, count, opts))
        .collect::<Result<Vec<_>, _>>()?;
    trend_from_solutions(&solutions, count)
}

/// `mesh` followed by `levels` uniform refinements.
pub fn refinement_family(mesh: &Mesh, levels: usize) -> Vec<Mesh> {
    let mut out = vec![mesh.clone()];
    for _ in 0..levels {
        let next = out.last().unwrap().refine_uniform();
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_rectangle;

    fn rect() -> Mesh {
        generate_rectangle(1.2e-3, 1.0e-3, 8, 8).unwrap()
    }

    #[test]
    fn identical_and_shifted() {
        let m = rect().refine_uniform();
        let spec = MediumSpec::reference();
        let opts = SolveOptions::default();
        let s = solve_modes(Formulation::ScalarTM, &m, &spec, 4, &opts).unwrap();
        let v = solve_modes(Formulation::VectorTM, &m, &spec, 5, &opts).unwrap();
        let ok = compare_spectra(&s, &v, 4, 0.03).unwrap();
        assert!(ok.pass, "{ok:?}");
        let mut t = v.clone();
        t.cutoffs.remove(0);
        t.is_tem.remove(0);
        assert!(!compare_spectra(&s, &t, 4, 0.03).unwrap().pass);
        let mut same = s.clone();
        same.formulation = Formulation::VectorTM;
        let r = compare_spectra(&s, &same, 4, 1e-12).unwrap();
        assert!(r.pairs.iter().all(|p| p.rel_diff == 0.0));
        assert!(matches!(
            compare_spectra(&s, &s, 1, 1.0),
            Err(CrossvalError::FormulationMismatch { .. })
        ));
    }

    #[test]
    fn trend_classification() {
        assert_eq!(classify_trend(&[3.0, 3.0, 3.0], TREND_EPS), Trend::Decreasing);
        assert_eq!(classify_trend(&[3.0, 2.0, 1.0], TREND_EPS), Trend::Decreasing);
        assert_eq!(classify_trend(&[1.0, 2.0, 2.0], TREND_EPS), Trend::Increasing);
        assert_eq!(classify_trend(&[1.0, 2.0, 1.5], TREND_EPS), Trend::Swing);
    }

    #[test]
    fn rejects_non_nested_family() {
        let spec = MediumSpec::reference();
        let a = generate_rectangle(1.0, 1.0, 3, 3).unwrap();
        let b = generate_rectangle(1.0, 1.0, 5, 5).unwrap();
        let fam = vec![a.clone(), b, a.refine_uniform()];
        assert!(matches!(
            convergence_trend(Formulation::ScalarTM, &fam, &spec, 1, &SolveOptions::default()),
            Err(CrossvalError::NotNested(1))
        ));
        assert!(matches!(
            convergence_trend(Formulation::ScalarTM, &fam[..2], &spec, 1, &SolveOptions::default()),
            Err(CrossvalError::TooFewMeshes(2))
        ));
    }

    #[test]
    fn scalar_tm_rectangle_decreases() {
        let fam = refinement_family(&rect(), 2);
        let r = convergence_trend(
            Formulation::ScalarTM,
            &fam,
            &MediumSpec::reference(),
            4,
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }
}
