//! Finite-element cut-off modes of waveguides filled with a homogeneous
//! anisotropic lossless medium.
//!
//! The medium is checked for the conditions under which TE and TM modes
//! decouple, then the cut-off wavenumbers are computed by four formulations
//! (nodal TE/TM and mixed edge-element TE/TM) whose nonzero spectra can be
//! compared against each other and against analytic oracles.

pub mod crossval;
pub mod eigen;
pub mod fem;
pub mod medium;
pub mod mesh;
pub mod modes;
pub mod vtk;

use thiserror::Error;

pub use crossval::{
    classify_trend, compare_spectra, convergence_trend, oracle_tm_annulus, oracle_tm_disc, oracle_tm_rectangle,
    refinement_family, ComparisonReport, ConvergenceReport, CrossvalError, Trend,
};
pub use eigen::{classify_near_zero, EigenError, SolveOptions, Spectrum};
pub use fem::{assemble, FemError, Formulation, HermitianPencil};
pub use medium::{MediumError, MediumSpec, TransverseTensor, ValidationReport, Verdict};
pub use mesh::{
    export_mesh, generate_annulus, generate_rectangle, generate_rectilinear_polygon, generate_rectilinear_region, import_mesh,
    Mesh, MeshError, Point2,
};
pub use modes::{
    mode_fields, multiplier_diagnostics, reconstruct_from_ez, reconstruct_from_hz, reconstruct_longitudinal,
    reconstruct_transverse, solve_modes, solve_te_scalar, solve_te_vector, solve_tm_scalar, solve_tm_vector, FieldFrame,
    ModeFields, ModeSolution, ModesError,
};

/// Any error raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Modes(#[from] ModesError),
    #[error(transparent)]
    Crossval(#[from] CrossvalError),
}
