//! Cut-off modes of the four formulations, companion field reconstruction,
//! TEM detection and Lagrange multiplier diagnostics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{self, classify_near_zero, EigenError, SolveOptions};
use crate::fem::sparse::{dot, norm2};
use crate::fem::{assemble, CsrMatrix, DofMap, ElementContext, FemError, Formulation, HermitianPencil, Layout};
use crate::medium::{MediumError, MediumSpec, TransverseTensor, Verdict};
use crate::mesh::Mesh;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModesError {
    #[error(
        "medium does not guarantee independent TE/TM modes (condition II residual {residual:e}, condition I ok: {condition_i})"
    )]
    NotGuaranteed { condition_i: bool, residual: f64 },
    #[error("at least one mode must be requested")]
    NoModes,
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("mode index {index} out of range ({count} modes)")]
    ModeIndex { index: usize, count: usize },
    #[error("mode {0} has zero cut-off; its longitudinal fields vanish")]
    ZeroCutoff(usize),
    #[error("operation requires a {expected} solution, got {found}")]
    WrongFormulation { expected: &'static str, found: &'static str },
    #[error("mesh does not match the one the solution was computed on")]
    MeshMismatch,
}

/// Cut-off modes of one formulation on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub formulation: Formulation,
    /// Ascending `k_t = √λ` in rad/m.
    pub cutoffs: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub is_tem: Vec<bool>,
    pub tem_count: usize,
    /// Near-zero modes removed before reporting (the scalar TE constant).
    pub discarded_near_zero: usize,
    /// Primal DOF vectors, `‖ξ‖_M = 1`, largest entry real positive.
    pub dof_vectors: Vec<Vec<Complex64>>,
    pub multiplier_vectors: Option<Vec<Vec<Complex64>>>,
    pub residuals: Vec<f64>,
    pub constraint_residuals: Option<Vec<f64>>,
    pub primal: DofMap,
    pub multiplier: Option<DofMap>,
    pub mesh_h: f64,
    pub mesh_size: (usize, usize, usize),
    pub spec: MediumSpec,
}

impl ModeSolution {
    pub fn len(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cutoffs.is_empty()
    }

    pub fn nonzero_cutoffs(&self) -> Vec<f64> {
        self.cutoffs
            .iter()
            .zip(&self.is_tem)
            .filter(|(_, t)| !**t)
            .map(|(k, _)| *k)
            .collect()
    }

    fn check_mesh(&self, mesh: &Mesh) -> Result<(), ModesError> {
        if (mesh.num_nodes(), mesh.num_edges(), mesh.num_triangles()) != self.mesh_size {
            return Err(ModesError::MeshMismatch);
        }
        Ok(())
    }

    fn check_index(&self, index: usize) -> Result<(), ModesError> {
        if index >= self.len() {
            return Err(ModesError::ModeIndex {
                index,
                count: self.len(),
            });
        }
        Ok(())
    }
}

fn ensure_valid(spec: &MediumSpec) -> Result<(), ModesError> {
    let r = spec.validate();
    if r.verdict != Verdict::IndependentModes {
        return Err(ModesError::NotGuaranteed {
            condition_i: r.condition_i.ok,
            residual: r.condition_ii_residual,
        });
    }
    Ok(())
}

fn primal_mass(pencil: &HermitianPencil) -> CsrMatrix {
    match (&pencil.layout, &pencil.blocks) {
        (Layout::Plain, _) => pencil.m.clone(),
        (Layout::Saddle { .. }, Some(b)) => b.b.clone(),
        (Layout::Saddle { primal_dim, .. }, None) => {
            let idx: Vec<usize> = (0..*primal_dim).collect();
            pencil.m.submatrix(&idx, &idx)
        }
    }
}

/// Unit mass norm, then the phase that makes the largest-magnitude entry real positive.
fn normalization(m: &CsrMatrix, xi: &[Complex64]) -> Complex64 {
    let nrm = dot(xi, &m.mul_vec(xi)).re.max(0.0).sqrt();
    let mut best = (0usize, 0.0f64);
    for (i, z) in xi.iter().enumerate() {
        if z.norm() > best.1 * (1.0 + 1e-12) {
            best = (i, z.norm());
        }
    }
    if nrm == 0.0 || best.1 == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    xi[best.0].conj() / (best.1 * nrm)
}

/// Solves `formulation` for `q` nonzero cut-offs (plus any near-zero vector modes).
pub fn solve_modes(
    formulation: Formulation,
    mesh: &Mesh,
    spec: &MediumSpec,
    q: usize,
    opts: &SolveOptions,
) -> Result<ModeSolution, ModesError> {
    if q == 0 {
        return Err(ModesError::NoModes);
    }
    ensure_valid(spec)?;
    let pencil = assemble(formulation, mesh, spec)?;
    let expected_zero = match formulation {
        Formulation::ScalarTE => 1,
        Formulation::ScalarTM => 0,
        Formulation::VectorTE | Formulation::VectorTM => mesh.boundary_components().saturating_sub(1),
    };
    let mut extra = 0;
    let (spectrum, zero, nonzero) = loop {
        let o = SolveOptions {
            num_modes: q + expected_zero + extra,
            ..*opts
        };
        let s = eigen::solve(&pencil, &o)?;
        let (zero, nonzero) = if formulation == Formulation::ScalarTM {
            (Vec::new(), (0..s.eigenvalues.len()).collect())
        } else {
            classify_near_zero(&s.eigenvalues, opts.zero_frac)?
        };
        if nonzero.len() >= q || extra >= q + 8 {
            break (s, zero, nonzero);
        }
        extra += q - nonzero.len();
    };
    let mut keep: Vec<usize> = Vec::new();
    let mut discarded = 0;
    if formulation == Formulation::ScalarTE {
        discarded = zero.len();
    } else {
        keep.extend(&zero);
    }
    keep.extend(nonzero.iter().take(q));
    keep.sort_unstable();

    let m = primal_mass(&pencil);
    let mut sol = ModeSolution {
        formulation,
        cutoffs: Vec::with_capacity(keep.len()),
        eigenvalues: Vec::with_capacity(keep.len()),
        is_tem: Vec::with_capacity(keep.len()),
        tem_count: 0,
        discarded_near_zero: discarded,
        dof_vectors: Vec::with_capacity(keep.len()),
        multiplier_vectors: spectrum.multipliers.as_ref().map(|_| Vec::new()),
        residuals: Vec::new(),
        constraint_residuals: spectrum.constraint_residuals.as_ref().map(|_| Vec::new()),
        primal: pencil.primal.clone(),
        multiplier: pencil.multiplier.clone(),
        mesh_h: mesh.h(),
        mesh_size: (mesh.num_nodes(), mesh.num_edges(), mesh.num_triangles()),
        spec: *spec,
    };
    for &i in &keep {
        let lam = spectrum.eigenvalues[i];
        let tem = formulation.is_vector() && zero.contains(&i);
        let factor = normalization(&m, &spectrum.eigenvectors[i]);
        sol.eigenvalues.push(lam);
        sol.cutoffs.push(lam.max(0.0).sqrt());
        sol.is_tem.push(tem);
        sol.tem_count += tem as usize;
        sol.dof_vectors
            .push(spectrum.eigenvectors[i].iter().map(|z| z * factor).collect());
        if let (Some(out), Some(src)) = (sol.multiplier_vectors.as_mut(), spectrum.multipliers.as_ref()) {
            out.push(src[i].iter().map(|z| z * factor).collect());
        }
        sol.residuals.push(spectrum.residuals[i]);
        if let (Some(out), Some(src)) = (sol.constraint_residuals.as_mut(), spectrum.constraint_residuals.as_ref()) {
            out.push(src[i]);
        }
    }
    Ok(sol)
}

pub fn solve_te_scalar(mesh: &Mesh, spec: &MediumSpec, q: usize) -> Result<ModeSolution, ModesError> {
    solve_modes(Formulation::ScalarTE, mesh, spec, q, &SolveOptions::default())
}

pub fn solve_tm_scalar(mesh: &Mesh, spec: &MediumSpec, q: usize) -> Result<ModeSolution, ModesError> {
    solve_modes(Formulation::ScalarTM, mesh, spec, q, &SolveOptions::default())
}

pub fn solve_te_vector(mesh: &Mesh, spec: &MediumSpec, q: usize) -> Result<ModeSolution, ModesError> {
    solve_modes(Formulation::VectorTE, mesh, spec, q, &SolveOptions::default())
}

pub fn solve_tm_vector(mesh: &Mesh, spec: &MediumSpec, q: usize) -> Result<ModeSolution, ModesError> {
    solve_modes(Formulation::VectorTM, mesh, spec, q, &SolveOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldKind {
    NodalScalar,
    TriangleScalar,
    TriangleVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldLabel {
    #[serde(rename = "e_z")]
    Ez,
    #[serde(rename = "h_z")]
    Hz,
    #[serde(rename = "e_t")]
    Et,
    #[serde(rename = "h_t")]
    Ht,
    #[serde(rename = "p")]
    P,
}

impl FieldLabel {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ez => "e_z",
            Self::Hz => "h_z",
            Self::Et => "e_t",
            Self::Ht => "h_t",
            Self::P => "p",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSamples {
    Scalar(Vec<Complex64>),
    Vector(Vec<[Complex64; 2]>),
}

impl FieldSamples {
    pub fn len(&self) -> usize {
        match self {
            Self::Scalar(v) => v.len(),
            Self::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One field component sampled on the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFrame {
    pub kind: FieldKind,
    pub label: FieldLabel,
    pub samples: FieldSamples,
    pub omega: Option<f64>,
    pub k_z: Option<Complex64>,
    pub k_t: f64,
}

impl FieldFrame {
    fn vector(label: FieldLabel, v: Vec<[Complex64; 2]>, omega: f64, k_z: Complex64, k_t: f64) -> Self {
        Self {
            kind: FieldKind::TriangleVector,
            label,
            samples: FieldSamples::Vector(v),
            omega: Some(omega),
            k_z: Some(k_z),
            k_t,
        }
    }
}

/// Bulk wavenumber and phase constant; evanescent modes get `k_z = −j√(k_t² − k²)`.
pub fn phase_constant(spec: &MediumSpec, omega: f64, k_t: f64) -> Result<(f64, Complex64), ModesError> {
    let k = spec.bulk_wavenumber(omega)?;
    let d = k * k - k_t * k_t;
    let kz = if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-d).sqrt())
    };
    Ok((k, kz))
}

const J: Complex64 = Complex64::new(0.0, 1.0);

/// `ẑ × v`.
fn rot(v: [Complex64; 2]) -> [Complex64; 2] {
    [-v[1], v[0]]
}

fn scale2(s: Complex64, v: [Complex64; 2]) -> [Complex64; 2] {
    [s * v[0], s * v[1]]
}

fn nodal_gradients(mesh: &Mesh, values: &[Complex64]) -> Vec<[Complex64; 2]> {
    (0..mesh.num_triangles())
        .map(|t| {
            let ctx = ElementContext::new(mesh, t);
            let mut g = [Complex64::new(0.0, 0.0); 2];
            for i in 0..3 {
                let v = values[ctx.nodes[i]];
                g[0] += v * ctx.grads[i][0];
                g[1] += v * ctx.grads[i][1];
            }
            g
        })
        .collect()
}

/// Transverse fields of a scalar mode from the gradient of its longitudinal field.
fn reconstruct_scalar(
    sol: &ModeSolution,
    index: usize,
    mesh: &Mesh,
    spec: &MediumSpec,
    omega: f64,
    expected: Formulation,
) -> Result<(FieldFrame, FieldFrame), ModesError> {
    if sol.formulation != expected {
        return Err(ModesError::WrongFormulation {
            expected: expected.name(),
            found: sol.formulation.name(),
        });
    }
    sol.check_mesh(mesh)?;
    sol.check_index(index)?;
    let k_t = sol.cutoffs[index];
    if !(k_t > 0.0) || sol.is_tem[index] {
        return Err(ModesError::ZeroCutoff(index));
    }
    let (_, kz) = phase_constant(spec, omega, k_t)?;
    let values = sol.primal.expand(&sol.dof_vectors[index]);
    let grads = nodal_gradients(mesh, &values);
    let kt2 = k_t * k_t;
    let along = -J * kz / kt2;
    if expected == Formulation::ScalarTE {
        let mu = spec.mu_t.scaled(spec.mu0);
        let e_t = grads.iter().map(|g| scale2(J * omega / kt2, rot(mu.apply(*g)))).collect();
        let h_t = grads.iter().map(|g| scale2(along, *g)).collect();
        Ok((
            FieldFrame::vector(FieldLabel::Et, e_t, omega, kz, k_t),
            FieldFrame::vector(FieldLabel::Ht, h_t, omega, kz, k_t),
        ))
    } else {
        let eps = spec.eps_t.scaled(spec.eps0);
        let e_t = grads.iter().map(|g| scale2(along, *g)).collect();
        let h_t = grads.iter().map(|g| scale2(-J * omega / kt2, rot(eps.apply(*g)))).collect();
        Ok((
            FieldFrame::vector(FieldLabel::Et, e_t, omega, kz, k_t),
            FieldFrame::vector(FieldLabel::Ht, h_t, omega, kz, k_t),
        ))
    }
}

/// `e_t = (jω/k_t²) ẑ×(μ̄_t∇h_z)`, `h_t = −(jk_z/k_t²)∇h_z` per triangle.
pub fn reconstruct_from_hz(
    sol: &ModeSolution,
    index: usize,
    mesh: &Mesh,
    spec: &MediumSpec,
    omega: f64,
) -> Result<(FieldFrame, FieldFrame), ModesError> {
    reconstruct_scalar(sol, index, mesh, spec, omega, Formulation::ScalarTE)
}

/// `e_t = −(jk_z/k_t²)∇e_z`, `h_t = −(jω/k_t²) ẑ×(ε̄_t∇e_z)` per triangle.
pub fn reconstruct_from_ez(
    sol: &ModeSolution,
    index: usize,
    mesh: &Mesh,
    spec: &MediumSpec,
    omega: f64,
) -> Result<(FieldFrame, FieldFrame), ModesError> {
    reconstruct_scalar(sol, index, mesh, spec, omega, Formulation::ScalarTM)
}

fn require_vector(sol: &ModeSolution) -> Result<(), ModesError> {
    if !sol.formulation.is_vector() {
        return Err(ModesError::WrongFormulation {
            expected: "vector",
            found: sol.formulation.name(),
        });
    }
    Ok(())
}

/// Edge field at triangle centroids and its constant curl per triangle.
fn edge_field(mesh: &Mesh, sol: &ModeSolution, index: usize) -> (Vec<[Complex64; 2]>, Vec<Complex64>) {
    let values = sol.primal.expand(&sol.dof_vectors[index]);
    let third = [1.0 / 3.0; 3];
    let mut field = Vec::with_capacity(mesh.num_triangles());
    let mut curl = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let ctx = ElementContext::new(mesh, t);
        let mut f = [Complex64::new(0.0, 0.0); 2];
        let mut c = Complex64::new(0.0, 0.0);
        for k in 0..3 {
            let u = values[ctx.edges[k]];
            let n = ctx.edge_value(k, third);
            f[0] += u * n[0];
            f[1] += u * n[1];
            c += u * ctx.edge_curl(k);
        }
        field.push(f);
        curl.push(c);
    }
    (field, curl)
}

/// Per-triangle `h_z = j∇×e_t/(ωμ_zz)` (vector TE) or `e_z = ∇×h_t/(jωε_zz)` (vector TM).
pub fn reconstruct_longitudinal(
    sol: &ModeSolution,
    index: usize,
    mesh: &Mesh,
    spec: &MediumSpec,
    omega: f64,
) -> Result<FieldFrame, ModesError> {
    require_vector(sol)?;
    sol.check_mesh(mesh)?;
    sol.check_index(index)?;
    let k_t = sol.cutoffs[index];
    if sol.is_tem[index] || !(k_t > 0.0) {
        return Err(ModesError::ZeroCutoff(index));
    }
    let (_, kz) = phase_constant(spec, omega, k_t)?;
    let (_, curl) = edge_field(mesh, sol, index);
    let (label, factor) = if sol.formulation == Formulation::VectorTE {
        (FieldLabel::Hz, J / (omega * spec.mu_zz * spec.mu0))
    } else {
        (FieldLabel::Ez, 1.0 / (J * omega * spec.eps_zz * spec.eps0))
    };
    Ok(FieldFrame {
        kind: FieldKind::TriangleScalar,
        label,
        samples: FieldSamples::Scalar(curl.iter().map(|c| c * factor).collect()),
        omega: Some(omega),
        k_z: Some(kz),
        k_t,
    })
}

/// Transverse fields of a vector mode: the eigenvector itself at triangle
/// centroids, and its partner from `jk_z ẑ×e_t = jω μ̄_t h_t` (TE) or
/// `jk_z ẑ×h_t = −jω ε̄_t e_t` (TM). TEM modes are accepted.
pub fn reconstruct_transverse(
    sol: &ModeSolution,
    index: usize,
    mesh: &Mesh,
    spec: &MediumSpec,
    omega: f64,
) -> Result<(FieldFrame, FieldFrame), ModesError> {
    require_vector(sol)?;
    sol.check_mesh(mesh)?;
    sol.check_index(index)?;
    let k_t = sol.cutoffs[index];
    let (_, kz) = phase_constant(spec, omega, if sol.is_tem[index] { 0.0 } else { k_t })?;
    let (field, _) = edge_field(mesh, sol, index);
    let partner = |d: TransverseTensor, s: Complex64| -> Result<Vec<[Complex64; 2]>, ModesError> {
        let inv = d.inverse()?;
        Ok(field.iter().map(|f| scale2(s, inv.apply(rot(*f)))).collect())
    };
    if sol.formulation == Formulation::VectorTE {
        let h_t = partner(spec.mu_t.scaled(spec.mu0), kz / omega)?;
        Ok((
            FieldFrame::vector(FieldLabel::Et, field, omega, kz, k_t),
            FieldFrame::vector(FieldLabel::Ht, h_t, omega, kz, k_t),
        ))
    } else {
        let e_t = partner(spec.eps_t.scaled(spec.eps0), -kz / omega)?;
        Ok((
            FieldFrame::vector(FieldLabel::Et, e_t, omega, kz, k_t),
            FieldFrame::vector(FieldLabel::Ht, field, omega, kz, k_t),
        ))
    }
}

/// Everything exported for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeFields {
    pub e_t: FieldFrame,
    pub h_t: FieldFrame,
    /// Nodal `h_z`/`e_z` for scalar modes, the nodal multiplier for vector modes.
    pub nodal: FieldFrame,
    /// Per-triangle longitudinal field of a non-TEM vector mode.
    pub longitudinal: Option<FieldFrame>,
}

pub fn mode_fields(
    sol: &ModeSolution,
    index: usize,
    mesh: &Mesh,
    spec: &MediumSpec,
    omega: f64,
) -> Result<ModeFields, ModesError> {
    sol.check_mesh(mesh)?;
    sol.check_index(index)?;
    let k_t = sol.cutoffs[index];
    let (_, kz) = phase_constant(spec, omega, if sol.is_tem[index] { 0.0 } else { k_t })?;
    match sol.formulation {
        Formulation::ScalarTE | Formulation::ScalarTM => {
            let (e_t, h_t) = reconstruct_scalar(sol, index, mesh, spec, omega, sol.formulation)?;
            let label = if sol.formulation == Formulation::ScalarTE {
                FieldLabel::Hz
            } else {
                FieldLabel::Ez
            };
            let nodal = FieldFrame {
                kind: FieldKind::NodalScalar,
                label,
                samples: FieldSamples::Scalar(sol.primal.expand(&sol.dof_vectors[index])),
                omega: Some(omega),
                k_z: Some(kz),
                k_t,
            };
            Ok(ModeFields {
                e_t,
                h_t,
                nodal,
                longitudinal: None,
            })
        }
        Formulation::VectorTE | Formulation::VectorTM => {
            let (e_t, h_t) = reconstruct_transverse(sol, index, mesh, spec, omega)?;
            let p = match (&sol.multiplier, &sol.multiplier_vectors) {
                (Some(map), Some(v)) => map.expand(&v[index]),
                _ => vec![Complex64::new(0.0, 0.0); mesh.num_nodes()],
            };
            let nodal = FieldFrame {
                kind: FieldKind::NodalScalar,
                label: FieldLabel::P,
                samples: FieldSamples::Scalar(p),
                omega: Some(omega),
                k_z: Some(kz),
                k_t,
            };
            let longitudinal = if sol.is_tem[index] {
                None
            } else {
                Some(reconstruct_longitudinal(sol, index, mesh, spec, omega)?)
            };
            Ok(ModeFields {
                e_t,
                h_t,
                nodal,
                longitudinal,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemReport {
    pub boundary_components: usize,
    pub expected: usize,
    pub found: usize,
    pub pass: bool,
}

/// Checks `tem_count = B − 1` for a vector solution.
pub fn verify_tem(sol: &ModeSolution, mesh: &Mesh) -> TemReport {
    let b = mesh.boundary_components();
    let expected = b.saturating_sub(1);
    TemReport {
        boundary_components: b,
        expected,
        found: sol.tem_count,
        pass: sol.formulation.is_vector() && sol.tem_count == expected,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub formulation: Formulation,
    /// `‖p₁‖/‖ξ‖` (TE) or `stddev(p₂)/(|mean p₂| + ‖ξ‖)` (TM), per mode.
    pub values: Vec<f64>,
}

impl MultiplierReport {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn multiplier_diagnostics(sol: &ModeSolution) -> Result<MultiplierReport, ModesError> {
    require_vector(sol)?;
    let (Some(mults), Some(map)) = (&sol.multiplier_vectors, &sol.multiplier) else {
        return Err(ModesError::WrongFormulation {
            expected: "saddle",
            found: sol.formulation.name(),
        });
    };
    let values = mults
        .iter()
        .zip(&sol.dof_vectors)
        .map(|(p, xi)| {
            let nx = norm2(xi);
            if sol.formulation == Formulation::VectorTE {
                norm2(p) / nx
            } else {
                let full = map.expand(p);
                let n = full.len() as f64;
                let mean = full.iter().sum::<Complex64>() / n;
                let var = full.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n;
                var.sqrt() / (mean.norm() + nx)
            }
        })
        .collect();
    Ok(MultiplierReport {
        formulation: sol.formulation,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_annulus, generate_rectangle};

    fn rect() -> Mesh {
        generate_rectangle(1.2e-3, 1.0e-3, 12, 10).unwrap()
    }

    #[test]
    fn scalar_te_drops_constant() {
        let m = rect();
        let s = solve_te_scalar(&m, &MediumSpec::reference(), 3).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.discarded_near_zero, 1);
        assert_eq!(s.tem_count, 0);
        assert!(s.cutoffs.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.cutoffs[0] > 1000.0);
    }

    #[test]
    fn q_one_single_mode() {
        let m = rect();
        for f in Formulation::ALL {
            let s = solve_modes(f, &m, &MediumSpec::reference(), 1, &SolveOptions::default()).unwrap();
            assert_eq!(s.nonzero_cutoffs().len(), 1, "{f:?}");
        }
    }

    #[test]
    fn rejects_not_guaranteed() {
        let mut spec = MediumSpec::reference();
        spec.mu_t.alpha = 0.6;
        assert!(matches!(
            solve_tm_scalar(&rect(), &spec, 2),
            Err(ModesError::NotGuaranteed { .. })
        ));
    }

    #[test]
    fn normalization_fixes_phase() {
        let m = rect();
        let s = solve_te_vector(&m, &MediumSpec::reference(), 2).unwrap();
        let p = crate::fem::assemble_vector_te(&m, &MediumSpec::reference()).unwrap();
        let b = &p.blocks.unwrap().b;
        for xi in &s.dof_vectors {
            assert!((dot(xi, &b.mul_vec(xi)).re - 1.0).abs() < 1e-12);
            let big = xi.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(big.im.abs() < 1e-14 * big.norm() && big.re > 0.0);
        }
    }

    #[test]
    fn coax_tem() {
        let m = generate_annulus(1e-3, 2e-3, 4, 24).unwrap();
        let spec = MediumSpec::reference();
        for f in [Formulation::VectorTE, Formulation::VectorTM] {
            let s = solve_modes(f, &m, &spec, 2, &SolveOptions::default()).unwrap();
            assert!(verify_tem(&s, &m).pass, "{f:?}");
            assert!(s.is_tem[0] && !s.is_tem[1]);
        }
    }

    #[test]
    fn dispersion_and_branches() {
        let spec = MediumSpec::reference();
        let omega = 3e12;
        let k = spec.bulk_wavenumber(omega).unwrap();
        for kt in [0.5 * k, 2.0 * k] {
            let (_, kz) = phase_constant(&spec, omega, kt).unwrap();
            let lhs = kz * kz + kt * kt;
            assert!((lhs - k * k).norm() <= 1e-10 * k * k);
            if kt > k {
                assert!(kz.re == 0.0 && kz.im < 0.0);
            }
        }
    }

    #[test]
    fn isotropic_fields_orthogonal() {
        let m = rect();
        let spec = MediumSpec::vacuum();
        let s = solve_te_scalar(&m, &spec, 1).unwrap();
        let (e, h) = reconstruct_from_hz(&s, 0, &m, &spec, 1e12).unwrap();
        let (FieldSamples::Vector(e), FieldSamples::Vector(h)) = (e.samples, h.samples) else {
            panic!()
        };
        for (a, b) in e.iter().zip(&h) {
            let scale = (a[0].norm() + a[1].norm()) * (b[0].norm() + b[1].norm()) + 1e-300;
            // Exact for any complex gradient; the conjugated product also needs a real eigenvector.
            assert!((a[0] * b[0] + a[1] * b[1]).norm() <= 1e-14 * scale);
            assert!((a[0] * b[0].conj() + a[1] * b[1].conj()).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn wrong_formulation_and_zero_modes() {
        let m = generate_annulus(1e-3, 2e-3, 3, 16).unwrap();
        let spec = MediumSpec::reference();
        let s = solve_tm_vector(&m, &spec, 1).unwrap();
        assert!(matches!(
            reconstruct_longitudinal(&s, 0, &m, &spec, 1e12),
            Err(ModesError::ZeroCutoff(0))
        ));
        assert!(reconstruct_transverse(&s, 0, &m, &spec, 1e12).is_ok());
        assert!(matches!(
            reconstruct_from_ez(&s, 1, &m, &spec, 1e12),
            Err(ModesError::WrongFormulation { .. })
        ));
    }

    #[test]
    fn multipliers_vanish() {
        let m = rect();
        let spec = MediumSpec::reference();
        for f in [Formulation::VectorTE, Formulation::VectorTM] {
            let s = solve_modes(f, &m, &spec, 4, &SolveOptions::default()).unwrap();
            let r = multiplier_diagnostics(&s).unwrap();
            assert!(r.max() <= 1e-6, "{f:?} {:?}", r.values);
        }
    }

    #[test]
    fn synthetic_multiplier_is_large() {
        let m = rect();
        let mut s = solve_te_vector(&m, &MediumSpec::reference(), 1).unwrap();
        let n = s.multiplier_vectors.as_ref().unwrap()[0].len();
        s.multiplier_vectors = Some(vec![(0..n).map(|i| Complex64::new((i as f64).sin(), 0.0)).collect()]);
        assert!(multiplier_diagnostics(&s).unwrap().max() > 1e-3);
    }

    #[test]
    fn companion_formula_matches_scalar_route() {
        // The vector-mode partner formula applied to the scalar e_t must reproduce h_t.
        let m = rect();
        let spec = MediumSpec::reference();
        let s = solve_te_scalar(&m, &spec, 1).unwrap();
        let omega = 2e12;
        let (e, h) = reconstruct_from_hz(&s, 0, &m, &spec, omega).unwrap();
        let kz = e.k_z.unwrap();
        let inv = spec.mu_t.scaled(spec.mu0).inverse().unwrap();
        let (FieldSamples::Vector(e), FieldSamples::Vector(h)) = (e.samples, h.samples) else {
            panic!()
        };
        for (a, b) in e.iter().zip(&h) {
            let p = scale2(kz / omega, inv.apply(rot(*a)));
            let scale = b[0].norm() + b[1].norm();
            assert!((p[0] - b[0]).norm() <= 1e-10 * scale && (p[1] - b[1]).norm() <= 1e-10 * scale);
        }
    }
}
