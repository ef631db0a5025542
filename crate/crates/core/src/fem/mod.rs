//! Global assembly of the four waveguide pencils.
//!
//! Matrix entry `(i, j)` is the sesquilinear form evaluated with trial
//! function `j` and (conjugated) test function `i`, so every assembled `K`
//! and `M` is Hermitian.

pub mod element;
pub mod sparse;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::medium::{MediumError, MediumSpec, TransverseTensor};
use crate::mesh::Mesh;
pub use element::{element_edge_matrices, element_scalar_matrices, ElementContext};
pub use sparse::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("mesh has no interior nodes; refine it before solving this formulation")]
    NoInteriorNodes,
    #[error("mesh has no interior edges")]
    NoInteriorEdges,
    #[error(transparent)]
    Medium(#[from] MediumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "scalar_te")]
    ScalarTE,
    #[serde(rename = "scalar_tm")]
    ScalarTM,
    #[serde(rename = "vector_te")]
    VectorTE,
    #[serde(rename = "vector_tm")]
    VectorTM,
}

impl Formulation {
    pub const ALL: [Formulation; 4] = [Self::ScalarTE, Self::ScalarTM, Self::VectorTE, Self::VectorTM];

    pub fn is_vector(self) -> bool {
        matches!(self, Self::VectorTE | Self::VectorTM)
    }

    pub fn is_te(self) -> bool {
        matches!(self, Self::ScalarTE | Self::VectorTE)
    }

    /// The formulation whose nonzero spectrum should coincide with this one.
    pub fn partner(self) -> Self {
        match self {
            Self::ScalarTE => Self::VectorTE,
            Self::VectorTE => Self::ScalarTE,
            Self::ScalarTM => Self::VectorTM,
            Self::VectorTM => Self::ScalarTM,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ScalarTE => "scalar_te",
            Self::ScalarTM => "scalar_tm",
            Self::VectorTE => "vector_te",
            Self::VectorTM => "vector_tm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DofKind {
    NodalAll,
    NodalInterior,
    /// All nodes except one, whose value is fixed to zero.
    NodalPinned(usize),
    EdgeAll,
    EdgeInterior,
}

/// Map between mesh entities (nodes or edges) and retained unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    kind: DofKind,
    to_dof: Vec<Option<usize>>,
    to_entity: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, kind: DofKind) -> Self {
        let keep: Vec<bool> = match kind {
            DofKind::NodalAll => vec![true; mesh.num_nodes()],
            DofKind::NodalInterior => mesh.boundary_node_flags().iter().map(|b| !b).collect(),
            DofKind::NodalPinned(p) => (0..mesh.num_nodes()).map(|i| i != p).collect(),
            DofKind::EdgeAll => vec![true; mesh.num_edges()],
            DofKind::EdgeInterior => mesh.boundary_edge_flags().iter().map(|b| !b).collect(),
        };
        let mut to_dof = vec![None; keep.len()];
        let mut to_entity = Vec::new();
        for (i, k) in keep.iter().enumerate() {
            if *k {
                to_dof[i] = Some(to_entity.len());
                to_entity.push(i);
            }
        }
        Self { kind, to_dof, to_entity }
    }

    pub fn kind(&self) -> DofKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.to_entity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_entity.is_empty()
    }

    pub fn entity_count(&self) -> usize {
        self.to_dof.len()
    }

    pub fn dof(&self, entity: usize) -> Option<usize> {
        self.to_dof[entity]
    }

    pub fn entity(&self, dof: usize) -> usize {
        self.to_entity[dof]
    }

    pub fn entities(&self) -> &[usize] {
        &self.to_entity
    }

    /// Scatters a DOF vector onto all entities, eliminated ones set to zero.
    pub fn expand(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.to_dof.len()];
        for (d, &e) in self.to_entity.iter().enumerate() {
            out[e] = v[d];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Plain,
    Saddle { primal_dim: usize, multiplier_dim: usize },
}

/// Blocks of a mixed pencil `[[A, C], [Cᴴ, 0]]`, `[[B, 0], [0, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleBlocks {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub c: CsrMatrix,
    /// Discrete gradient: the edge coefficients of `∇φₙ` for each multiplier node.
    pub g: CsrMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPencil {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub layout: Layout,
    pub primal: DofMap,
    pub multiplier: Option<DofMap>,
    pub blocks: Option<SaddleBlocks>,
}

impl HermitianPencil {
    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    pub fn primal_dim(&self) -> usize {
        self.primal.len()
    }

    /// Builds a saddle pencil from its blocks.
    pub fn from_blocks(blocks: SaddleBlocks, primal: DofMap, multiplier: DofMap) -> Self {
        let (n, m) = (blocks.a.nrows(), blocks.c.ncols());
        Self {
            k: CsrMatrix::saddle(&blocks.a, &blocks.c, None),
            m: CsrMatrix::pad(&blocks.b, m),
            layout: Layout::Saddle {
                primal_dim: n,
                multiplier_dim: m,
            },
            primal,
            multiplier: Some(multiplier),
            blocks: Some(blocks),
        }
    }
}

fn scalar_pencil(mesh: &Mesh, d: &TransverseTensor, c: f64, dofs: DofMap) -> HermitianPencil {
    let n = dofs.len();
    let mut tk = Vec::with_capacity(9 * mesh.num_triangles());
    let mut tm = Vec::with_capacity(9 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let ctx = ElementContext::new(mesh, t);
        let (ke, me) = element_scalar_matrices(&ctx, d, c);
        for i in 0..3 {
            let Some(gi) = dofs.dof(ctx.nodes[i]) else { continue };
            for j in 0..3 {
                let Some(gj) = dofs.dof(ctx.nodes[j]) else { continue };
                tk.push((gi, gj, ke[i][j]));
                tm.push((gi, gj, Complex64::new(me[i][j], 0.0)));
            }
        }
    }
    HermitianPencil {
        k: CsrMatrix::from_triplets(n, n, &tk),
        m: CsrMatrix::from_triplets(n, n, &tm),
        layout: Layout::Plain,
        primal: dofs,
        multiplier: None,
        blocks: None,
    }
}

/// `K = A₁` (μ̄_t stiffness) and `M = B₁` (μ_zz mass) over all nodes.
pub fn assemble_scalar_te(mesh: &Mesh, spec: &MediumSpec) -> Result<HermitianPencil, FemError> {
    spec.require_valid()?;
    Ok(scalar_pencil(
        mesh,
        &spec.mu_t,
        spec.mu_zz,
        DofMap::new(mesh, DofKind::NodalAll),
    ))
}

/// `K = A₂` (ε̄_t stiffness) and `M = B₂` (ε_zz mass) over interior nodes.
pub fn assemble_scalar_tm(mesh: &Mesh, spec: &MediumSpec) -> Result<HermitianPencil, FemError> {
    spec.require_valid()?;
    let dofs = DofMap::new(mesh, DofKind::NodalInterior);
    if dofs.is_empty() {
        return Err(FemError::NoInteriorNodes);
    }
    Ok(scalar_pencil(mesh, &spec.eps_t, spec.eps_zz, dofs))
}

/// Coupling block `C[e][n] = conj(∫ (D N_e)·conj(∇φₙ))` over the given DOF sets.
pub fn assemble_coupling(mesh: &Mesh, d: &TransverseTensor, primal: &DofMap, multiplier: &DofMap) -> CsrMatrix {
    let mut t = Vec::with_capacity(9 * mesh.num_triangles());
    for tri in 0..mesh.num_triangles() {
        let ctx = ElementContext::new(mesh, tri);
        let (_, _, ce) = element_edge_matrices(&ctx, d, 1.0);
        for e in 0..3 {
            let Some(ge) = primal.dof(ctx.edges[e]) else { continue };
            for n in 0..3 {
                let Some(gn) = multiplier.dof(ctx.nodes[n]) else { continue };
                t.push((ge, gn, ce[e][n].conj()));
            }
        }
    }
    CsrMatrix::from_triplets(primal.len(), multiplier.len(), &t)
}

/// Discrete gradient: `∇φₙ = Σ_e G[e][n] N_e` with `+1` at the edge's high node.
pub fn discrete_gradient(mesh: &Mesh, primal: &DofMap, multiplier: &DofMap) -> CsrMatrix {
    let mut t = Vec::with_capacity(2 * mesh.num_edges());
    for (e, [lo, hi]) in mesh.edges().iter().enumerate() {
        let Some(ge) = primal.dof(e) else { continue };
        if let Some(g) = multiplier.dof(*lo) {
            t.push((ge, g, Complex64::new(-1.0, 0.0)));
        }
        if let Some(g) = multiplier.dof(*hi) {
            t.push((ge, g, Complex64::new(1.0, 0.0)));
        }
    }
    CsrMatrix::from_triplets(primal.len(), multiplier.len(), &t)
}

/// Curl-curl and mass blocks over the given edge DOFs.
pub fn assemble_edge_blocks(mesh: &Mesh, d_inv: &TransverseTensor, c_inv: f64, primal: &DofMap) -> (CsrMatrix, CsrMatrix) {
    let n = primal.len();
    let mut ta = Vec::with_capacity(9 * mesh.num_triangles());
    let mut tb = Vec::with_capacity(9 * mesh.num_triangles());
    for tri in 0..mesh.num_triangles() {
        let ctx = ElementContext::new(mesh, tri);
        let (ae, be, _) = element_edge_matrices(&ctx, d_inv, c_inv);
        for e in 0..3 {
            let Some(ge) = primal.dof(ctx.edges[e]) else { continue };
            for f in 0..3 {
                let Some(gf) = primal.dof(ctx.edges[f]) else { continue };
                ta.push((ge, gf, Complex64::new(ae[e][f], 0.0)));
                tb.push((ge, gf, be[e][f]));
            }
        }
    }
    (CsrMatrix::from_triplets(n, n, &ta), CsrMatrix::from_triplets(n, n, &tb))
}

fn vector_pencil(
    mesh: &Mesh,
    d: &TransverseTensor,
    zz: f64,
    primal: DofMap,
    multiplier: DofMap,
) -> Result<HermitianPencil, FemError> {
    let d_inv = d.inverse()?;
    let (a, b) = assemble_edge_blocks(mesh, &d_inv, 1.0 / zz, &primal);
    let c = assemble_coupling(mesh, &d_inv, &primal, &multiplier);
    let g = discrete_gradient(mesh, &primal, &multiplier);
    Ok(HermitianPencil::from_blocks(SaddleBlocks { a, b, c, g }, primal, multiplier))
}

/// Mixed TE pencil: interior edges with interior-node multipliers.
pub fn assemble_vector_te(mesh: &Mesh, spec: &MediumSpec) -> Result<HermitianPencil, FemError> {
    spec.require_valid()?;
    let primal = DofMap::new(mesh, DofKind::EdgeInterior);
    if primal.is_empty() {
        return Err(FemError::NoInteriorEdges);
    }
    let multiplier = DofMap::new(mesh, DofKind::NodalInterior);
    vector_pencil(mesh, &spec.mu_t, spec.mu_zz, primal, multiplier)
}

/// Mixed TM pencil: all edges with all-but-node-0 multipliers.
pub fn assemble_vector_tm(mesh: &Mesh, spec: &MediumSpec) -> Result<HermitianPencil, FemError> {
    spec.require_valid()?;
    let primal = DofMap::new(mesh, DofKind::EdgeAll);
    let multiplier = DofMap::new(mesh, DofKind::NodalPinned(0));
    vector_pencil(mesh, &spec.eps_t, spec.eps_zz, primal, multiplier)
}

pub fn assemble(formulation: Formulation, mesh: &Mesh, spec: &MediumSpec) -> Result<HermitianPencil, FemError> {
    match formulation {
        Formulation::ScalarTE => assemble_scalar_te(mesh, spec),
        Formulation::ScalarTM => assemble_scalar_tm(mesh, spec),
        Formulation::VectorTE => assemble_vector_te(mesh, spec),
        Formulation::VectorTM => assemble_vector_tm(mesh, spec),
    }
}
