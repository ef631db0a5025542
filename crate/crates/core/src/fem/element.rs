//! Linear nodal and lowest-order edge elements on a single triangle.
//!
//! All integrals are evaluated in closed form: gradients of the barycentric
//! coordinates are constant and `∫ λₐ λ_b = |T|/12 (1 + δₐ_b)`.

use num_complex::Complex64;

use crate::medium::TransverseTensor;
use crate::mesh::{Mesh, Point2};

pub type Mat3 = [[Complex64; 3]; 3];
pub type RealMat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementContext {
    pub vertices: [Point2; 3],
    pub nodes: [usize; 3],
    pub area: f64,
    /// `∇λᵢ` for the three vertices.
    pub grads: [[f64; 2]; 3],
    /// Global edge index of local edge `k` (vertices `k`, `(k + 1) % 3`).
    pub edges: [usize; 3],
    pub signs: [f64; 3],
}

impl ElementContext {
    pub fn from_vertices(vertices: [Point2; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
        let area = 0.5 * det;
        // ∇λᵢ = ẑ × (p_{i+2} − p_{i+1}) / (2|T|), i.e. the rotated opposite side.
        let grad = |a: Point2, b: Point2| [(a.y - b.y) / det, (b.x - a.x) / det];
        let grads = [grad(p1, p2), grad(p2, p0), grad(p0, p1)];
        Self {
            vertices,
            nodes: [0, 1, 2],
            area,
            grads,
            edges: [0, 1, 2],
            signs: [1.0; 3],
        }
    }

    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let tri = mesh.triangles()[t];
        let nodes = mesh.nodes();
        let mut ctx = Self::from_vertices([nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]]);
        ctx.nodes = tri;
        let te = mesh.tri_edges()[t];
        for k in 0..3 {
            ctx.edges[k] = te[k].edge;
            ctx.signs[k] = f64::from(te[k].sign);
        }
        ctx
    }

    /// Local vertex pair `(a, b)` of local edge `k`, in traversal order.
    pub fn edge_vertices(k: usize) -> (usize, usize) {
        (k, (k + 1) % 3)
    }

    /// Scalar curl of the signed edge basis function `k` (constant on the triangle).
    pub fn edge_curl(&self, k: usize) -> f64 {
        let (a, b) = Self::edge_vertices(k);
        let (ga, gb) = (self.grads[a], self.grads[b]);
        self.signs[k] * 2.0 * (ga[0] * gb[1] - ga[1] * gb[0])
    }

    /// Value of the signed edge basis function `k` at barycentric point `l`.
    pub fn edge_value(&self, k: usize, l: [f64; 3]) -> [f64; 2] {
        let (a, b) = Self::edge_vertices(k);
        let (ga, gb) = (self.grads[a], self.grads[b]);
        let s = self.signs[k];
        [s * (l[a] * gb[0] - l[b] * ga[0]), s * (l[a] * gb[1] - l[b] * ga[1])]
    }
}

fn lumped(a: usize, b: usize, area: f64) -> f64 {
    if a == b {
        area / 6.0
    } else {
        area / 12.0
    }
}

/// `stiffness[i][j] = |T| (D∇λⱼ)·conj(∇λᵢ)` and `mass[i][j] = c |T|/12 (1 + δᵢⱼ)`.
pub fn element_scalar_matrices(ctx: &ElementContext, d: &TransverseTensor, c: f64) -> (Mat3, RealMat3) {
    let mut stiff = [[Complex64::new(0.0, 0.0); 3]; 3];
    let mut mass = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            stiff[i][j] = d.bilinear(ctx.grads[i], ctx.grads[j]) * ctx.area;
            mass[i][j] = c * lumped(i, j, ctx.area);
        }
    }
    (stiff, mass)
}

/// Curl-curl, mass and coupling matrices of the signed edge basis.
///
/// `coupling[e][n] = ∫ (D N_e)·conj(∇λₙ)`.
pub fn element_edge_matrices(ctx: &ElementContext, d_inv: &TransverseTensor, c_inv: f64) -> (RealMat3, Mat3, Mat3) {
    let g = &ctx.grads;
    let curls: [f64; 3] = std::array::from_fn(|k| ctx.edge_curl(k));
    let mut curl = [[0.0; 3]; 3];
    let mut mass = [[Complex64::new(0.0, 0.0); 3]; 3];
    let mut coupling = [[Complex64::new(0.0, 0.0); 3]; 3];
    for e in 0..3 {
        let (a, b) = ElementContext::edge_vertices(e);
        for f in 0..3 {
            curl[e][f] = c_inv * ctx.area * curls[f] * curls[e];
            let (cc, dd) = ElementContext::edge_vertices(f);
            let m = |p, q| lumped(p, q, ctx.area);
            let v = d_inv.bilinear(g[b], g[dd]) * m(a, cc)
                - d_inv.bilinear(g[b], g[cc]) * m(a, dd)
                - d_inv.bilinear(g[a], g[dd]) * m(b, cc)
                + d_inv.bilinear(g[a], g[cc]) * m(b, dd);
            mass[e][f] = v * (ctx.signs[e] * ctx.signs[f]);
        }
        let mean = [(g[b][0] - g[a][0]) * ctx.area / 3.0, (g[b][1] - g[a][1]) * ctx.area / 3.0];
        for (n, gn) in g.iter().enumerate() {
            coupling[e][n] = d_inv.bilinear(*gn, mean) * ctx.signs[e];
        }
    }
    (curl, mass, coupling)
}
