//! Conforming triangular meshes of a waveguide cross-section.
//!
//! A [`Mesh`] is immutable once built. All derived topology (edges, per-triangle
//! edge orientation, boundary flags and boundary connected components) is
//! computed by [`Mesh::build_topology`], which every generator and the text
//! importer go through.

mod generate;
mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_annulus, generate_rectangle, generate_rectilinear_polygon, generate_rectilinear_region};
pub use io::{export_mesh, import_mesh};

/// Triangles with signed area at or below this value (m²) are rejected.
pub const AREA_EPS: f64 = 1e-20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references node {node}, but the mesh has {count} nodes")]
    IndexOutOfRange { triangle: usize, node: usize, count: usize },
    #[error("node {node} has a non-finite coordinate")]
    NonFinite { node: usize },
    #[error("triangle {triangle} is degenerate or clockwise (signed area {area:e})")]
    Degenerate { triangle: usize, area: f64 },
    #[error("triangle {triangle} repeats a node")]
    RepeatedNode { triangle: usize },
    #[error("triangles {first} and {second} are duplicates")]
    DuplicateTriangle { first: usize, second: usize },
    #[error("edge ({lo}, {hi}) is shared by more than two triangles")]
    NonManifoldEdge { lo: usize, hi: usize },
    #[error("mesh is not conforming: {0}")]
    NonConforming(String),
    #[error("node {node} is not used by any triangle")]
    UnusedNode { node: usize },
    #[error("mesh has no triangles")]
    Empty,
    #[error("invalid generator input: {0}")]
    InvalidInput(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A point of the transverse plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

/// Local edge `k` of a triangle joins local vertices `k` and `(k + 1) % 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriEdge {
    pub edge: usize,
    /// `+1` when the triangle traverses the edge from its low to its high node.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[TriEdge; 3]>,
    boundary_node: Vec<bool>,
    boundary_edge: Vec<bool>,
    boundary_component: Vec<Option<usize>>,
    boundary_components: usize,
    h: f64,
}

/// Twice the signed area of the triangle `(a, b, c)`.
pub(crate) fn signed_area2(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

impl Mesh {
    /// Validates a triangulation and derives its full topology.
    pub fn build_topology(nodes: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Mesh, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        for (i, p) in nodes.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(MeshError::NonFinite { node: i });
            }
        }
        let n = nodes.len();
        let mut used = vec![false; n];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        node: v,
                        count: n,
                    });
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedNode { triangle: t });
            }
            let area = 0.5 * signed_area2(&nodes[tri[0]], &nodes[tri[1]], &nodes[tri[2]]);
            if area <= AREA_EPS {
                return Err(MeshError::Degenerate { triangle: t, area });
            }
        }
        if let Some(node) = used.iter().position(|u| !u) {
            return Err(MeshError::UnusedNode { node });
        }

        let mut seen: HashMap<[usize; 3], usize> = HashMap::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut key = *tri;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateTriangle { first, second: t });
            }
            seen.insert(key, t);
        }

        // Edge numbering follows first appearance in triangle order.
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len() / 2 + 8);
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut incidence: Vec<Vec<(usize, i8)>> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [TriEdge { edge: 0, sign: 1 }; 3];
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let (lo, hi, sign) = if a < b { (a, b, 1) } else { (b, a, -1) };
                let e = *edge_index.entry((lo, hi)).or_insert_with(|| {
                    edges.push([lo, hi]);
                    incidence.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                incidence[e].push((t, sign));
                local[k] = TriEdge { edge: e, sign };
            }
            tri_edges.push(local);
        }

        let mut boundary_edge = vec![false; edges.len()];
        let mut boundary_node = vec![false; n];
        for (e, inc) in incidence.iter().enumerate() {
            match inc.len() {
                1 => {
                    boundary_edge[e] = true;
                    boundary_node[edges[e][0]] = true;
                    boundary_node[edges[e][1]] = true;
                }
                2 => {
                    if inc[0].1 == inc[1].1 {
                        return Err(MeshError::NonConforming(format!(
                            "triangles {} and {} overlap along edge ({}, {})",
                            inc[0].0, inc[1].0, edges[e][0], edges[e][1]
                        )));
                    }
                }
                _ => {
                    return Err(MeshError::NonManifoldEdge {
                        lo: edges[e][0],
                        hi: edges[e][1],
                    })
                }
            }
        }

        check_hanging_nodes(&nodes, &edges, &boundary_edge)?;

        let (boundary_component, boundary_components) = label_boundary_components(n, &edges, &boundary_edge);

        let h = edges.iter().map(|[a, b]| nodes[*a].distance(&nodes[*b])).fold(0.0, f64::max);

        Ok(Mesh {
            nodes,
            triangles,
            edges,
            tri_edges,
            boundary_node,
            boundary_edge,
            boundary_component,
            boundary_components,
            h,
        })
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Edge endpoint pairs `[lo, hi]` with `lo < hi`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn tri_edges(&self) -> &[[TriEdge; 3]] {
        &self.tri_edges
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.boundary_node[node]
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.boundary_edge[edge]
    }

    pub fn boundary_node_flags(&self) -> &[bool] {
        &self.boundary_node
    }

    pub fn boundary_edge_flags(&self) -> &[bool] {
        &self.boundary_edge
    }

    /// Connected boundary component of an edge, `None` for interior edges.
    pub fn boundary_component(&self, edge: usize) -> Option<usize> {
        self.boundary_component[edge]
    }

    pub fn boundary_components(&self) -> usize {
        self.boundary_components
    }

    /// Longest edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_interior_nodes(&self) -> usize {
        self.boundary_node.iter().filter(|b| !**b).count()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.boundary_edge.iter().filter(|b| !**b).count()
    }

    /// `V - E + T`; equals `2 - B` for a valid triangulation with `B` boundary loops.
    pub fn euler_characteristic(&self) -> i64 {
        self.nodes.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * signed_area2(&self.nodes[a], &self.nodes[b], &self.nodes[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (&self.nodes[a], &self.nodes[b], &self.nodes[c]);
        Point2::new((p.x + q.x + r.x) / 3.0, (p.y + q.y + r.y) / 3.0)
    }

    /// Splits every triangle into four through its edge midpoints.
    ///
    /// Parent nodes keep their indices; midpoint nodes follow in edge order.
    pub fn refine_uniform(&self) -> Mesh {
        let n = self.nodes.len();
        let mut nodes = self.nodes.clone();
        nodes.extend(self.edges.iter().map(|[a, b]| self.nodes[*a].midpoint(&self.nodes[*b])));
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for (tri, te) in self.triangles.iter().zip(&self.tri_edges) {
            let m01 = n + te[0].edge;
            let m12 = n + te[1].edge;
            let m20 = n + te[2].edge;
            triangles.push([tri[0], m01, m20]);
            triangles.push([m01, tri[1], m12]);
            triangles.push([m20, m12, tri[2]]);
            triangles.push([m01, m12, m20]);
        }
        Mesh::build_topology(nodes, triangles).expect("midpoint refinement of a valid mesh is valid")
    }

    /// True when `child` is the uniform refinement of `self`.
    pub fn is_refined_by(&self, child: &Mesh) -> bool {
        child.triangles.len() == 4 * self.triangles.len()
            && child.nodes.len() == self.nodes.len() + self.edges.len()
            && child.nodes[..self.nodes.len()] == self.nodes[..]
            && child.boundary_components == self.boundary_components
    }
}

/// Rejects T-junctions: a node lying strictly inside a single-sided edge.
fn check_hanging_nodes(nodes: &[Point2], edges: &[[usize; 2]], boundary_edge: &[bool]) -> Result<(), MeshError> {
    let candidates: Vec<usize> = (0..edges.len()).filter(|&e| boundary_edge[e]).collect();
    if candidates.is_empty() {
        return Ok(());
    }
    // Bucket nodes on a coarse grid so each edge only tests nearby nodes.
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in nodes {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let cells = ((nodes.len() as f64).sqrt().ceil() as usize).max(1);
    let wx = ((xmax - xmin) / cells as f64).max(f64::MIN_POSITIVE);
    let wy = ((ymax - ymin) / cells as f64).max(f64::MIN_POSITIVE);
    let cell_of = |v: f64, lo: f64, w: f64| (((v - lo) / w) as usize).min(cells - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells * cells];
    for (i, p) in nodes.iter().enumerate() {
        buckets[cell_of(p.y, ymin, wy) * cells + cell_of(p.x, xmin, wx)].push(i);
    }
    for e in candidates {
        let [a, b] = edges[e];
        let (pa, pb) = (nodes[a], nodes[b]);
        let len2 = (pb.x - pa.x).powi(2) + (pb.y - pa.y).powi(2);
        let (cx0, cx1) = (cell_of(pa.x.min(pb.x), xmin, wx), cell_of(pa.x.max(pb.x), xmin, wx));
        let (cy0, cy1) = (cell_of(pa.y.min(pb.y), ymin, wy), cell_of(pa.y.max(pb.y), ymin, wy));
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                for &v in &buckets[cy * cells + cx] {
                    if v == a || v == b {
                        continue;
                    }
                    let p = nodes[v];
                    let cross = signed_area2(&pa, &pb, &p);
                    if cross.abs() > 1e-10 * len2 {
                        continue;
                    }
                    let t = ((p.x - pa.x) * (pb.x - pa.x) + (p.y - pa.y) * (pb.y - pa.y)) / len2;
                    if t > 1e-10 && t < 1.0 - 1e-10 {
                        return Err(MeshError::NonConforming(format!(
                            "node {v} lies inside boundary edge ({a}, {b})"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn label_boundary_components(n: usize, edges: &[[usize; 2]], boundary_edge: &[bool]) -> (Vec<Option<usize>>, usize) {
    let mut parent: Vec<usize> = (0..n).collect();
    for (e, [a, b]) in edges.iter().enumerate() {
        if boundary_edge[e] {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut label: HashMap<usize, usize> = HashMap::new();
    let mut component = vec![None; edges.len()];
    for (e, [a, _]) in edges.iter().enumerate() {
        if boundary_edge[e] {
            let root = find(&mut parent, *a);
            let next = label.len();
            component[e] = Some(*label.entry(root).or_insert(next));
        }
    }
    let count = label.len();
    (component, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        let nodes = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        Mesh::build_topology(nodes, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn single_triangle_topology() {
        let nodes = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let m = Mesh::build_topology(nodes, vec![[0, 1, 2]]).unwrap();
        assert_eq!((m.num_nodes(), m.num_edges(), m.num_triangles()), (3, 3, 1));
        assert_eq!(m.boundary_components(), 1);
        assert_eq!(m.euler_characteristic(), 1);
        assert!((m.h() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unit_square_topology() {
        let m = unit_square();
        assert_eq!((m.num_nodes(), m.num_edges(), m.num_triangles()), (4, 5, 2));
        assert_eq!(m.num_interior_edges(), 1);
        assert_eq!(m.boundary_components(), 1);
        for [lo, hi] in m.edges() {
            assert!(lo < hi);
        }
        // Opposite signs along the shared diagonal.
        let diag = m.edges().iter().position(|e| *e == [0, 2]).unwrap();
        let signs: Vec<i8> = m
            .tri_edges()
            .iter()
            .flat_map(|te| te.iter().filter(|x| x.edge == diag).map(|x| x.sign))
            .collect();
        assert_eq!(signs.len(), 2);
        assert_eq!(signs[0], -signs[1]);
    }

    #[test]
    fn rejects_bad_triangulations() {
        let nodes = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        assert!(matches!(
            Mesh::build_topology(nodes.clone(), vec![[0, 2, 1]]),
            Err(MeshError::Degenerate { .. })
        ));
        assert!(matches!(
            Mesh::build_topology(nodes.clone(), vec![[0, 1, 3]]),
            Err(MeshError::IndexOutOfRange { node: 3, .. })
        ));
        let collinear = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        assert!(matches!(
            Mesh::build_topology(collinear, vec![[0, 1, 2]]),
            Err(MeshError::Degenerate { .. })
        ));
        assert!(matches!(
            Mesh::build_topology(nodes.clone(), vec![[0, 1, 2], [1, 2, 0]]),
            Err(MeshError::DuplicateTriangle { .. })
        ));
    }

    #[test]
    fn rejects_non_manifold_and_hanging_nodes() {
        // Three triangles sharing the edge (0, 1).
        let nodes = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.5, -1.0),
            Point2::new(0.5, 2.0),
        ];
        let r = Mesh::build_topology(nodes, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]);
        assert!(matches!(
            r,
            Err(MeshError::NonManifoldEdge { .. }) | Err(MeshError::NonConforming(_))
        ));

        // Square split in two on the left, in one on the right: T-junction at (1, 0.5).
        let nodes = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.5),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
        ];
        let tris = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [1, 5, 6], [1, 6, 3]];
        assert!(matches!(Mesh::build_topology(nodes, tris), Err(MeshError::NonConforming(_))));
    }

    #[test]
    fn refine_square() {
        let m = unit_square();
        let r = m.refine_uniform();
        assert_eq!(r.num_triangles(), 8);
        assert_eq!(r.num_nodes(), 9);
        assert!((r.total_area() - m.total_area()).abs() <= 1e-12 * m.total_area());
        assert!((r.h() - 0.5 * m.h()).abs() < 1e-15);
        assert_eq!(r.boundary_components(), 1);
        assert!(m.is_refined_by(&r));
    }

    #[test]
    fn refinement_children_nest_in_parent() {
        let m = generate_annulus(1.0, 2.0, 2, 8).unwrap();
        let r = m.refine_uniform();
        for (t, tri) in m.triangles().iter().enumerate() {
            let [a, b, c] = tri.map(|i| m.nodes()[i]);
            let area2 = signed_area2(&a, &b, &c);
            for child in &r.triangles()[4 * t..4 * t + 4] {
                for &v in child {
                    let p = r.nodes()[v];
                    let l = [
                        signed_area2(&b, &c, &p) / area2,
                        signed_area2(&c, &a, &p) / area2,
                        signed_area2(&a, &b, &p) / area2,
                    ];
                    assert!(l.iter().all(|x| *x >= -1e-12));
                }
            }
        }
    }
}
