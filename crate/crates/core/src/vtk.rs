//! Legacy ASCII VTK output of modal fields on the triangle mesh.

use std::fmt::Write;

use num_complex::Complex64;

use crate::mesh::Mesh;
use crate::modes::{FieldFrame, FieldKind, FieldSamples, ModeFields};

/// Unstructured grid with per-cell vectors and per-point scalars.
#[derive(Debug, Clone)]
pub struct VtkGrid<'a> {
    mesh: &'a Mesh,
    title: String,
    cell_vectors: Vec<(String, Vec<[f64; 2]>)>,
    point_scalars: Vec<(String, Vec<f64>)>,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

impl<'a> VtkGrid<'a> {
    pub fn new(mesh: &'a Mesh, title: &str) -> Self {
        Self {
            mesh,
            title: title.replace('\n', " "),
            cell_vectors: Vec::new(),
            point_scalars: Vec::new(),
        }
    }

    pub fn cell_vectors(&mut self, name: &str, v: Vec<[f64; 2]>) -> &mut Self {
        assert_eq!(v.len(), self.mesh.num_triangles(), "one vector per triangle");
        self.cell_vectors.push((sanitize(name), v));
        self
    }

    pub fn point_scalars(&mut self, name: &str, v: Vec<f64>) -> &mut Self {
        assert_eq!(v.len(), self.mesh.num_nodes(), "one scalar per node");
        self.point_scalars.push((sanitize(name), v));
        self
    }

    pub fn render(&self) -> String {
        let m = self.mesh;
        let mut s = String::new();
        s.push_str("# vtk DataFile Version 3.0\n");
        let _ = writeln!(s, "{}", if self.title.is_empty() { "wgmodes" } else { &self.title });
        s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
        let _ = writeln!(s, "POINTS {} double", m.num_nodes());
        for p in m.nodes() {
            let _ = writeln!(s, "{:.16e} {:.16e} 0", p.x, p.y);
        }
        let _ = writeln!(s, "CELLS {} {}", m.num_triangles(), 4 * m.num_triangles());
        for t in m.triangles() {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "CELL_TYPES {}", m.num_triangles());
        for _ in 0..m.num_triangles() {
            s.push_str("5\n");
        }
        if !self.cell_vectors.is_empty() {
            let _ = writeln!(s, "CELL_DATA {}", m.num_triangles());
            for (name, v) in &self.cell_vectors {
                let _ = writeln!(s, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(s, "{:.16e} {:.16e} 0", x[0], x[1]);
                }
            }
        }
        if !self.point_scalars.is_empty() {
            let _ = writeln!(s, "POINT_DATA {}", m.num_nodes());
            for (name, v) in &self.point_scalars {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(s, "{x:.16e}");
                }
            }
        }
        s
    }
}

fn split_vector(f: &FieldFrame) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    match &f.samples {
        FieldSamples::Vector(v) => (
            v.iter().map(|z| [z[0].re, z[1].re]).collect(),
            v.iter().map(|z| [z[0].im, z[1].im]).collect(),
        ),
        FieldSamples::Scalar(_) => panic!("expected a vector field"),
    }
}

fn split_scalar(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
}

/// Re/Im of `e_t` and `h_t` as cell vectors, Re/Im of the nodal field as point scalars.
pub fn mode_vtk(mesh: &Mesh, fields: &ModeFields, title: &str) -> String {
    let mut g = VtkGrid::new(mesh, title);
    for f in [&fields.e_t, &fields.h_t] {
        let (re, im) = split_vector(f);
        let name = f.label.name();
        g.cell_vectors(&format!("Re_{name}"), re);
        g.cell_vectors(&format!("Im_{name}"), im);
    }
    if fields.nodal.kind == FieldKind::NodalScalar {
        if let FieldSamples::Scalar(v) = &fields.nodal.samples {
            let (re, im) = split_scalar(v);
            let name = fields.nodal.label.name();
            g.point_scalars(&format!("Re_{name}"), re);
            g.point_scalars(&format!("Im_{name}"), im);
        }
    }
    g.render()
}
