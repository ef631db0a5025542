use std::f64::consts::TAU;

use super::{Mesh, MeshError, Point2};

fn check_len(name: &str, v: f64) -> Result<(), MeshError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MeshError::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Appends the two triangles of a structured cell, split lower-left to upper-right.
fn push_cell(tris: &mut Vec<[usize; 3]>, n00: usize, n10: usize, n11: usize, n01: usize) {
    tris.push([n00, n10, n11]);
    tris.push([n00, n11, n01]);
}

/// Structured `[0, a] × [0, b]` grid with `nx × ny` cells.
pub fn generate_rectangle(a: f64, b: f64, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
    check_len("a", a)?;
    check_len("b", b)?;
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidInput("nx and ny must be at least 1".into()));
    }
    let xs: Vec<f64> = (0..=nx).map(|i| a * i as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| b * j as f64 / ny as f64).collect();
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for y in &ys {
        for x in &xs {
            nodes.push(Point2::new(*x, *y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            push_cell(&mut tris, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
    }
    Mesh::build_topology(nodes, tris)
}

/// Polar structured mesh of the annulus `r_inner ≤ r ≤ r_outer`.
///
/// `r_inner = 0` produces a disc with a single center node and a triangle fan.
/// Radius plays the role of `x` and angle the role of `y` for the diagonal convention.
pub fn generate_annulus(r_inner: f64, r_outer: f64, n_r: usize, n_theta: usize) -> Result<Mesh, MeshError> {
    check_len("r_outer", r_outer)?;
    if !(r_inner.is_finite() && r_inner >= 0.0 && r_inner < r_outer) {
        return Err(MeshError::InvalidInput(format!(
            "need 0 <= r_inner < r_outer, got {r_inner} and {r_outer}"
        )));
    }
    if n_theta < 3 {
        return Err(MeshError::InvalidInput(format!("n_theta must be at least 3, got {n_theta}")));
    }
    if n_r == 0 {
        return Err(MeshError::InvalidInput("n_r must be at least 1".into()));
    }
    let ring = |r: f64| {
        (0..n_theta).map(move |j| {
            let t = TAU * j as f64 / n_theta as f64;
            Point2::new(r * t.cos(), r * t.sin())
        })
    };
    let dr = (r_outer - r_inner) / n_r as f64;
    let radius = |i: usize| if i == n_r { r_outer } else { r_inner + dr * i as f64 };
    let mut nodes = Vec::new();
    let mut tris = Vec::new();
    if r_inner == 0.0 {
        nodes.push(Point2::new(0.0, 0.0));
        for i in 1..=n_r {
            nodes.extend(ring(radius(i)));
        }
        let id = |i: usize, j: usize| 1 + (i - 1) * n_theta + j % n_theta;
        for j in 0..n_theta {
            tris.push([0, id(1, j), id(1, j + 1)]);
        }
        for i in 1..n_r {
            for j in 0..n_theta {
                push_cell(&mut tris, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            }
        }
    } else {
        for i in 0..=n_r {
            nodes.extend(ring(radius(i)));
        }
        let id = |i: usize, j: usize| i * n_theta + j % n_theta;
        for i in 0..n_r {
            for j in 0..n_theta {
                push_cell(&mut tris, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            }
        }
    }
    Mesh::build_topology(nodes, tris)
}

/// Mesh of a simple counter-clockwise axis-aligned polygon.
pub fn generate_rectilinear_polygon(vertices: &[Point2], h_target: f64) -> Result<Mesh, MeshError> {
    generate_rectilinear_region(vertices, &[], h_target)
}

/// Mesh of a rectilinear polygon with rectilinear holes.
///
/// The grid lines pass through every vertex coordinate; each interval between
/// consecutive coordinates is split evenly into pieces no longer than `h_target`.
/// A cell is kept when it lies inside `outer` and outside every hole.
pub fn generate_rectilinear_region(outer: &[Point2], holes: &[Vec<Point2>], h_target: f64) -> Result<Mesh, MeshError> {
    check_len("h_target", h_target)?;
    check_loop(outer, "outer boundary")?;
    if loop_area2(outer) <= 0.0 {
        return Err(MeshError::InvalidInput("outer boundary must be counter-clockwise".into()));
    }
    for (k, hole) in holes.iter().enumerate() {
        check_loop(hole, &format!("hole {k}"))?;
        if !hole.iter().all(|p| strictly_inside(outer, p)) {
            return Err(MeshError::InvalidInput(format!(
                "hole {k} is not strictly inside the outer boundary"
            )));
        }
    }
    let loops: Vec<&[Point2]> = std::iter::once(outer).chain(holes.iter().map(|h| h.as_slice())).collect();
    for i in 0..loops.len() {
        for j in i + 1..loops.len() {
            if loops_intersect(loops[i], loops[j]) {
                return Err(MeshError::InvalidInput(format!("boundary loops {i} and {j} intersect")));
            }
        }
    }

    let axis = |coord: fn(&Point2) -> f64| {
        let mut v: Vec<f64> = loops.iter().flat_map(|l| l.iter().map(coord)).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        let mut out = vec![v[0]];
        for w in v.windows(2) {
            let pieces = ((w[1] - w[0]) / h_target * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            for p in 1..pieces {
                out.push(w[0] + (w[1] - w[0]) * p as f64 / pieces as f64);
            }
            out.push(w[1]);
        }
        out
    };
    let xs = axis(|p| p.x);
    let ys = axis(|p| p.y);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);

    let mut keep = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = Point2::new(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
            keep[j * nx + i] = strictly_inside(outer, &c) && holes.iter().all(|h| !strictly_inside(h, &c));
        }
    }
    let mut used = vec![false; (nx + 1) * (ny + 1)];
    let gid = |i: usize, j: usize| j * (nx + 1) + i;
    for j in 0..ny {
        for i in 0..nx {
            if keep[j * nx + i] {
                for (a, b) in [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)] {
                    used[gid(a, b)] = true;
                }
            }
        }
    }
    let mut index = vec![usize::MAX; used.len()];
    let mut nodes = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if used[gid(i, j)] {
                index[gid(i, j)] = nodes.len();
                nodes.push(Point2::new(xs[i], ys[j]));
            }
        }
    }
    let id = |i: usize, j: usize| index[gid(i, j)];
    let mut tris = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if keep[j * nx + i] {
                push_cell(&mut tris, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            }
        }
    }
    Mesh::build_topology(nodes, tris)
}

fn loop_area2(l: &[Point2]) -> f64 {
    (0..l.len())
        .map(|i| {
            let (p, q) = (l[i], l[(i + 1) % l.len()]);
            p.x * q.y - q.x * p.y
        })
        .sum()
}

fn check_loop(l: &[Point2], name: &str) -> Result<(), MeshError> {
    if l.len() < 4 {
        return Err(MeshError::InvalidInput(format!("{name} needs at least 4 vertices")));
    }
    for (i, p) in l.iter().enumerate() {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(MeshError::InvalidInput(format!("{name}: vertex {i} is not finite")));
        }
        let q = l[(i + 1) % l.len()];
        let horizontal = p.y == q.y && p.x != q.x;
        let vertical = p.x == q.x && p.y != q.y;
        if !horizontal && !vertical {
            return Err(MeshError::InvalidInput(format!(
                "{name}: side {i} is not a nonzero axis-aligned segment"
            )));
        }
    }
    let n = l.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (a, b) = (l[i], l[(i + 1) % n]);
            let (c, d) = (l[j], l[(j + 1) % n]);
            if adjacent {
                // Adjacent sides may only share their common vertex.
                if collinear_overlap(a, b, c, d) {
                    return Err(MeshError::InvalidInput(format!("{name}: sides {i} and {j} fold back")));
                }
            } else if segments_touch(a, b, c, d) {
                return Err(MeshError::InvalidInput(format!(
                    "{name} self-intersects at sides {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

fn loops_intersect(l1: &[Point2], l2: &[Point2]) -> bool {
    (0..l1.len()).any(|i| (0..l2.len()).any(|j| segments_touch(l1[i], l1[(i + 1) % l1.len()], l2[j], l2[(j + 1) % l2.len()])))
}

/// Closed axis-aligned segments `ab` and `cd` share at least one point.
fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let (ax0, ax1) = (a.x.min(b.x), a.x.max(b.x));
    let (ay0, ay1) = (a.y.min(b.y), a.y.max(b.y));
    let (cx0, cx1) = (c.x.min(d.x), c.x.max(d.x));
    let (cy0, cy1) = (c.y.min(d.y), c.y.max(d.y));
    ax0 <= cx1 && cx0 <= ax1 && ay0 <= cy1 && cy0 <= ay1
}

/// Collinear segments overlapping in more than one point.
fn collinear_overlap(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    if a.y == b.y && c.y == d.y && a.y == c.y {
        let lo = a.x.min(b.x).max(c.x.min(d.x));
        let hi = a.x.max(b.x).min(c.x.max(d.x));
        hi > lo
    } else if a.x == b.x && c.x == d.x && a.x == c.x {
        let lo = a.y.min(b.y).max(c.y.min(d.y));
        let hi = a.y.max(b.y).min(c.y.max(d.y));
        hi > lo
    } else {
        false
    }
}

/// Even-odd test; points exactly on the boundary count as outside.
fn strictly_inside(l: &[Point2], p: &Point2) -> bool {
    let n = l.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (l[i], l[(i + 1) % n]);
        if segments_touch(a, b, *p, *p) {
            return false;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn rectangle_counts() {
        let m = generate_rectangle(1.0, 1.0, 1, 1).unwrap();
        assert_eq!((m.num_nodes(), m.num_triangles(), m.num_edges()), (4, 2, 5));
        let m = generate_rectangle(1.2e-3, 1.0e-3, 12, 10).unwrap();
        assert_eq!((m.num_nodes(), m.num_triangles(), m.num_edges()), (143, 240, 382));
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.boundary_components(), 1);
    }

    #[test]
    fn rectangle_diagonal_convention() {
        let m = generate_rectangle(1.0, 1.0, 1, 1).unwrap();
        assert!(m.edges().contains(&[0, 3]));
        assert!(!m.edges().contains(&[1, 2]));
    }

    #[test]
    fn annulus_and_disc_counts() {
        let a = generate_annulus(1e-3, 2e-3, 4, 32).unwrap();
        assert_eq!(a.boundary_components(), 2);
        assert_eq!(a.num_nodes(), 5 * 32);
        assert_eq!(a.euler_characteristic(), 0);
        let d = generate_annulus(0.0, 2e-3, 4, 32).unwrap();
        assert_eq!(d.boundary_components(), 1);
        assert_eq!(d.num_nodes(), 4 * 32 + 1);
        assert_eq!(d.euler_characteristic(), 1);
        assert!(generate_annulus(1e-3, 2e-3, 4, 2).is_err());
    }

    #[test]
    fn polygon_rectangle_matches_structured() {
        let v = pts(&[(0.0, 0.0), (1.2, 0.0), (1.2, 1.0), (0.0, 1.0)]);
        let p = generate_rectilinear_polygon(&v, 0.1).unwrap();
        let r = generate_rectangle(1.2, 1.0, 12, 10).unwrap();
        assert_eq!(p.num_nodes(), r.num_nodes());
        assert_eq!(p.num_triangles(), r.num_triangles());
        assert_eq!(p.triangles(), r.triangles());
    }

    #[test]
    fn l_shape() {
        let v = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]);
        let m = generate_rectilinear_polygon(&v, 1.0).unwrap();
        assert_eq!(m.num_triangles(), 6);
        assert_eq!(m.num_nodes(), 8);
        assert_eq!(m.euler_characteristic(), 1);
        assert!((m.total_area() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn region_with_holes() {
        let outer = pts(&[(0.0, 0.0), (5.0, 0.0), (5.0, 3.0), (0.0, 3.0)]);
        let holes = vec![
            pts(&[(1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.0, 2.0)]),
            pts(&[(3.0, 1.0), (4.0, 1.0), (4.0, 2.0), (3.0, 2.0)]),
        ];
        let m = generate_rectilinear_region(&outer, &holes, 0.5).unwrap();
        assert_eq!(m.boundary_components(), 3);
        assert_eq!(m.euler_characteristic(), -1);
        assert!((m.total_area() - 13.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_rejects_bad_input() {
        let diag = pts(&[(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.0, 0.5)]);
        assert!(generate_rectilinear_polygon(&diag, 0.1).is_err());
        let cw = pts(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]);
        assert!(generate_rectilinear_polygon(&cw, 0.1).is_err());
        // Bow tie made of axis-aligned sides.
        let cross = pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (1.0, 2.0), (1.0, -1.0), (0.0, -1.0)]);
        assert!(generate_rectilinear_polygon(&cross, 0.5).is_err());
    }
}
