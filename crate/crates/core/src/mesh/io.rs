use std::fmt::Write as _;

use super::{Mesh, MeshError, Point2};

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a `keyword <count>` line.
fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, keyword: &str) -> Result<usize, MeshError> {
    let (ln, l) = lines
        .next()
        .ok_or_else(|| parse_err(0, format!("missing `{keyword}` header")))?;
    let mut it = l.split_whitespace();
    if it.next() != Some(keyword) {
        return Err(parse_err(ln, format!("expected `{keyword} <count>`")));
    }
    let count = it
        .next()
        .and_then(|c| c.parse::<usize>().ok())
        .ok_or_else(|| parse_err(ln, format!("invalid `{keyword}` count")))?;
    if it.next().is_some() {
        return Err(parse_err(ln, "trailing tokens after count"));
    }
    Ok(count)
}

/// Parses the line-oriented text format (`nodes V`, V coordinate lines,
/// `triangles T`, T index lines; `#` comments).
pub fn import_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let nv = header(&mut lines, "nodes")?;
    let mut nodes = Vec::with_capacity(nv);
    for k in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {nv} node lines, found {k}")))?;
        let vals: Vec<&str> = l.split_whitespace().collect();
        if vals.len() != 2 {
            return Err(parse_err(ln, "node line needs exactly 2 coordinates"));
        }
        let x: f64 = vals[0].parse().map_err(|_| parse_err(ln, "invalid x coordinate"))?;
        let y: f64 = vals[1].parse().map_err(|_| parse_err(ln, "invalid y coordinate"))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(parse_err(ln, "non-finite coordinate"));
        }
        nodes.push(Point2::new(x, y));
    }

    let nt = header(&mut lines, "triangles")?;

    let mut tris = Vec::with_capacity(nt);
    for k in 0..nt {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {nt} triangle lines, found {k}")))?;
        let vals: Vec<&str> = l.split_whitespace().collect();
        if vals.len() != 3 {
            return Err(parse_err(ln, "triangle line needs exactly 3 node indices"));
        }
        let mut t = [0usize; 3];
        for (slot, v) in t.iter_mut().zip(&vals) {
            *slot = v.parse().map_err(|_| parse_err(ln, format!("invalid node index `{v}`")))?;
            if *slot >= nv {
                return Err(parse_err(ln, format!("node index {slot} out of range (nodes {nv})")));
            }
        }
        tris.push(t);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "unexpected content after the triangle list"));
    }
    Mesh::build_topology(nodes, tris)
}

/// Writes the text format; coordinates keep 17 significant digits so that
/// parsing the output reproduces them bit for bit.
pub fn export_mesh(mesh: &Mesh) -> String {
    let mut s = String::with_capacity(48 * mesh.num_nodes() + 24 * mesh.num_triangles());
    let _ = writeln!(s, "nodes {}", mesh.num_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:.16e} {:.16e}", p.x, p.y);
    }
    let _ = writeln!(s, "triangles {}", mesh.num_triangles());
    for [a, b, c] in mesh.triangles() {
        let _ = writeln!(s, "{a} {b} {c}");
    }
    s
}
