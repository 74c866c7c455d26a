use super::mesh::MeshSurface;
use super::space::{all_pairs, DiscreteSpace, Edge, GraphSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).filter(|(_, l)| !l.is_empty())
}

/// Reads an OFF file (triangles only).
pub fn read_off(text: &str) -> Result<MeshSurface> {
    let mut lines = content_lines(text);
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty OFF file"))?;
    let mut counts_line = head.strip_prefix("OFF").ok_or_else(|| perr(ln, "missing OFF header"))?.trim().to_string();
    let mut cl = ln;
    if counts_line.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| perr(ln, "missing counts"))?;
        counts_line = c.to_string();
        cl = l;
    }
    let counts: Vec<usize> = counts_line.split_whitespace().map(|t| t.parse().map_err(|_| perr(cl, "bad count"))).collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(perr(cl, "expected vertex and face counts"));
    }
    let mut positions = Vec::with_capacity(counts[0]);
    for _ in 0..counts[0] {
        let (l, s) = lines.next().ok_or_else(|| perr(cl, "truncated vertex list"))?;
        let v: Vec<f64> = s.split_whitespace().take(3).map(|t| t.parse().map_err(|_| perr(l, "bad coordinate"))).collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(perr(l, "vertex needs three coordinates"));
        }
        positions.push([v[0], v[1], v[2]]);
    }
    let mut faces = Vec::with_capacity(counts[1]);
    for _ in 0..counts[1] {
        let (l, s) = lines.next().ok_or_else(|| perr(cl, "truncated face list"))?;
        let v: Vec<usize> = s.split_whitespace().map(|t| t.parse().map_err(|_| perr(l, "bad face index"))).collect::<Result<_>>()?;
        if v.first() != Some(&3) || v.len() < 4 {
            return Err(perr(l, "only triangles are supported"));
        }
        faces.push([v[1], v[2], v[3]]);
    }
    Ok(MeshSurface::new(positions, faces))
}

/// Reads positions and triangular faces of an OBJ file; other records are ignored.
pub fn read_obj(text: &str) -> Result<MeshSurface> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (l, s) in content_lines(text) {
        let mut it = s.split_whitespace();
        match it.next() {
            Some("v") => {
                let v: Vec<f64> = it.take(3).map(|t| t.parse().map_err(|_| perr(l, "bad coordinate"))).collect::<Result<_>>()?;
                if v.len() != 3 {
                    return Err(perr(l, "vertex needs three coordinates"));
                }
                positions.push([v[0], v[1], v[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|t| {
                        let raw: i64 = t.split('/').next().unwrap_or("").parse().map_err(|_| perr(l, "bad face index"))?;
                        let k = if raw < 0 { positions.len() as i64 + raw } else { raw - 1 };
                        if k < 0 {
                            return Err(perr(l, "face index out of range"));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(perr(l, "only triangles are supported"));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok(MeshSurface::new(positions, faces))
}

pub fn write_off(mesh: &MeshSurface) -> String {
    let mut s = format!("OFF\n{} {} 0\n", mesh.positions.len(), mesh.faces.len());
    for p in &mesh.positions {
        s.push_str(&format!("{:?} {:?} {:?}\n", p[0], p[1], p[2]));
    }
    for f in &mesh.faces {
        s.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    s
}

/// Reads the text graph format: `graph n=<dim>`, `v <id> <mu>`, `e <i> <j> <c> [length]`.
/// Vertex ids must be `0..count` in any order.
pub fn read_graph(text: &str) -> Result<GraphSpec> {
    let mut lines = content_lines(text);
    let (hl, head) = lines.next().ok_or_else(|| perr(1, "empty graph file"))?;
    let dim = head
        .strip_prefix("graph")
        .and_then(|r| r.trim().strip_prefix("n="))
        .and_then(|r| r.trim().parse::<usize>().ok())
        .ok_or_else(|| perr(hl, "expected header `graph n=<int>`"))?;
    let mut mu: Vec<Option<f64>> = Vec::new();
    let mut edges = Vec::new();
    for (l, s) in lines {
        let t: Vec<&str> = s.split_whitespace().collect();
        match t.first().copied() {
            Some("v") if t.len() == 3 => {
                let id: usize = t[1].parse().map_err(|_| perr(l, "bad vertex id"))?;
                let m: f64 = t[2].parse().map_err(|_| perr(l, "bad measure"))?;
                if id >= mu.len() {
                    mu.resize(id + 1, None);
                }
                if mu[id].replace(m).is_some() {
                    return Err(perr(l, format!("vertex {id} declared twice")));
                }
            }
            Some("e") if t.len() == 4 || t.len() == 5 => {
                let i: usize = t[1].parse().map_err(|_| perr(l, "bad edge endpoint"))?;
                let j: usize = t[2].parse().map_err(|_| perr(l, "bad edge endpoint"))?;
                let c: f64 = t[3].parse().map_err(|_| perr(l, "bad conductance"))?;
                let len = match t.get(4) {
                    Some(x) => Some(x.parse::<f64>().map_err(|_| perr(l, "bad length"))?),
                    None => None,
                };
                edges.push((i, j, c, len));
            }
            _ => return Err(perr(l, format!("unrecognized record `{s}`"))),
        }
    }
    let measures = mu
        .iter()
        .enumerate()
        .map(|(i, m)| m.ok_or_else(|| perr(0, format!("vertex {i} missing"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(GraphSpec { dim, measures, edges, ..Default::default() })
}

pub fn write_graph(spec: &GraphSpec) -> String {
    let mut s = format!("graph n={}\n", spec.dim);
    for (i, m) in spec.measures.iter().enumerate() {
        s.push_str(&format!("v {i} {m:?}\n"));
    }
    for &(i, j, c, len) in &spec.edges {
        match len {
            Some(l) => s.push_str(&format!("e {i} {j} {c:?} {l:?}\n")),
            None => s.push_str(&format!("e {i} {j} {c:?}\n")),
        }
    }
    s
}

/// JSON export of a space.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceExport {
    pub n: usize,
    pub mu: Vec<f64>,
    pub edges: Vec<Edge>,
    pub stiffness_triplets: Vec<(usize, usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distances: Option<Vec<Vec<f64>>>,
}

pub fn export_space(space: &DiscreteSpace, with_distances: bool) -> SpaceExport {
    let nv = space.vertex_count();
    SpaceExport {
        n: space.dim(),
        mu: space.measure().to_vec(),
        edges: space.edges().to_vec(),
        stiffness_triplets: space.stiffness().triplets(),
        distances: with_distances.then(|| all_pairs(space).chunks(nv).map(|c| c.to_vec()).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_roundtrip() {
        let m = crate::generators::icosphere(1.0, 1).unwrap();
        let back = read_off(&write_off(&m)).unwrap();
        assert_eq!(back.faces, m.faces);
        assert_eq!(back.positions, m.positions);
    }

    #[test]
    fn obj_ignores_other_records() {
        let text = "# tri\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n";
        let m = read_obj(text).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn graph_roundtrip_and_errors() {
        let text = "graph n=1\nv 0 1.0\nv 1 2.0\ne 0 1 1.5 0.25\n";
        let g = read_graph(text).unwrap();
        assert_eq!(g.dim, 1);
        assert_eq!(g.edges, vec![(0, 1, 1.5, Some(0.25))]);
        assert_eq!(read_graph(&write_graph(&g)).unwrap(), g);
        match read_graph("graph n=1\nv 0 1\nx 1\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
