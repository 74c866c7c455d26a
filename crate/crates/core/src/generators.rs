//! Deterministic surface meshes and graphs used as test spaces.

use crate::error::{invalid, Result};
use crate::geometry::{build_graph_space, build_mesh_space, DiscreteSpace, GraphSpec, MeshSurface, Metric};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Output of a generator.
#[derive(Clone, Debug)]
pub enum Generated {
    Mesh(MeshSurface),
    Graph(GraphSpec),
}

impl Generated {
    pub fn into_space(self) -> Result<DiscreteSpace> {
        match self {
            Generated::Mesh(m) => build_mesh_space(&m),
            Generated::Graph(g) => build_graph_space(&g),
        }
    }
}

pub const GENERATORS: [&str; 7] = [
    "flat_torus(a,b,N)",
    "icosphere(R,level)",
    "ellipsoid(a,b,c,level)",
    "dumbbell(neck_radius,level)",
    "cone_graph(angle,N)",
    "cycle(N[,length])",
    "path(N[,spacing])",
];

/// Flat torus `[0,a) × [0,b)` on an `N × N` grid, each cell split along one diagonal.
pub fn flat_torus(a: f64, b: f64, n: usize) -> Result<MeshSurface> {
    if n < 3 || !(a > 0.0) || !(b > 0.0) {
        return invalid("flat_torus needs a, b > 0 and N ≥ 3");
    }
    let idx = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut positions = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            positions.push([a * i as f64 / n as f64, b * j as f64 / n as f64, 0.0]);
        }
    }
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    Ok(MeshSurface::periodic(positions, faces, [a, b]))
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let p = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (p, f)
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / l, p[1] / l, p[2] / l]
}

/// Unit-sphere triangulation by repeated midpoint subdivision of the icosahedron.
fn unit_icosphere(level: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let (p, mut faces) = icosahedron();
    let mut pos: Vec<[f64; 3]> = p.into_iter().map(normalize).collect();
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, pos: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (pa, pb) = (pos[a], pos[b]);
                pos.push(normalize([pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]]));
                pos.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut pos);
            let bc = midpoint(b, c, &mut pos);
            let ca = midpoint(c, a, &mut pos);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (pos, faces)
}

/// Sphere of radius `r`; level `l` has `10·4^l + 2` vertices.
pub fn icosphere(r: f64, level: usize) -> Result<MeshSurface> {
    if !(r > 0.0) || level > 8 {
        return invalid("icosphere needs R > 0 and level ≤ 8");
    }
    let (p, f) = unit_icosphere(level);
    Ok(MeshSurface::new(p.into_iter().map(|q| [r * q[0], r * q[1], r * q[2]]).collect(), f))
}

/// Icosphere scaled by the semi-axes `(a, b, c)`.
pub fn ellipsoid(a: f64, b: f64, c: f64, level: usize) -> Result<MeshSurface> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) || level > 8 {
        return invalid("ellipsoid needs positive semi-axes and level ≤ 8");
    }
    let (p, f) = unit_icosphere(level);
    Ok(MeshSurface::new(p.into_iter().map(|q| [a * q[0], b * q[1], c * q[2]]).collect(), f))
}

/// Two unit-ish lobes joined by a neck: the unit sphere stretched to length 4
/// along z with its cross-sections pinched to radius `neck_radius` at z = 0.
pub fn dumbbell(neck_radius: f64, level: usize) -> Result<MeshSurface> {
    if !(neck_radius > 0.0 && neck_radius <= 1.0) || level > 8 {
        return invalid("dumbbell needs 0 < neck_radius ≤ 1 and level ≤ 8");
    }
    let (p, f) = unit_icosphere(level);
    let width = 0.35;
    let pos = p
        .into_iter()
        .map(|q| {
            let g = 1.0 - (1.0 - neck_radius) * (-(q[2] / width).powi(2)).exp();
            [q[0] * g, q[1] * g, 2.0 * q[2]]
        })
        .collect();
    Ok(MeshSurface::new(pos, f))
}

/// Flat cone of total angle `angle` and slant radius 1, as a polar-grid graph:
/// apex (vertex 0) plus `N` rings at radii `k/N`, ring `k` holding
/// `max(3, round(angle·k))` vertices. Measures are polar cell areas,
/// conductances follow the finite-volume two-point flux, distances are exact
/// cone distances.
pub fn cone_graph(angle: f64, n: usize) -> Result<GraphSpec> {
    if !(angle > 0.0 && angle <= 2.0 * PI + 1e-12) || n < 2 {
        return invalid("cone_graph needs 0 < angle ≤ 2π and N ≥ 2");
    }
    let h = 1.0 / n as f64;
    let counts: Vec<usize> = (0..=n).map(|k| if k == 0 { 1 } else { ((angle * k as f64).round() as usize).max(3) }).collect();
    let mut first = vec![0usize; n + 2];
    for k in 0..=n {
        first[k + 1] = first[k] + counts[k];
    }
    let total = first[n + 1];
    let mut radius = vec![0.0; total];
    let mut theta = vec![0.0; total];
    let mut measures = vec![0.0; total];
    measures[0] = angle / 2.0 * (h / 2.0).powi(2);
    for k in 1..=n {
        let m = counts[k];
        let stagger = if k % 2 == 1 { 0.5 } else { 0.0 };
        for j in 0..m {
            let v = first[k] + j;
            radius[v] = k as f64 * h;
            theta[v] = (j as f64 + stagger) * angle / m as f64;
            measures[v] = angle * k as f64 * h * h / m as f64;
        }
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let m1 = counts[1];
    for j in 0..m1 {
        edges.push((0, first[1] + j, angle / (2.0 * m1 as f64)));
    }
    for k in 1..=n {
        let m = counts[k];
        let arc = angle / m as f64;
        for j in 0..m {
            let (a, b) = (first[k] + j, first[k] + (j + 1) % m);
            edges.push((a.min(b), a.max(b), 1.0 / (arc * k as f64)));
        }
        if k < n {
            let m2 = counts[k + 1];
            let arc2 = angle / m2 as f64;
            for j in 0..m {
                let (lo, hi) = (theta[first[k] + j] - arc / 2.0, theta[first[k] + j] + arc / 2.0);
                for i in 0..m2 {
                    let c = theta[first[k + 1] + i];
                    // overlap of angular cells on the circle of length `angle`
                    let mut ov = 0.0;
                    for shift in [-angle, 0.0, angle] {
                        let (l2, h2) = (c - arc2 / 2.0 + shift, c + arc2 / 2.0 + shift);
                        ov += (hi.min(h2) - lo.max(l2)).max(0.0);
                    }
                    if ov > 1e-14 {
                        edges.push((first[k] + j, first[k + 1] + i, ov * (k as f64 + 0.5)));
                    }
                }
            }
        }
    }
    let edges = edges
        .into_iter()
        .map(|(i, j, c)| {
            let l = crate::geometry::metric_cone_distance(radius[i], theta[i], radius[j], theta[j], angle);
            (i, j, c, Some(l))
        })
        .collect();
    Ok(GraphSpec {
        dim: 2,
        measures,
        edges,
        metric: Some(Metric::Cone { radius, angle: theta, total: angle }),
        labels: None,
        origin: Some(0),
    })
}

/// Cycle of `N` vertices approximating a circle of the given circumference
/// (default 2π): spacing `h`, conductances `1/h`, measures `h`, `n = 1`.
pub fn cycle(n: usize, length: Option<f64>) -> Result<GraphSpec> {
    let l = length.unwrap_or(2.0 * PI);
    if n < 3 || !(l > 0.0) {
        return invalid("cycle needs N ≥ 3 and positive length");
    }
    let h = l / n as f64;
    Ok(GraphSpec {
        dim: 1,
        measures: vec![h; n],
        edges: (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n), 1.0 / h, Some(h))).collect(),
        ..Default::default()
    })
}

/// Path of `N` vertices with the given spacing (default 1): conductances
/// `1/h`, measures `h` inside and `h/2` at the ends, `n = 1`.
pub fn path(n: usize, spacing: Option<f64>) -> Result<GraphSpec> {
    let h = spacing.unwrap_or(1.0);
    if n < 2 || !(h > 0.0) {
        return invalid("path needs N ≥ 2 and positive spacing");
    }
    let mut measures = vec![h; n];
    measures[0] = h / 2.0;
    measures[n - 1] = h / 2.0;
    Ok(GraphSpec { dim: 1, measures, edges: (0..n - 1).map(|i| (i, i + 1, 1.0 / h, Some(h))).collect(), ..Default::default() })
}

/// Parses `name(p1, p2, ...)` or `name(key=value, ...)` and runs the generator.
pub fn generate(spec: &str) -> Result<Generated> {
    let spec = spec.trim();
    let (name, args) = match spec.find('(') {
        Some(i) if spec.ends_with(')') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
        None => (spec, ""),
        _ => return invalid(format!("malformed generator spec `{spec}`")),
    };
    let name = name.trim();
    let keys: &[&str] = match name {
        "flat_torus" => &["a", "b", "N"],
        "icosphere" => &["R", "level"],
        "ellipsoid" => &["a", "b", "c", "level"],
        "dumbbell" => &["neck_radius", "level"],
        "cone_graph" => &["angle", "N"],
        "cycle" => &["N", "length"],
        "path" => &["N", "spacing"],
        _ => return invalid(format!("unknown generator `{name}`; available: {}", GENERATORS.join(", "))),
    };
    let mut vals: Vec<Option<f64>> = vec![None; keys.len()];
    for (pos, tok) in args.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
        let (slot, raw) = match tok.split_once('=') {
            Some((k, v)) => match keys.iter().position(|x| *x == k.trim()) {
                Some(s) => (s, v.trim()),
                None => return invalid(format!("generator `{name}` has no parameter `{}`", k.trim())),
            },
            None => (pos, tok),
        };
        if slot >= keys.len() {
            return invalid(format!("too many parameters for `{name}`"));
        }
        vals[slot] = Some(parse_number(raw)?);
    }
    let need = |k: usize| -> Result<f64> {
        vals[k].ok_or_else(|| crate::error::Error::InvalidArgument(format!("generator `{name}` is missing `{}`", keys[k])))
    };
    let int = |k: usize| -> Result<usize> {
        let v = need(k)?;
        if v < 0.0 || v.fract() != 0.0 {
            return invalid(format!("`{}` must be a nonnegative integer", keys[k]));
        }
        Ok(v as usize)
    };
    Ok(match name {
        "flat_torus" => Generated::Mesh(flat_torus(need(0)?, need(1)?, int(2)?)?),
        "icosphere" => Generated::Mesh(icosphere(need(0)?, int(1)?)?),
        "ellipsoid" => Generated::Mesh(ellipsoid(need(0)?, need(1)?, need(2)?, int(3)?)?),
        "dumbbell" => Generated::Mesh(dumbbell(need(0)?, int(1)?)?),
        "cone_graph" => Generated::Graph(cone_graph(need(0)?, int(1)?)?),
        "cycle" => Generated::Graph(cycle(int(0)?, vals[1])?),
        _ => Generated::Graph(path(int(0)?, vals[1])?),
    })
}

/// Numbers with an optional `pi` factor, e.g. `1.5pi`, `pi`, `2*pi`.
fn parse_number(raw: &str) -> Result<f64> {
    let s = raw.trim().to_ascii_lowercase();
    if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let f = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad(raw))? };
        return Ok(f * PI);
    }
    s.parse::<f64>().map_err(|_| bad(raw))
}

fn bad(raw: &str) -> crate::error::Error {
    crate::error::Error::InvalidArgument(format!("cannot parse number `{raw}`"))
}
