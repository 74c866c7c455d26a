use super::mesh::{FaceGeometry, MeshSurface};
use super::metric::{ring_chord_edges, LengthGraph, Metric, MeshMetric};
use crate::error::{invalid, Error, Result};
use crate::linalg::CsrMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Mesh data retained by mesh-built spaces (gradients, incidence, normals).
#[derive(Clone, Debug)]
pub struct MeshData {
    pub surface: MeshSurface,
    pub faces: Vec<FaceGeometry>,
    pub vertex_faces: Vec<Vec<usize>>,
    pub adjacency: Vec<Vec<usize>>,
    pub vertex_normals: Vec<[f64; 3]>,
}

impl MeshData {
    fn new(surface: MeshSurface) -> Self {
        let n = surface.vertex_count();
        let faces: Vec<FaceGeometry> = (0..surface.faces.len()).map(|f| surface.face_geometry(f)).collect();
        let mut vertex_faces = vec![Vec::new(); n];
        let mut adjacency = vec![Vec::new(); n];
        let mut vertex_normals = vec![[0.0; 3]; n];
        for (f, t) in surface.faces.iter().enumerate() {
            for k in 0..3 {
                vertex_faces[t[k]].push(f);
                adjacency[t[k]].push(t[(k + 1) % 3]);
                adjacency[t[k]].push(t[(k + 2) % 3]);
                let g = &faces[f];
                for a in 0..3 {
                    vertex_normals[t[k]][a] += g.area * g.normal[a];
                }
            }
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        for nrm in vertex_normals.iter_mut() {
            let l = super::mesh::norm3(*nrm);
            *nrm = super::mesh::scale3(*nrm, 1.0 / l);
        }
        MeshData { surface, faces, vertex_faces, adjacency, vertex_normals }
    }

    fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.surface = self.surface.scaled(s);
        for g in out.faces.iter_mut() {
            g.area *= s * s;
            for k in 0..3 {
                g.grads[k] = super::mesh::scale3(g.grads[k], 1.0 / s);
            }
        }
        out
    }

    /// Gradient of the piecewise-linear interpolant of `u` on face `f`.
    pub fn face_gradient(&self, f: usize, u: &[f64]) -> [f64; 3] {
        let t = self.surface.faces[f];
        let g = &self.faces[f].grads;
        let mut out = [0.0; 3];
        for k in 0..3 {
            for a in 0..3 {
                out[a] += u[t[k]] * g[k][a];
            }
        }
        out
    }
}

/// An edge of the stiffness graph with its length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// Finite metric-measure space with a Dirichlet form `E(u) = uᵀWu`.
#[derive(Clone, Debug)]
pub struct DiscreteSpace {
    dim: usize,
    measure: Vec<f64>,
    stiffness: CsrMatrix,
    edges: Vec<Edge>,
    metric: Metric,
    mesh: Option<Arc<MeshData>>,
    pub labels: Option<Vec<String>>,
    pub origin: Option<usize>,
}

/// Input description of a weighted graph space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphSpec {
    pub dim: usize,
    pub measures: Vec<f64>,
    /// `(i, j, conductance, optional length)`.
    pub edges: Vec<(usize, usize, f64, Option<f64>)>,
    /// Explicit distances; when absent, shortest paths over edge lengths.
    pub metric: Option<Metric>,
    pub labels: Option<Vec<String>>,
    pub origin: Option<usize>,
}

fn components(n: usize, adj: impl Fn(usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        comp[s] = id;
        let mut members = vec![];
        while let Some(v) = stack.pop() {
            members.push(v);
            for w in adj(v) {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Builds a space from conductances and measures: `W_ii = Σ_j c_ij`, `W_ij = −c_ij`.
pub fn build_graph_space(spec: &GraphSpec) -> Result<DiscreteSpace> {
    let n = spec.measures.len();
    if n == 0 {
        return invalid("graph has no vertices");
    }
    if spec.dim == 0 {
        return invalid("dimension must be positive");
    }
    if let Some(i) = spec.measures.iter().position(|&m| !(m > 0.0) || !m.is_finite()) {
        return invalid(format!("measure of vertex {i} is not positive"));
    }
    let mut trip = Vec::with_capacity(4 * spec.edges.len());
    let mut edges = Vec::with_capacity(spec.edges.len());
    for &(i, j, c, len) in &spec.edges {
        if i >= n || j >= n {
            return Err(Error::UnknownVertex(i.max(j)));
        }
        if i == j {
            return invalid(format!("self loop at vertex {i}"));
        }
        if !(c >= 0.0) || !c.is_finite() {
            return invalid(format!("conductance of edge ({i}, {j}) must be nonnegative"));
        }
        if c == 0.0 {
            continue;
        }
        let length = len.unwrap_or(1.0 / c.sqrt());
        if !(length > 0.0) {
            return invalid(format!("length of edge ({i}, {j}) must be positive"));
        }
        trip.extend([(i, i, c), (j, j, c), (i, j, -c), (j, i, -c)]);
        edges.push(Edge { i: i.min(j), j: i.max(j), length });
    }
    let stiffness = CsrMatrix::from_triplets(n, &trip);
    let comps = components(n, |v| stiffness.row(v).0.iter().copied().filter(|&w| w != v).collect());
    if comps.len() > 1 {
        return Err(Error::Disconnected(comps));
    }
    let metric = match &spec.metric {
        Some(Metric::Dense(d)) => {
            if d.len() != n * n {
                return invalid("distance matrix has wrong size");
            }
            Metric::Dense(d.clone())
        }
        Some(m) => m.clone(),
        None => Metric::Graph(LengthGraph::from_edges(n, &edges.iter().map(|e| (e.i, e.j, e.length)).collect::<Vec<_>>())),
    };
    if let Some(o) = spec.origin {
        if o >= n {
            return Err(Error::UnknownVertex(o));
        }
    }
    Ok(DiscreteSpace {
        dim: spec.dim,
        measure: spec.measures.clone(),
        stiffness,
        edges,
        metric,
        mesh: None,
        labels: spec.labels.clone(),
        origin: spec.origin,
    })
}

/// Cotangent Laplacian with lumped mass (one third of incident areas), `n = 2`,
/// distances by ring chords of depth 4.
pub fn build_mesh_space(mesh: &MeshSurface) -> Result<DiscreteSpace> {
    build_mesh_space_with(mesh, MeshMetric::default())
}

pub fn build_mesh_space_with(mesh: &MeshSurface, scheme: MeshMetric) -> Result<DiscreteSpace> {
    mesh.validate()?;
    let data = MeshData::new(mesh.clone());
    let n = mesh.vertex_count();
    let mut measure = vec![0.0; n];
    let mut trip = Vec::with_capacity(9 * mesh.faces.len());
    for (f, t) in mesh.faces.iter().enumerate() {
        let g = &data.faces[f];
        for a in 0..3 {
            measure[t[a]] += g.area / 3.0;
            for b in 0..3 {
                let w = g.area * super::mesh::dot3(g.grads[a], g.grads[b]);
                trip.push((t[a], t[b], w));
            }
        }
    }
    let stiffness = CsrMatrix::from_triplets(n, &trip);
    let comps = components(n, |v| data.adjacency[v].clone());
    if comps.len() > 1 {
        return Err(Error::Disconnected(comps));
    }
    let edges: Vec<Edge> = mesh
        .edges()
        .into_iter()
        .map(|(i, j)| Edge { i, j, length: super::mesh::norm3(mesh.edge_vector(i, j)) })
        .collect();
    let metric = match scheme {
        MeshMetric::EdgeGraph => Metric::Graph(LengthGraph::from_edges(n, &edges.iter().map(|e| (e.i, e.j, e.length)).collect::<Vec<_>>())),
        MeshMetric::RingChords(k) => Metric::Graph(LengthGraph::from_edges(n, &ring_chord_edges(mesh, &data.adjacency, k.max(1)))),
    };
    Ok(DiscreteSpace { dim: 2, measure, stiffness, edges, metric, mesh: Some(Arc::new(data)), labels: None, origin: None })
}

/// Closed metric ball `{ y : d(x, y) ≤ r }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub vertices: Vec<usize>,
    pub measure: f64,
}

impl DiscreteSpace {
    pub fn vertex_count(&self) -> usize {
        self.measure.len()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }
    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn metric(&self) -> &Metric {
        &self.metric
    }
    pub fn mesh(&self) -> Option<&MeshData> {
        self.mesh.as_deref()
    }
    pub fn is_mesh(&self) -> bool {
        self.mesh.is_some()
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x))
        }
    }

    pub fn mean_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.iter().map(|e| e.length).sum::<f64>() / self.edges.len() as f64
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// Dirichlet energy `uᵀWu`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.stiffness.quad_form(u)
    }

    /// `Σ_{i<j} (−W_ij)(u_i − u_j)²`.
    pub fn edge_energy(&self, u: &[f64]) -> f64 {
        self.stiffness
            .triplets()
            .iter()
            .filter(|t| t.0 < t.1)
            .map(|&(i, j, w)| -w * (u[i] - u[j]).powi(2))
            .sum()
    }

    /// `Δu = M⁻¹Wu` (nonnegative operator convention).
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.stiffness.matvec(u);
        y.iter_mut().zip(&self.measure).for_each(|(v, m)| *v /= m);
        y
    }

    /// `⟨f, g⟩_μ`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.measure).map(|((a, b), m)| a * b * m).sum()
    }

    pub fn distances_from(&self, x: usize) -> Vec<f64> {
        self.metric.distances_from(self.vertex_count(), x)
    }

    pub fn ball(&self, x: usize, r: f64) -> Result<Ball> {
        self.check_vertex(x)?;
        if !(r >= 0.0) {
            return invalid("ball radius must be nonnegative");
        }
        Ok(self.ball_from_row(x, &self.distances_from(x), r))
    }

    pub fn ball_from_row(&self, x: usize, row: &[f64], r: f64) -> Ball {
        let vertices: Vec<usize> = (0..row.len()).filter(|&y| row[y] <= r).collect();
        let measure = vertices.iter().map(|&y| self.measure[y]).sum();
        Ball { center: x, radius: r, vertices, measure }
    }

    /// Off-diagonal stiffness entries that are positive (obtuse cotangent weights).
    pub fn positive_offdiagonal_count(&self) -> usize {
        self.stiffness.triplets().iter().filter(|t| t.0 != t.1 && t.2 > 0.0).count()
    }

    pub fn diameter(&self) -> f64 {
        all_pairs(self).iter().cloned().fold(0.0, f64::max)
    }

    /// Diameter estimate from double sweeps (exact on trees, a lower bound in general).
    pub fn diameter_estimate(&self) -> f64 {
        let d0 = self.distances_from(0);
        let far = argmax(&d0);
        let d1 = self.distances_from(far);
        let far2 = argmax(&d1);
        d1[far2].max(self.distances_from(far2).iter().cloned().fold(0.0, f64::max))
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Full distance matrix (row-major), computed in parallel over sources.
pub fn all_pairs(space: &DiscreteSpace) -> Vec<f64> {
    let n = space.vertex_count();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|x| space.distances_from(x)).collect();
    rows.concat()
}

/// Geodesic distance matrix of a space.
pub fn geodesic_distances(space: &DiscreteSpace) -> Vec<f64> {
    all_pairs(space)
}

/// `g → ε⁻²g`: distances `/ε`, measure `/εⁿ`, stiffness `·ε^{2−n}`.
pub fn rescale(space: &DiscreteSpace, eps: f64) -> Result<DiscreteSpace> {
    if !(eps > 0.0) || !eps.is_finite() {
        return invalid("rescale factor must be positive");
    }
    let n = space.dim as i32;
    let mscale = eps.powi(-n);
    Ok(DiscreteSpace {
        dim: space.dim,
        measure: space.measure.iter().map(|m| m * mscale).collect(),
        stiffness: space.stiffness.scaled(eps.powi(2 - n)),
        edges: space.edges.iter().map(|e| Edge { length: e.length / eps, ..*e }).collect(),
        metric: space.metric.scaled(1.0 / eps),
        mesh: space.mesh.as_ref().map(|m| Arc::new(m.scaled(1.0 / eps))),
        labels: space.labels.clone(),
        origin: space.origin,
    })
}
