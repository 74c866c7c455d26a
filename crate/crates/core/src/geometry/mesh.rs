use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Triangle mesh of a closed orientable surface. An optional period makes the
/// x/y coordinates wrap (flat tori); edge vectors then use the minimum image.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeshSurface {
    pub positions: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub period: Option<[f64; 2]>,
}

/// Per-face geometry of the piecewise-linear interpolant.
#[derive(Clone, Debug)]
pub struct FaceGeometry {
    pub area: f64,
    /// Gradients of the three hat functions (ambient coordinates, tangent to the face).
    pub grads: [[f64; 3]; 3],
    /// Interior angles at the three corners.
    pub angles: [f64; 3],
    pub normal: [f64; 3],
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
pub(crate) fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
pub(crate) fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
pub(crate) fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

impl MeshSurface {
    pub fn new(positions: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Self {
        MeshSurface { positions, faces, period: None }
    }

    pub fn periodic(positions: Vec<[f64; 3]>, faces: Vec<[usize; 3]>, period: [f64; 2]) -> Self {
        MeshSurface { positions, faces, period: Some(period) }
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    /// `p_j − p_i`, wrapped to the minimum image on periodic meshes.
    pub fn edge_vector(&self, i: usize, j: usize) -> [f64; 3] {
        let mut d = sub(self.positions[j], self.positions[i]);
        if let Some(p) = self.period {
            for a in 0..2 {
                d[a] -= p[a] * (d[a] / p[a]).round();
            }
        }
        d
    }

    /// Undirected edges with the faces using them, sorted by `(min, max)`.
    pub fn edge_faces(&self) -> Vec<((usize, usize), Vec<usize>)> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (f, t) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(f);
            }
        }
        let mut v: Vec<_> = map.into_iter().collect();
        v.sort_by_key(|e| e.0);
        v
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edge_faces().into_iter().map(|e| e.0).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edges().len() as i64 + self.faces.len() as i64
    }

    pub fn face_geometry(&self, f: usize) -> FaceGeometry {
        let [i0, i1, i2] = self.faces[f];
        let e1 = self.edge_vector(i0, i1);
        let e2 = self.edge_vector(i0, i2);
        let q = [[0.0; 3], e1, e2];
        let n = cross(e1, e2);
        let twice_area = norm3(n);
        let nh = scale3(n, 1.0 / twice_area);
        let mut grads = [[0.0; 3]; 3];
        let mut angles = [0.0; 3];
        for k in 0..3 {
            let opp = sub(q[(k + 2) % 3], q[(k + 1) % 3]);
            grads[k] = scale3(cross(nh, opp), 1.0 / twice_area);
            let u = sub(q[(k + 1) % 3], q[k]);
            let v = sub(q[(k + 2) % 3], q[k]);
            angles[k] = norm3(cross(u, v)).atan2(dot3(u, v));
        }
        FaceGeometry { area: 0.5 * twice_area, grads, angles, normal: nh }
    }

    /// Checks index ranges, closed orientable manifold connectivity and
    /// non-degenerate faces.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertex_count();
        if nv == 0 || self.faces.is_empty() {
            return invalid("mesh has no vertices or faces");
        }
        for (f, t) in self.faces.iter().enumerate() {
            for &v in t {
                if v >= nv {
                    return Err(Error::FaceIndex(f, v, nv));
                }
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::DegenerateFace(f));
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.faces {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        for ((a, b), faces) in self.edge_faces() {
            if faces.len() != 2 {
                return Err(Error::NonManifoldEdge(a, b, faces.len()));
            }
            if directed.get(&(a, b)).copied().unwrap_or(0) != 1 || directed.get(&(b, a)).copied().unwrap_or(0) != 1 {
                return invalid(format!("edge ({a}, {b}) is not consistently oriented"));
            }
        }
        for f in 0..self.faces.len() {
            let g = self.face_geometry(f);
            let min_angle = g.angles.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(g.area > 0.0) || !(min_angle > 1e-4) {
                return Err(Error::DegenerateFace(f));
            }
        }
        Ok(())
    }

    /// Sum of incident angles per vertex.
    pub fn angle_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.vertex_count()];
        for f in 0..self.faces.len() {
            let g = self.face_geometry(f);
            for k in 0..3 {
                s[self.faces[f][k]] += g.angles[k];
            }
        }
        s
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_geometry(f).area).sum()
    }

    /// Positions scaled by `s` (period included).
    pub fn scaled(&self, s: f64) -> MeshSurface {
        MeshSurface {
            positions: self.positions.iter().map(|&p| scale3(p, s)).collect(),
            faces: self.faces.clone(),
            period: self.period.map(|p| [p[0] * s, p[1] * s]),
        }
    }
}
