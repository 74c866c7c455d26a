use crate::error::{invalid, Result};
use crate::geometry::{dot3, DiscreteSpace};
use crate::heat::carre_du_champ;
use crate::inequalities::discrete_hessian;
use crate::linalg::EnvelopeCholesky;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Solves `W_II u_I = −W_IB u_B` on the vertices flagged `interior`; other vertices keep
/// their values from `values`.
pub fn harmonic_extension(space: &DiscreteSpace, interior: &[bool], values: &[f64]) -> Result<Vec<f64>> {
    let n = space.vertex_count();
    if interior.len() != n || values.len() != n {
        return invalid("mask and values must match the space");
    }
    let idx: Vec<usize> = (0..n).filter(|&i| interior[i]).collect();
    if idx.is_empty() {
        return Ok(values.to_vec());
    }
    if idx.len() == n {
        return invalid("boundary set is empty");
    }
    let w = space.stiffness();
    check_boundary_contact(space, interior)?;
    let mut rhs = vec![0.0; idx.len()];
    for (r, &i) in idx.iter().enumerate() {
        let (cols, vals) = w.row(i);
        for (&j, &a) in cols.iter().zip(vals) {
            if !interior[j] {
                rhs[r] -= a * values[j];
            }
        }
    }
    let chol = EnvelopeCholesky::factor(&w.submatrix(&idx))?;
    let sol = chol.solve(&rhs);
    let mut out = values.to_vec();
    for (r, &i) in idx.iter().enumerate() {
        out[i] = sol[r];
    }
    Ok(out)
}

fn check_boundary_contact(space: &DiscreteSpace, interior: &[bool]) -> Result<()> {
    let n = interior.len();
    let w = space.stiffness();
    let mut seen = vec![false; n];
    for s in 0..n {
        if !interior[s] || seen[s] {
            continue;
        }
        let mut stack = vec![s];
        let mut comp = Vec::new();
        let mut touches = false;
        seen[s] = true;
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (cols, vals) = w.row(i);
            for (&j, &a) in cols.iter().zip(vals) {
                if j == i || a == 0.0 {
                    continue;
                }
                if !interior[j] {
                    touches = true;
                } else if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if !touches {
            comp.sort_unstable();
            return invalid(format!("interior component {comp:?} has no boundary contact"));
        }
    }
    Ok(())
}

/// Harmonic replacement with prescribed values on `boundary` and harmonic elsewhere.
pub fn harmonic_replacement(space: &DiscreteSpace, boundary: &[usize], data: &[f64]) -> Result<Vec<f64>> {
    if boundary.is_empty() {
        return invalid("boundary set is empty");
    }
    if boundary.len() != data.len() {
        return invalid("one boundary value per boundary vertex is required");
    }
    let n = space.vertex_count();
    let mut interior = vec![true; n];
    let mut values = vec![0.0; n];
    for (&b, &d) in boundary.iter().zip(data) {
        space.check_vertex(b)?;
        interior[b] = false;
        values[b] = d;
    }
    harmonic_extension(space, &interior, &values)
}

/// Ball `B_r(x)` and its one-layer collar `B_{r+h̄} \ B_r`, `h̄` the longest edge.
pub fn ball_with_collar(space: &DiscreteSpace, x: usize, r: f64) -> Result<(Vec<bool>, Vec<bool>, Vec<f64>)> {
    space.check_vertex(x)?;
    let dist = space.distances_from(x);
    let h = space.max_edge_length();
    let inner: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
    let collar: Vec<bool> = dist.iter().map(|&d| d > r && d <= r + h).collect();
    Ok((inner, collar, dist))
}

/// Tangent-plane coordinates around `x`: the minimum-image offset `p − x` projected
/// on an orthonormal basis of the tangent plane at `x`. Mesh spaces only.
pub fn local_coordinates(space: &DiscreteSpace, x: usize) -> Result<[Vec<f64>; 2]> {
    let mesh = match space.mesh() {
        Some(m) => m,
        None => return invalid("local coordinates require a mesh space"),
    };
    space.check_vertex(x)?;
    let nrm = mesh.vertex_normals[x];
    let a = if nrm[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let d = dot3(a, nrm);
    let e1 = [a[0] - d * nrm[0], a[1] - d * nrm[1], a[2] - d * nrm[2]];
    let l = dot3(e1, e1).sqrt();
    let e1 = [e1[0] / l, e1[1] / l, e1[2] / l];
    let e2 = [nrm[1] * e1[2] - nrm[2] * e1[1], nrm[2] * e1[0] - nrm[0] * e1[2], nrm[0] * e1[1] - nrm[1] * e1[0]];
    let mut u = Vec::with_capacity(space.vertex_count());
    let mut v = Vec::with_capacity(space.vertex_count());
    for p in 0..space.vertex_count() {
        let o = mesh.surface.edge_vector(x, p);
        u.push(dot3(o, e1));
        v.push(dot3(o, e2));
    }
    Ok([u, v])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingQuality {
    pub eps_lip: f64,
    pub eps_gram: f64,
    pub eps_hess: f64,
    pub gh_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingMap {
    pub center: usize,
    pub r: f64,
    /// Vertices of `B_r(x)`.
    pub vertices: Vec<usize>,
    /// Component fields on the whole space, harmonic on `B_r(x)`.
    pub fields: Vec<Vec<f64>>,
    pub metrics: SplittingQuality,
}

/// Export `{center, r, fields[][], metrics{}}` with fields restricted to the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingExport {
    pub center: usize,
    pub r: f64,
    pub vertices: Vec<usize>,
    pub fields: Vec<Vec<f64>>,
    pub metrics: SplittingQuality,
}

impl SplittingMap {
    pub fn export(&self) -> SplittingExport {
        SplittingExport {
            center: self.center,
            r: self.r,
            vertices: self.vertices.clone(),
            fields: self.fields.iter().map(|f| self.vertices.iter().map(|&i| f[i]).collect()).collect(),
            metrics: self.metrics,
        }
    }
}

/// Harmonic replacement of each seed on `B_r(x)` with the seed values on the collar.
pub fn build_splitting_map(space: &DiscreteSpace, x: usize, r: f64, seeds: &[Vec<f64>]) -> Result<SplittingMap> {
    if seeds.is_empty() {
        return invalid("at least one seed coordinate is required");
    }
    if r < 5.0 * space.mean_edge_length() {
        return invalid(format!("r = {r:e} is below 5 mean edge lengths"));
    }
    let (inner, _, _) = ball_with_collar(space, x, r)?;
    let vertices: Vec<usize> = (0..inner.len()).filter(|&i| inner[i]).collect();
    for (a, s) in seeds.iter().enumerate() {
        if s.len() != space.vertex_count() {
            return invalid("seed length does not match the space");
        }
        let first = s[vertices[0]];
        if vertices.iter().all(|&i| s[i] == first) {
            return invalid(format!("seed {a} is constant on the ball"));
        }
    }
    let fields = seeds.iter().map(|s| harmonic_extension(space, &inner, s)).collect::<Result<Vec<_>>>()?;
    let gram = mean_gram(space, &fields, &inner);
    if seeds.len() > 1 && small_det(&gram) {
        return invalid("seed coordinates are rank-deficient");
    }
    let mut map = SplittingMap { center: x, r, vertices, fields, metrics: SplittingQuality { eps_lip: 0.0, eps_gram: 0.0, eps_hess: 0.0, gh_defect: 0.0 } };
    map.metrics = splitting_quality(space, &map)?;
    Ok(map)
}

/// Determinant of the diagonally normalized Gram matrix below `1e−10`.
fn small_det(g: &[Vec<f64>]) -> bool {
    let k = g.len();
    if (0..k).any(|i| !(g[i][i] > 0.0)) {
        return true;
    }
    let a: Vec<f64> = (0..k * k).map(|ij| g[ij / k][ij % k] / (g[ij / k][ij / k] * g[ij % k][ij % k]).sqrt()).collect();
    match crate::linalg::small_cholesky(&a, k) {
        Ok(l) => (0..k).map(|i| l[i * k + i].powi(2)).product::<f64>() < 1e-10,
        Err(_) => true,
    }
}

/// Per-vertex `Γ(h_a, h_b)` by polarization of the carré du champ.
fn gram_fields(space: &DiscreteSpace, fields: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
    let k = fields.len();
    let diag: Vec<Vec<f64>> = fields.iter().map(|f| carre_du_champ(space, f)).collect();
    let mut g = vec![vec![Vec::new(); k]; k];
    for a in 0..k {
        for b in 0..k {
            g[a][b] = if a == b {
                diag[a].clone()
            } else if b < a {
                g[b][a].clone()
            } else {
                let sum: Vec<f64> = fields[a].iter().zip(&fields[b]).map(|(x, y)| x + y).collect();
                carre_du_champ(space, &sum).iter().zip(&diag[a]).zip(&diag[b]).map(|((s, p), q)| 0.5 * (s - p - q)).collect()
            };
        }
    }
    g
}

fn mean_gram(space: &DiscreteSpace, fields: &[Vec<f64>], mask: &[bool]) -> Vec<Vec<f64>> {
    let g = gram_fields(space, fields);
    let mu = space.measure();
    let vol: f64 = (0..mu.len()).filter(|&i| mask[i]).map(|i| mu[i]).sum();
    g.iter()
        .map(|row| row.iter().map(|f| (0..mu.len()).filter(|&i| mask[i]).map(|i| f[i] * mu[i]).sum::<f64>() / vol).collect())
        .collect()
}

/// `ε_lip = max(Lip_{B_r} H − 1, 0)` over edge increments, `ε_gram = ⨍|ᵗdH·dH − Id|`
/// (Frobenius), `ε_hess = r²⨍|∇dH|²`, and `gh_defect` = distortion of `H` on sampled pairs.
pub fn splitting_quality(space: &DiscreteSpace, map: &SplittingMap) -> Result<SplittingQuality> {
    let n = space.vertex_count();
    let k = map.fields.len();
    let mut mask = vec![false; n];
    for &i in &map.vertices {
        mask[i] = true;
    }
    let h = &map.fields;
    let lip = space
        .edges()
        .iter()
        .filter(|e| mask[e.i] && mask[e.j])
        .map(|e| (0..k).map(|a| (h[a][e.i] - h[a][e.j]).powi(2)).sum::<f64>().sqrt() / e.length)
        .fold(0.0, f64::max);
    let mu = space.measure();
    let vol: f64 = map.vertices.iter().map(|&i| mu[i]).sum();
    let g = gram_fields(space, h);
    let eps_gram = map
        .vertices
        .iter()
        .map(|&i| {
            let mut s = 0.0;
            for a in 0..k {
                for b in 0..k {
                    let id = if a == b { 1.0 } else { 0.0 };
                    s += (g[a][b][i] - id).powi(2);
                }
            }
            s.sqrt() * mu[i]
        })
        .sum::<f64>()
        / vol;
    let eps_hess = if space.is_mesh() {
        let hs = h.iter().map(|f| discrete_hessian(space, f)).collect::<Result<Vec<_>>>()?;
        let (mut s, mut v) = (0.0, 0.0);
        for &i in &map.vertices {
            if hs.iter().all(|hh| hh[i].is_some()) {
                s += hs.iter().map(|hh| hh[i].unwrap()).sum::<f64>() * mu[i];
                v += mu[i];
            }
        }
        map.r * map.r * s / v
    } else {
        f64::NAN
    };
    let pairs = sample_pairs(&map.vertices, 0x5eed);
    let mut gh: f64 = 0.0;
    let mut by_source: Vec<(usize, Vec<usize>)> = Vec::new();
    for (p, q) in pairs {
        match by_source.last_mut() {
            Some((s, qs)) if *s == p => qs.push(q),
            _ => by_source.push((p, vec![q])),
        }
    }
    for (p, qs) in by_source {
        let d = space.distances_from(p);
        for q in qs {
            let e = (0..k).map(|a| (h[a][p] - h[a][q]).powi(2)).sum::<f64>().sqrt();
            gh = gh.max((e - d[q]).abs());
        }
    }
    Ok(SplittingQuality { eps_lip: (lip - 1.0).max(0.0), eps_gram, eps_hess, gh_defect: gh })
}

/// All pairs when the ball has at most 300 vertices, else 100 seeded sources × 100 targets.
fn sample_pairs(vertices: &[usize], seed: u64) -> Vec<(usize, usize)> {
    let m = vertices.len();
    if m <= 300 {
        let mut out = Vec::with_capacity(m * (m - 1) / 2);
        for a in 0..m {
            for b in a + 1..m {
                out.push((vertices[a], vertices[b]));
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(10_000);
    for s in sample(&mut rng, m, 100).into_iter() {
        for t in sample(&mut rng, m, 100).into_iter() {
            out.push((vertices[s], vertices[t]));
        }
    }
    out
}
