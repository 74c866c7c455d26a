use crate::error::{invalid, Result};
use crate::geometry::{add, cross, dot3, norm3, scale3, sub, DiscreteSpace};
use crate::heat::carre_du_champ;
use crate::kato::{dynkin_threshold, KatoProfile};
use crate::report::{ReportBuilder, VerificationReport};
use serde::{Deserialize, Serialize};

/// Largest `|u_i − u_j| / len(i,j)` over stiffness edges, optionally restricted to
/// edges with both ends in `subset`.
pub fn edge_lipschitz(space: &DiscreteSpace, u: &[f64], subset: Option<&[bool]>) -> f64 {
    space
        .edges()
        .iter()
        .filter(|e| subset.map_or(true, |s| s[e.i] && s[e.j]))
        .map(|e| (u[e.i] - u[e.j]).abs() / e.length)
        .fold(0.0, f64::max)
}

fn tangent_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = sub(a, scale3(n, dot3(a, n)));
    let e1 = scale3(e1, 1.0 / norm3(e1));
    (e1, cross(n, e1))
}

/// Per-vertex `2×2` matrices: least-squares linear fit of the face-gradient field over the
/// 1-ring, in tangent-plane coordinates. `None` where the fit is rank-deficient.
pub fn vertex_hessians(space: &DiscreteSpace, u: &[f64]) -> Result<Vec<Option<[[f64; 2]; 2]>>> {
    let mesh = match space.mesh() {
        Some(m) => m,
        None => return invalid("discrete Hessian requires a mesh space"),
    };
    if u.len() != space.vertex_count() {
        return invalid("field length does not match the space");
    }
    let grads: Vec<[f64; 3]> = (0..mesh.faces.len()).map(|f| mesh.face_gradient(f, u)).collect();
    Ok((0..space.vertex_count())
        .map(|v| {
            let faces = &mesh.vertex_faces[v];
            if faces.len() < 3 {
                return None;
            }
            let (e1, e2) = tangent_basis(mesh.vertex_normals[v]);
            let pts: Vec<([f64; 2], [f64; 2])> = faces
                .iter()
                .map(|&f| {
                    let t = mesh.surface.faces[f];
                    let c = t.iter().filter(|&&w| w != v).fold([0.0; 3], |acc, &w| add(acc, mesh.surface.edge_vector(v, w)));
                    let c = scale3(c, 1.0 / 3.0);
                    let g = grads[f];
                    ([dot3(c, e1), dot3(c, e2)], [dot3(g, e1), dot3(g, e2)])
                })
                .collect();
            let m = pts.len() as f64;
            let (mut px, mut gx) = ([0.0; 2], [0.0; 2]);
            for (p, g) in &pts {
                for a in 0..2 {
                    px[a] += p[a] / m;
                    gx[a] += g[a] / m;
                }
            }
            let mut s = [[0.0; 2]; 2];
            let mut c = [[0.0; 2]; 2];
            for (p, g) in &pts {
                let dp = [p[0] - px[0], p[1] - px[1]];
                let dg = [g[0] - gx[0], g[1] - gx[1]];
                for a in 0..2 {
                    for b in 0..2 {
                        s[a][b] += dp[a] * dp[b];
                        c[a][b] += dg[a] * dp[b];
                    }
                }
            }
            let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
            let scale = (s[0][0] + s[1][1]).powi(2);
            if !(det > 1e-8 * scale) {
                return None;
            }
            let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
            let mut a = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    a[i][j] = c[i][0] * inv[0][j] + c[i][1] * inv[1][j];
                }
            }
            Some(a)
        })
        .collect())
}

/// `|∇du|²` per vertex (squared Frobenius norm of the fitted matrix).
pub fn discrete_hessian(space: &DiscreteSpace, u: &[f64]) -> Result<Vec<Option<f64>>> {
    Ok(vertex_hessians(space, u)?
        .into_iter()
        .map(|a| a.map(|a| a.iter().flatten().map(|x| x * x).sum()))
        .collect())
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn in_ball(dist: &[f64], r: f64) -> Vec<bool> {
    dist.iter().map(|&d| d <= r).collect()
}

fn fitted_report(name: &str, samples: String, value: f64, bound: Option<f64>, what: &str) -> VerificationReport {
    let mut b = ReportBuilder::new(name, samples, 1e-12);
    match bound {
        Some(c) => b.push(what, (c - value) / c.abs().max(1.0), false),
        None => {
            b.note(format!("{what} = {value:e} reported as a fitted constant"));
            b.push(what, if value.is_finite() { 0.0 } else { f64::NAN }, false);
        }
    }
    b.finish()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rhs_harmonic: f64,
    pub ratio: f64,
    pub ratio_harmonic: f64,
    pub excluded: usize,
    pub report: VerificationReport,
}

/// `∫_{B_{r/2}}|∇du|²` against `∫_{B_r}[(Δu)² + |du|²/min(r²,T)]` and the harmonic
/// variant `min(r²,T)⁻¹ ∫_{B_r}||du|² − ⨍|du|²|`. With `constant = Some(C)` the
/// verdict checks `ratio ≤ C`; otherwise the ratio is reported as fitted.
pub fn hessian_estimate_check(
    space: &DiscreteSpace,
    u: &[f64],
    x: usize,
    r: f64,
    big_t: f64,
    constant: Option<f64>,
) -> Result<HessianCheck> {
    space.check_vertex(x)?;
    if r < 5.0 * space.mean_edge_length() {
        return invalid(format!("r = {r:e} is below 5 mean edge lengths"));
    }
    let hess = discrete_hessian(space, u)?;
    let dist = space.distances_from(x);
    let mu = space.measure();
    let (inner, outer) = (in_ball(&dist, r / 2.0), in_ball(&dist, r));
    let mut lhs = 0.0;
    let mut excluded = 0;
    for i in 0..u.len() {
        if inner[i] {
            match hess[i] {
                Some(h) => lhs += h * mu[i],
                None => excluded += 1,
            }
        }
    }
    let lap = space.laplacian(u);
    let g = carre_du_champ(space, u);
    let m = r * r;
    let m = m.min(big_t);
    let (mut rhs, mut vol, mut gsum) = (0.0, 0.0, 0.0);
    for i in 0..u.len() {
        if outer[i] {
            rhs += (lap[i] * lap[i] + g[i] / m) * mu[i];
            vol += mu[i];
            gsum += g[i] * mu[i];
        }
    }
    let avg = gsum / vol;
    let rhs_harmonic = (0..u.len()).filter(|&i| outer[i]).map(|i| (g[i] - avg).abs() * mu[i]).sum::<f64>() / m;
    let (q, qh) = (ratio(lhs, rhs), ratio(lhs, rhs_harmonic));
    let mut report = fitted_report("hessian_estimate", format!("x={x}, r={r:e}"), q, constant, "ratio");
    if excluded > 0 {
        report.notes.push(format!("{excluded} rank-deficient vertices excluded"));
    }
    report.notes.push(format!("harmonic-form ratio = {qh:e}"));
    Ok(HessianCheck { lhs, rhs, rhs_harmonic, ratio: q, ratio_harmonic: qh, excluded, report })
}

/// Rejects `h` unless `|(Wh)_i| ≤ tol · Σ_j |W_ij||h_j|` at every vertex of `B_r(x)`.
pub fn check_harmonic(space: &DiscreteSpace, h: &[f64], interior: &[bool], tol: f64) -> Result<()> {
    let w = space.stiffness();
    let scale = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for i in 0..h.len() {
        if !interior[i] {
            continue;
        }
        let (cols, vals) = w.row(i);
        let mut res = 0.0;
        let mut mag = 0.0;
        for (&j, &a) in cols.iter().zip(vals) {
            res += a * h[j];
            mag += a.abs() * scale;
        }
        if res.abs() > tol * mag.max(f64::MIN_POSITIVE) {
            return invalid(format!("field is not harmonic at vertex {i}: residual {res:e}"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicGradient {
    /// `sup_{B_{r/2}}|∇h| / (⨍_{B_r}|∇h|²)^{1/2}`.
    pub ratio_mean: f64,
    /// `r·sup_{B_{r/2}}|∇h| / sup_{B_{r/2}}|h|`.
    pub ratio_sup: f64,
    /// Exponent `1 + r/√T` of the dimensional constant.
    pub exponent: f64,
    pub report: VerificationReport,
}

/// Interior gradient bounds for `h` harmonic on `B_r(x)`. With `c_n = Some(c)` the verdict
/// checks both ratios against `c^{1+r/√T}`.
pub fn harmonic_gradient_bound_check(
    space: &DiscreteSpace,
    h: &[f64],
    x: usize,
    r: f64,
    big_t: f64,
    c_n: Option<f64>,
    tol: f64,
) -> Result<HarmonicGradient> {
    space.check_vertex(x)?;
    if h.len() != space.vertex_count() {
        return invalid("field length does not match the space");
    }
    let dist = space.distances_from(x);
    let (inner, outer) = (in_ball(&dist, r / 2.0), in_ball(&dist, r));
    check_harmonic(space, h, &outer, tol)?;
    let g = carre_du_champ(space, h);
    let mu = space.measure();
    let sup_grad = (0..h.len()).filter(|&i| inner[i]).map(|i| g[i].sqrt()).fold(0.0, f64::max);
    let sup_h = (0..h.len()).filter(|&i| inner[i]).map(|i| h[i].abs()).fold(0.0, f64::max);
    let (mut gs, mut vol) = (0.0, 0.0);
    for i in 0..h.len() {
        if outer[i] {
            gs += g[i] * mu[i];
            vol += mu[i];
        }
    }
    let rms = (gs / vol).sqrt();
    let ratio_mean = ratio(sup_grad, rms);
    let ratio_sup = ratio(r * sup_grad, sup_h);
    let exponent = 1.0 + r / big_t.sqrt();
    let bound = c_n.map(|c| c.powf(exponent));
    let mut b = ReportBuilder::new("harmonic_gradient", format!("x={x}, r={r:e}"), 1e-12);
    match bound {
        Some(c) => {
            b.push("mean_form", (c - ratio_mean) / c, false);
            b.push("sup_form", (c - ratio_sup) / c, false);
        }
        None => {
            b.note(format!("ratios {ratio_mean:e} (mean form), {ratio_sup:e} (sup form) reported as fitted"));
            b.push("mean_form", if ratio_mean.is_finite() { 0.0 } else { f64::NAN }, false);
            b.push("sup_form", if ratio_sup.is_finite() { 0.0 } else { f64::NAN }, false);
        }
    }
    Ok(HarmonicGradient { ratio_mean, ratio_sup, exponent, report: b.finish() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzImprovement {
    pub delta: f64,
    pub k_r2: f64,
    /// `⨍_{B_r}||dh|² − 1|`.
    pub gradient_defect: f64,
    /// Edge-increment Lipschitz constants on `B_r` and `B_{r/2}`.
    pub kappa: f64,
    pub lip_half: f64,
    /// `(Lip_{B_{r/2}} − 1)/δ`, floored at 0.
    pub fitted_c: f64,
    pub report: VerificationReport,
}

/// Lipschitz improvement: under `k_{r²} ≤ δ ≤ 1/(16n)` and `⨍_{B_r}||dh|²−1| ≤ δ²`,
/// `h` is `(1 + Cδ)`-Lipschitz on `B_{r/2}`. Unmet hypotheses give an inconclusive report.
#[allow(clippy::too_many_arguments)]
pub fn lipschitz_improvement_check(
    space: &DiscreteSpace,
    profile: Option<&KatoProfile>,
    h: &[f64],
    x: usize,
    r: f64,
    delta: f64,
    constant: Option<f64>,
    tol: f64,
) -> Result<LipschitzImprovement> {
    space.check_vertex(x)?;
    if h.len() != space.vertex_count() {
        return invalid("field length does not match the space");
    }
    let dist = space.distances_from(x);
    let (inner, outer) = (in_ball(&dist, r / 2.0), in_ball(&dist, r));
    check_harmonic(space, h, &outer, tol)?;
    let k = match profile {
        Some(p) if p.values.iter().any(|&v| v != 0.0) => p.value_at(r * r)?,
        _ => 0.0,
    };
    let g = carre_du_champ(space, h);
    let mu = space.measure();
    let (mut s, mut vol) = (0.0, 0.0);
    for i in 0..h.len() {
        if outer[i] {
            s += (g[i] - 1.0).abs() * mu[i];
            vol += mu[i];
        }
    }
    let gradient_defect = s / vol;
    let kappa = edge_lipschitz(space, h, Some(&outer));
    let lip_half = edge_lipschitz(space, h, Some(&inner));
    let fitted_c = ((lip_half - 1.0) / delta).max(0.0);
    let samples = format!("x={x}, r={r:e}, δ={delta:e}");
    let mut failed = Vec::new();
    if !(k <= delta && delta <= dynkin_threshold(space.dim())) {
        failed.push(format!("k_(r²) = {k:e} ≤ δ = {delta:e} ≤ 1/(16n) fails"));
    }
    if gradient_defect > delta * delta {
        failed.push(format!("gradient defect {gradient_defect:e} exceeds δ² = {:e}", delta * delta));
    }
    let report = if failed.is_empty() {
        fitted_report("lipschitz_improvement", samples, 1.0 + fitted_c * delta, constant.map(|c| 1.0 + c * delta), "lipschitz")
    } else {
        VerificationReport::inconclusive("lipschitz_improvement", &samples, failed.join("; "))
    };
    Ok(LipschitzImprovement { delta, k_r2: k, gradient_defect, kappa, lip_half, fitted_c, report })
}
