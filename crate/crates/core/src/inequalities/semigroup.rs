use super::edge_lipschitz;
use crate::error::{invalid, Result};
use crate::heat::{carre_du_champ, HeatKernel};
use crate::kato::{dynkin_threshold, KatoProfile};
use crate::report::{ReportBuilder, VerificationReport};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

fn k_at(profile: Option<&KatoProfile>, t: f64) -> Result<f64> {
    match profile {
        None => Ok(0.0),
        Some(p) if p.values.iter().all(|&k| k == 0.0) => Ok(0.0),
        Some(p) => p.value_at(t),
    }
}

/// Li–Yau residual
/// `R = e^{8√(nk_t)} n/(2t) − e^{−8√(nk_t)} Γ(u)/u² + ∂_t u/u` with `u = P_t u0`,
/// `∂_t u = −ΔP_t u0`, normalized by `n/(2t)`.
pub fn li_yau_residual(
    hk: &HeatKernel,
    profile: Option<&KatoProfile>,
    u0: &[f64],
    xs: &[usize],
    t_grid: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    let space = hk.space();
    if u0.len() != space.vertex_count() {
        return invalid("u0 length does not match the space");
    }
    if let Some(i) = u0.iter().position(|&v| !(v > 0.0)) {
        return invalid(format!("u0 must be positive; u0[{i}] = {}", u0[i]));
    }
    for &x in xs {
        space.check_vertex(x)?;
    }
    let n = space.dim();
    let nf = n as f64;
    let t_min = hk.t_min();
    let mut b = ReportBuilder::new("li_yau", format!("{} points × {} times", xs.len(), t_grid.len()), tol);
    for &t in t_grid {
        let k = k_at(profile, t)?;
        if k > dynkin_threshold(n) {
            b.taint(format!("t={t:e}: k_t = {k:e} above 1/(16n)"));
        }
        let trunc = hk.truncation_tainted(t);
        if trunc {
            b.taint(format!("t={t:e}: spectral truncation"));
        }
        let early = t < t_min;
        if early {
            b.taint(format!("t={t:e} below t_min"));
        }
        let u = hk.apply(t, u0)?;
        let lap = hk.apply_laplacian(t, u0)?;
        let g = carre_du_champ(space, &u);
        let a = 8.0 * (nf * k).sqrt();
        let scale = nf / (2.0 * t);
        for &x in xs {
            let ux = u[x];
            let r = a.exp() * scale - (-a).exp() * g[x] / (ux * ux) - lap[x] / ux;
            b.push(format!("x={x},t={t:e}"), r / scale, early || trunc || !(ux > 0.0));
        }
    }
    Ok(b.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub t: f64,
    pub k_t: f64,
    /// Edge-increment Lipschitz constants of `u` and `P_t u`.
    pub lip_u: f64,
    pub lip_ptu: f64,
    /// `Lip(P_t u) ≤ e^{1/(8n)} Lip(u)`.
    pub lipschitz_holds: bool,
    pub report: VerificationReport,
}

/// Pointwise margin `e^{4k_t} P_tΓ(u) − Γ(P_t u)` at every vertex.
pub fn gradient_estimate_check(
    hk: &HeatKernel,
    profile: Option<&KatoProfile>,
    u: &[f64],
    t: f64,
    tol: f64,
) -> Result<GradientEstimate> {
    let space = hk.space();
    if u.len() != space.vertex_count() {
        return invalid("field length does not match the space");
    }
    let k = k_at(profile, t)?;
    let ptu = hk.apply(t, u)?;
    let pg = hk.apply(t, &carre_du_champ(space, u))?;
    let gp = carre_du_champ(space, &ptu);
    let trunc = hk.truncation_tainted(t);
    let mut b = ReportBuilder::new("gradient_estimate", format!("all {} vertices, t={t:e}", u.len()), tol);
    if trunc {
        b.taint("spectral truncation");
    }
    let e = (4.0 * k).exp();
    for x in 0..u.len() {
        b.push(format!("x={x}"), e * pg[x] - gp[x], trunc);
    }
    let lip_u = edge_lipschitz(space, u, None);
    let lip_ptu = edge_lipschitz(space, &ptu, None);
    let bound = (1.0 / (8.0 * space.dim() as f64)).exp() * lip_u;
    let lipschitz_holds = lip_ptu <= bound * (1.0 + 1e-12) + tol;
    b.note(format!("Lip(u) = {lip_u:e}, Lip(P_t u) = {lip_ptu:e}, bound e^(1/8n)Lip(u) = {bound:e}"));
    Ok(GradientEstimate { t, k_t: k, lip_u, lip_ptu, lipschitz_holds, report: b.finish() })
}

/// Per-mode form of the Bakry–Ledoux margin at `ξ = λt` with `φ ≡ 1`:
/// `½(1 − e^{−2ξ}) − e^{−2ξ}(ξ + ξ²/n)`.
pub fn bl_scalar_margin(xi: f64, n: f64) -> f64 {
    let e = (-2.0 * xi).exp();
    -0.5 * (-2.0 * xi).exp_m1() - e * (xi + xi * xi / n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BakryLedoux {
    pub t: f64,
    pub k_t: f64,
    pub lhs: f64,
    /// `e^{−12k_t}(t∫φΓ(P_t v) + (t²/n)∫φ(ΔP_t v)²)`.
    pub rhs_id3: f64,
    /// `t∫φΓ(P_t v) + (t²/(2n))∫φ(ΔP_t v)²`, the weak form with `k = 0`.
    pub rhs_weak: f64,
    pub id3: VerificationReport,
    pub weak: VerificationReport,
}

/// Scalar margin of `½∫(P_tφ·v² − φ(P_t v)²) ≥ e^{−12k_t}(t∫φ|dP_t v|² + (t²/n)∫φ(ΔP_t v)²)`.
/// The tolerance is `tol_rel·‖v‖²`.
pub fn bakry_ledoux_residual(
    hk: &HeatKernel,
    profile: Option<&KatoProfile>,
    v: &[f64],
    phi: &[f64],
    t: f64,
    tol_rel: f64,
) -> Result<BakryLedoux> {
    let space = hk.space();
    if v.len() != space.vertex_count() || phi.len() != space.vertex_count() {
        return invalid("field length does not match the space");
    }
    if let Some(i) = phi.iter().position(|&p| !(p >= 0.0)) {
        return invalid(format!("φ must be nonnegative; φ[{i}] = {}", phi[i]));
    }
    let k = k_at(profile, t)?;
    let n = space.dim() as f64;
    let ptphi = hk.apply(t, phi)?;
    let ptv = hk.apply(t, v)?;
    let v2: Vec<f64> = v.iter().map(|a| a * a).collect();
    let ptv2: Vec<f64> = ptv.iter().map(|a| a * a).collect();
    let lhs = 0.5 * (space.inner(&ptphi, &v2) - space.inner(phi, &ptv2));
    let grad = space.inner(phi, &carre_du_champ(space, &ptv));
    let lap: Vec<f64> = hk.apply_laplacian(t, v)?.iter().map(|a| a * a).collect();
    let lap = space.inner(phi, &lap);
    let rhs_id3 = (-12.0 * k).exp() * (t * grad + t * t / n * lap);
    let rhs_weak = t * grad + t * t / (2.0 * n) * lap;
    let tol = tol_rel * space.inner(v, v);
    let trunc = hk.truncation_tainted(t);
    let mk = |name: &str, rhs: f64| {
        let mut b = ReportBuilder::new(name, format!("t={t:e}"), tol);
        if trunc {
            b.taint("spectral truncation");
        }
        b.push(format!("t={t:e}"), lhs - rhs, trunc);
        b.finish()
    };
    Ok(BakryLedoux { t, k_t: k, lhs, rhs_id3, rhs_weak, id3: mk("bakry_ledoux_id3", rhs_id3), weak: mk("bakry_ledoux_weak", rhs_weak) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub beta: f64,
    pub samples_used: usize,
    pub excluded: usize,
    pub report: VerificationReport,
}

/// Smallest `β ≥ 1` with
/// `e^{−βd²/t}/(βV) ≤ H(t,x,y) ≤ β e^{−d²/(βt)}/V`, `V = μ(B_{√t}(x))`, over the sample.
pub fn gaussian_bound_fit(hk: &HeatKernel, pairs: &[(usize, usize)], t_grid: &[f64]) -> Result<GaussianFit> {
    let space = hk.space();
    let mut rows: HashMap<usize, Vec<f64>> = HashMap::new();
    for &(x, y) in pairs {
        space.check_vertex(x)?;
        space.check_vertex(y)?;
        rows.entry(x).or_insert_with(|| space.distances_from(x));
    }
    let mut data = Vec::new();
    let mut excluded = 0;
    let mut b = ReportBuilder::new("gaussian_bounds", format!("{} pairs × {} times", pairs.len(), t_grid.len()), 1e-9);
    for &t in t_grid {
        if hk.truncation_tainted(t) {
            b.taint(format!("t={t:e}: spectral truncation"));
        }
        for &(x, y) in pairs {
            let (row, info) = hk.kernel_row_clamped(t, x)?;
            let raw = hk.kernel(t, x, y)?;
            if raw < info.floor {
                excluded += 1;
                continue;
            }
            let dist = &rows[&x];
            let vol = space.ball_from_row(x, dist, t.sqrt()).measure;
            let d2t = dist[y] * dist[y] / t;
            data.push(((row[y] * vol).ln(), d2t, format!("x={x},y={y},t={t:e}")));
        }
    }
    if excluded > 0 {
        b.taint(format!("{excluded} clamped kernel values excluded"));
    }
    let ok = |beta: f64| {
        let lb = beta.ln();
        data.iter().all(|(lhv, q, _)| *lhv >= -lb - beta * q && *lhv <= lb - q / beta)
    };
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e300 {
            return invalid("no finite Gaussian constant fits the sample");
        }
    }
    let mut lo = if hi == 1.0 { 1.0 } else { hi / 2.0 };
    if hi > 1.0 {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let beta = hi;
    let lb = beta.ln();
    for (lhv, q, loc) in &data {
        let m = (lhv + lb + beta * q).min(lb - q / beta - lhv);
        b.push(loc.clone(), m, false);
    }
    b.note(format!("beta = {beta:e}"));
    Ok(GaussianFit { beta, samples_used: data.len(), excluded, report: b.finish() })
}
