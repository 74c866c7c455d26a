//! Kato constant `k_t = max_x ∫_0^t Σ_y H(s,x,y) V_y μ_y ds`, its L^p variant,
//! the strong-Kato integral `Φ`, the factor `Γ_τ` and bound classification.

use crate::error::{invalid, Result};
use crate::geometry::PotentialField;
use crate::heat::HeatKernel;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Time-integration rule for `∫_0^t g_x(s) ds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KatoQuadrature {
    /// Per-mode closed form `(1 − e^{−λt})/λ`; exact for the discrete semigroup.
    Exact,
    /// Composite trapezoid on a log-spaced grid `[t·1e−4, t]` plus the node 0.
    LogTrapezoid { nodes: usize },
}

impl Default for KatoQuadrature {
    fn default() -> Self {
        KatoQuadrature::Exact
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatoProfile {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `max V` of the potential, used to bracket the small-time tail of `Φ`.
    pub potential_max: f64,
    pub quadrature: KatoQuadrature,
}

fn check_potential(hk: &HeatKernel, v: &PotentialField) -> Result<()> {
    if v.len() != hk.space().vertex_count() {
        return invalid("potential length does not match the space");
    }
    Ok(())
}

fn psi(l: f64, t: f64) -> f64 {
    if l.abs() * t < 1e-300 {
        t
    } else {
        -(-l * t).exp_m1() / l
    }
}

/// `F_x(t) = ∫_0^t Σ_y H(s,x,y) V_y μ_y ds` for every basepoint `x`.
pub fn kato_field(hk: &HeatKernel, v: &PotentialField, t: f64) -> Result<Vec<f64>> {
    check_potential(hk, v)?;
    if !(t > 0.0) {
        return invalid("time must be positive");
    }
    let c = hk.coefficients(v.values());
    let a: Vec<f64> = c.iter().zip(&hk.spectral().eigenvalues).map(|(c, &l)| c * psi(l, t)).collect();
    Ok(hk.synthesize(&a))
}

fn max0(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

fn log_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count).map(|j| lo * (hi / lo).powf(j as f64 / (count - 1) as f64)).collect()
}

/// Values `g_x(s) = Σ_y H(s,x,y)V_yμ_y` at every basepoint for the given nodes (`s = 0` allowed).
fn integrand_rows(hk: &HeatKernel, coeff: &[f64], v: &PotentialField, nodes: &[f64]) -> Vec<Vec<f64>> {
    nodes
        .par_iter()
        .map(|&s| {
            if s == 0.0 {
                v.values().to_vec()
            } else {
                let a: Vec<f64> = coeff.iter().zip(&hk.spectral().eigenvalues).map(|(c, l)| c * (-l * s).exp()).collect();
                hk.synthesize(&a)
            }
        })
        .collect()
}

/// Cumulative trapezoid integrals at `targets` (all must be nodes).
fn cumulative_trapezoid(nodes: &[f64], rows: &[Vec<f64>], targets: &[f64]) -> Vec<Vec<f64>> {
    let n = rows[0].len();
    let mut acc = vec![0.0; n];
    let mut out = Vec::with_capacity(targets.len());
    let mut ti = 0;
    for j in 0..nodes.len() {
        if j > 0 {
            let h = nodes[j] - nodes[j - 1];
            for x in 0..n {
                acc[x] += 0.5 * h * (rows[j][x] + rows[j - 1][x]);
            }
        }
        while ti < targets.len() && targets[ti] == nodes[j] {
            out.push(acc.clone());
            ti += 1;
        }
    }
    out
}

pub fn kato_constant(hk: &HeatKernel, v: &PotentialField, t: f64) -> Result<f64> {
    kato_constant_with(hk, v, t, KatoQuadrature::Exact)
}

pub fn kato_constant_with(hk: &HeatKernel, v: &PotentialField, t: f64, quad: KatoQuadrature) -> Result<f64> {
    Ok(kato_profile_with(hk, v, &[t], quad)?.values[0])
}

pub fn kato_profile(hk: &HeatKernel, v: &PotentialField, grid: &[f64]) -> Result<KatoProfile> {
    kato_profile_with(hk, v, grid, KatoQuadrature::Exact)
}

/// `k_t` on an increasing positive grid. Under the trapezoid rule all grid
/// times share one node set, so the profile is nondecreasing by construction.
pub fn kato_profile_with(hk: &HeatKernel, v: &PotentialField, grid: &[f64], quad: KatoQuadrature) -> Result<KatoProfile> {
    check_potential(hk, v)?;
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("time grid must be positive and strictly increasing");
    }
    let values = match quad {
        KatoQuadrature::Exact => grid.iter().map(|&t| kato_field(hk, v, t).map(|f| max0(&f))).collect::<Result<Vec<_>>>()?,
        KatoQuadrature::LogTrapezoid { nodes } => {
            let last = *grid.last().unwrap();
            let decades = (last / grid[0]).log10().max(0.0);
            let count = ((nodes as f64) * (1.0 + decades / 4.0)).ceil() as usize;
            let mut all = log_nodes(grid[0] * 1e-4, last, count);
            all.extend_from_slice(grid);
            all.push(0.0);
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            all.dedup();
            let coeff = hk.coefficients(v.values());
            let rows = integrand_rows(hk, &coeff, v, &all);
            cumulative_trapezoid(&all, &rows, grid).iter().map(|f| max0(f)).collect()
        }
    };
    Ok(KatoProfile { times: grid.to_vec(), values, potential_max: v.max(), quadrature: quad })
}

/// `k_{p,T} = (max_x T^{p−1} ∫_0^T Σ_y H V^p μ ds)^{1/p}`.
pub fn kato_lp(hk: &HeatKernel, v: &PotentialField, t_big: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid("p must be at least 1");
    }
    if !(t_big > 0.0) {
        return invalid("T must be positive");
    }
    let vp = v.powf(p);
    let f = max0(&kato_field(hk, &vp, t_big)?);
    Ok((t_big.powf(p - 1.0) * f).powf(1.0 / p))
}

impl KatoProfile {
    /// `k_τ` by power-law interpolation between nodes and linear vanishing below the first node.
    pub fn value_at(&self, tau: f64) -> Result<f64> {
        let (t, k) = (&self.times, &self.values);
        let last = *t.last().unwrap();
        if !(tau > 0.0) || tau > last * (1.0 + 1e-12) {
            return invalid(format!("τ = {tau} outside profile range (0, {last}]"));
        }
        if tau <= t[0] {
            return Ok(k[0] * tau / t[0]);
        }
        let j = t.partition_point(|&s| s < tau).min(t.len() - 1);
        let (t0, t1, k0, k1) = (t[j - 1], t[j], k[j - 1], k[j]);
        if k0 > 0.0 && k1 > 0.0 {
            let q = (k1 / k0).ln() / (t1 / t0).ln();
            Ok(k0 * (tau / t0).powf(q))
        } else {
            Ok(k0 + (k1 - k0) * (tau - t0) / (t1 - t0))
        }
    }
}

/// `Φ(T) = ∫_0^T √k_s / s ds` with a bracket for the unresolved tail below the first node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongKato {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub divergent: bool,
}

pub fn strong_kato_integral(profile: &KatoProfile, t_big: f64) -> Result<StrongKato> {
    let (t, k) = (&profile.times, &profile.values);
    let last = *t.last().unwrap();
    if t_big > last * (1.0 + 1e-12) {
        return invalid(format!("profile ends at {last}, before T = {t_big}"));
    }
    if !(t_big > 0.0) {
        return invalid("T must be positive");
    }
    if t_big <= t[0] {
        let kt = profile.value_at(t_big)?;
        let est = 2.0 * kt.sqrt();
        return Ok(StrongKato { value: est, lower: 0.0, upper: tail_upper(profile, t_big, est), divergent: false });
    }
    let mut nodes: Vec<(f64, f64)> = t.iter().copied().zip(k.iter().copied()).filter(|&(s, _)| s < t_big).collect();
    nodes.push((t_big, profile.value_at(t_big)?));
    let mut main = 0.0;
    for w in nodes.windows(2) {
        let ((s0, k0), (s1, k1)) = (w[0], w[1]);
        let (g0, g1, lr) = (k0.max(0.0).sqrt(), k1.max(0.0).sqrt(), (s1 / s0).ln());
        main += if g0 > 0.0 && g1 > 0.0 {
            let p = (g1 / g0).ln() / lr;
            if p.abs() < 1e-12 {
                g0 * lr
            } else {
                (g1 - g0) / p
            }
        } else {
            0.5 * (g0 + g1) * lr
        };
    }
    let (t1, k1) = nodes[0];
    let divergent = k1 > 0.0 && nodes.len() > 2 && {
        let q = (nodes[1].1 / k1).ln() / (nodes[1].0 / t1).ln();
        q < 0.05
    };
    if divergent {
        return Ok(StrongKato { value: f64::INFINITY, lower: main, upper: f64::INFINITY, divergent });
    }
    let est = 2.0 * k1.max(0.0).sqrt();
    Ok(StrongKato { value: main + est, lower: main, upper: main + tail_upper(profile, t1, est), divergent })
}

fn tail_upper(profile: &KatoProfile, t1: f64, est: f64) -> f64 {
    if profile.potential_max.is_finite() {
        (2.0 * (profile.potential_max * t1).sqrt()).max(est)
    } else {
        f64::INFINITY
    }
}

/// `Γ_τ = e^{8√(n k_τ)} − 1`.
pub fn gamma_tau(profile: &KatoProfile, tau: f64, n: usize) -> Result<f64> {
    Ok(gamma_from_k(profile.value_at(tau)?, n))
}

pub fn gamma_from_k(k: f64, n: usize) -> f64 {
    (8.0 * (n as f64 * k.max(0.0)).sqrt()).exp_m1()
}

/// Dynkin threshold `1/(16n)`.
pub fn dynkin_threshold(n: usize) -> f64 {
    1.0 / (16.0 * n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynkinVerdict {
    #[serde(rename = "T")]
    pub t: f64,
    pub k_t: f64,
    pub holds: bool,
    /// `1 − 16n·k_T`; positive when the bound holds.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundClassification {
    pub dynkin: DynkinVerdict,
    pub envelope: KatoProfile,
    pub strong: StrongKato,
    /// `Λ = Φ(T)` when finite.
    pub lambda: Option<f64>,
    /// `min_x μ(B_{√T}(x)) / T^{n/2}`.
    pub v: f64,
    pub n: usize,
    /// Time at which `k_t` reaches `1/(16n)`, when found.
    pub crossing: Option<f64>,
}

/// Classification export `{dynkin: {T, margin}, lambda, v, n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationExport {
    pub dynkin: DynkinExport,
    pub lambda: Option<f64>,
    pub v: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynkinExport {
    #[serde(rename = "T")]
    pub t: f64,
    pub margin: f64,
}

impl BoundClassification {
    pub fn export(&self) -> ClassificationExport {
        ClassificationExport {
            dynkin: DynkinExport { t: self.dynkin.t, margin: self.dynkin.margin },
            lambda: self.lambda,
            v: self.v,
            n: self.n,
        }
    }
}

/// Smallest time where `k_t = 1/(16n)`, searched up to `2^40·t_start`.
pub fn dynkin_crossing(hk: &HeatKernel, v: &PotentialField, n: usize, t_start: f64) -> Result<Option<f64>> {
    let thr = dynkin_threshold(n);
    let k = |t: f64| kato_constant(hk, v, t);
    let (mut lo, mut hi) = (0.0, t_start);
    if k(hi)? <= thr {
        let mut found = false;
        for _ in 0..40 {
            lo = hi;
            hi *= 2.0;
            if k(hi)? > thr {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(None);
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if k(mid)? > thr {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

pub fn classify_bounds(hk: &HeatKernel, v: &PotentialField, t_big: f64, n: usize) -> Result<BoundClassification> {
    if !(t_big > 0.0) {
        return invalid("T must be positive");
    }
    let grid = log_nodes(t_big * 1e-4, t_big, 33);
    let envelope = kato_profile(hk, v, &grid)?;
    let k_t = *envelope.values.last().unwrap();
    let margin = 1.0 - 16.0 * n as f64 * k_t;
    let strong = strong_kato_integral(&envelope, t_big)?;
    let space = hk.space();
    let r = t_big.sqrt();
    let v_nc = (0..space.vertex_count())
        .into_par_iter()
        .map(|x| space.ball_from_row(x, &space.distances_from(x), r).measure)
        .reduce(|| f64::INFINITY, f64::min)
        / t_big.powf(n as f64 / 2.0);
    Ok(BoundClassification {
        dynkin: DynkinVerdict { t: t_big, k_t, holds: margin >= 0.0, margin },
        lambda: (!strong.divergent).then_some(strong.value),
        strong,
        envelope,
        v: v_nc,
        n,
        crossing: dynkin_crossing(hk, v, n, t_big)?,
    })
}

/// CSV `t,k_t,phi_t,gamma_t`.
pub fn profile_csv(profile: &KatoProfile, n: usize) -> Result<String> {
    let mut s = String::from("t,k_t,phi_t,gamma_t\n");
    for (&t, &k) in profile.times.iter().zip(&profile.values) {
        let phi = strong_kato_integral(profile, t)?.value;
        s.push_str(&format!("{t:e},{k:e},{phi:e},{:e}\n", gamma_from_k(k, n)));
    }
    Ok(s)
}
