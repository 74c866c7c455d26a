//! Heat-kernel entropies: `U`, the θ- and Θ-volumes, the heat-trace quantity,
//! almost-monotonicity scans and the volume density.

mod density;
mod scan;

pub use density::{density_lsc_probe, volume_density, DensityEstimate, LscProbe};
pub use scan::{heat_trace_scan, monotonicity_scan, HeatTraceScan, MonotonicityScan, ScanRow};

use crate::error::{invalid, Result};
use crate::geometry::DiscreteSpace;
use crate::heat::HeatKernel;
use crate::report::{ReportBuilder, VerificationReport};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `Γ(n/2 + 1)` for integer `n ≥ 0`.
fn gamma_half_plus_one(n: usize) -> f64 {
    if n % 2 == 0 {
        (1..=n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt() / 2.0;
        let mut k = 1.5;
        while k <= n as f64 / 2.0 + 1e-9 {
            g *= k;
            k += 1.0;
        }
        g
    }
}

/// Volume of the unit ball in `R^n`, `π^{n/2}/Γ(n/2+1)`.
pub fn omega(n: usize) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half_plus_one(n)
}

/// `(b_n, c_n)` with `b_n = sup_{0<r≤1/(16n)} (e^{8√(nr)} − 1)/√r`, attained at the
/// right endpoint, and `c_n = n·b_n`.
pub fn derive_cn(n: usize) -> (f64, f64) {
    let r = 1.0 / (16.0 * n as f64);
    let b = (8.0 * (n as f64 * r).sqrt()).exp_m1() / r.sqrt();
    (b, n as f64 * b)
}

fn heat_scale(n: usize, t: f64) -> f64 {
    (4.0 * PI * t).powf(n as f64 / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UField {
    pub values: Vec<f64>,
    /// Entries whose kernel value was raised to the clamp floor.
    pub clamped: Vec<usize>,
    pub truncation_tainted: bool,
}

/// `U(t,x,y) = −4t·log((4πt)^{n/2} H(t,x,y))`.
pub fn u_function(hk: &HeatKernel, t: f64, x: usize) -> Result<UField> {
    let raw = hk.kernel_row(t, x)?;
    if !raw.iter().any(|&h| h > 0.0) {
        return invalid(format!("heat kernel row at t = {t} has no positive entry"));
    }
    let (row, info) = hk.kernel_row_clamped(t, x)?;
    let clamped: Vec<usize> = raw.iter().enumerate().filter(|(_, &h)| h < info.floor).map(|(y, _)| y).collect();
    let c = heat_scale(hk.space().dim(), t);
    Ok(UField {
        values: row.iter().map(|h| -4.0 * t * (c * h).ln()).collect(),
        clamped,
        truncation_tainted: hk.truncation_tainted(t),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: f64,
    pub clamped: usize,
    pub truncation_tainted: bool,
}

impl ThetaValue {
    pub fn is_tainted(&self) -> bool {
        self.clamped > 0 || self.truncation_tainted
    }
}

/// `θ_x(s,t) = (4πs)^{−n/2} Σ_y ((4πt)^{n/2} H(t,x,y))^{t/s} μ_y`.
pub fn theta(hk: &HeatKernel, s: f64, t: f64, x: usize) -> Result<ThetaValue> {
    if !(s > 0.0 && t > 0.0) {
        return invalid("s and t must be positive");
    }
    let (row, info) = hk.kernel_row_clamped(t, x)?;
    let n = hk.space().dim();
    let (ct, q) = (heat_scale(n, t), t / s);
    let sum: f64 = row.iter().zip(hk.space().measure()).map(|(h, m)| (ct * h).powf(q) * m).sum();
    Ok(ThetaValue { value: sum / heat_scale(n, s), clamped: info.clamped, truncation_tainted: hk.truncation_tainted(t) })
}

/// `Θ_x(s) = (4πs)^{−n/2} Σ_y e^{−d²(x,y)/4s} μ_y`.
pub fn big_theta(space: &DiscreteSpace, s: f64, x: usize) -> Result<f64> {
    space.check_vertex(x)?;
    big_theta_row(space, &space.distances_from(x), s)
}

pub fn big_theta_row(space: &DiscreteSpace, dist: &[f64], s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return invalid("s must be positive");
    }
    let sum: f64 = dist.iter().zip(space.measure()).map(|(d, m)| (-d * d / (4.0 * s)).exp() * m).sum();
    Ok(sum / heat_scale(space.dim(), s))
}

/// Θ through Cavalieri's formula over the sorted distance values:
/// `Σ_k (e^{−d_k²/4s} − e^{−d_{k+1}²/4s}) μ(B̄_{d_k})`.
pub fn big_theta_cavalieri(space: &DiscreteSpace, dist: &[f64], s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return invalid("s must be positive");
    }
    let mut pairs: Vec<(f64, f64)> = dist.iter().copied().zip(space.measure().iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let g = |d: f64| (-d * d / (4.0 * s)).exp();
    let mut sum = 0.0;
    let mut vol = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let d = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == d {
            vol += pairs[i].1;
            i += 1;
        }
        let next = if i < pairs.len() { g(pairs[i].0) } else { 0.0 };
        sum += (g(d) - next) * vol;
    }
    Ok(sum / heat_scale(space.dim(), s))
}

/// `(4πt)^{n/2} H(t,x,x)`, equal to `θ_x(t/4, t/2)` by Chapman–Kolmogorov.
pub fn heat_trace_quantity(hk: &HeatKernel, x: usize, t: f64) -> Result<f64> {
    Ok(heat_scale(hk.space().dim(), t) * hk.kernel(t, x, x)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyGrid {
    pub basepoint: usize,
    pub n: usize,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    /// `theta[i][j] = θ_x(s_i, t_j)`.
    pub theta: Vec<Vec<f64>>,
    pub big_theta: Vec<f64>,
    pub taints: Vec<String>,
}

pub fn entropy_grid(hk: &HeatKernel, x: usize, s_grid: &[f64], t_grid: &[f64]) -> Result<EntropyGrid> {
    let mut taints = Vec::new();
    let u = t_grid
        .iter()
        .map(|&t| {
            let f = u_function(hk, t, x)?;
            if !f.clamped.is_empty() {
                taints.push(format!("t={t:e}: {} clamped kernel entries", f.clamped.len()));
            }
            if f.truncation_tainted {
                taints.push(format!("t={t:e}: spectral truncation"));
            }
            Ok(f.values)
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = s_grid
        .iter()
        .map(|&s| t_grid.iter().map(|&t| theta(hk, s, t, x).map(|v| v.value)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let dist = hk.space().distances_from(x);
    let big_theta = s_grid.iter().map(|&s| big_theta_row(hk.space(), &dist, s)).collect::<Result<Vec<_>>>()?;
    Ok(EntropyGrid {
        basepoint: x,
        n: hk.space().dim(),
        s_grid: s_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        u,
        theta,
        big_theta,
        taints,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaLimit {
    pub s: f64,
    pub big_theta: f64,
    pub t_grid: Vec<f64>,
    pub gaps: Vec<f64>,
    pub report: VerificationReport,
}

/// Tabulates `|θ_x(s,t) − Θ_x(s)|` along a decreasing `t_grid`; passes when the gap
/// does not grow by more than `tol` from one step to the next.
pub fn theta_limit_check(hk: &HeatKernel, s: f64, x: usize, t_grid: &[f64], tol: f64) -> Result<ThetaLimit> {
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("t_grid must be decreasing");
    }
    let bt = big_theta(hk.space(), s, x)?;
    let mut b = ReportBuilder::new("theta_limit", format!("x={x}, s={s:e}, {} times", t_grid.len()), tol);
    let mut gaps = Vec::with_capacity(t_grid.len());
    for (j, &t) in t_grid.iter().enumerate() {
        let th = theta(hk, s, t, x)?;
        let gap = (th.value - bt).abs();
        if th.is_tainted() {
            b.taint(format!("t={t:e} tainted"));
        }
        if j > 0 {
            b.push(format!("t={t:e}"), gaps[j - 1] - gap, th.is_tainted());
        }
        gaps.push(gap);
    }
    if t_grid.len() == 1 {
        b.push(format!("t={:e}", t_grid[0]), tol - gaps[0], false);
    }
    Ok(ThetaLimit { s, big_theta: bt, t_grid: t_grid.to_vec(), gaps, report: b.finish() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_values() {
        assert!((omega(1) - 2.0).abs() < 1e-15);
        assert!((omega(2) - PI).abs() < 1e-15);
        assert!((omega(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((omega(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!((omega(5) - 8.0 * PI * PI / 15.0).abs() < 1e-13);
    }

    #[test]
    fn cn_closed_form() {
        let e2 = 2f64.exp() - 1.0;
        for n in 1..6 {
            let (b, c) = derive_cn(n);
            assert!((b - 4.0 * (n as f64).sqrt() * e2).abs() < 1e-12 * b);
            assert!((c - n as f64 * b).abs() < 1e-12 * c);
            // maximand increases on (0, 1/(16n)]
            let f = |r: f64| (8.0 * (n as f64 * r).sqrt()).exp_m1() / r.sqrt();
            let r_end = 1.0 / (16.0 * n as f64);
            for k in 1..1000 {
                let r = r_end * k as f64 / 1000.0;
                assert!(f(r) <= b * (1.0 + 1e-12));
            }
        }
    }
}
