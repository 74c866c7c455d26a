use super::{heat_trace_quantity, theta};
use crate::error::{invalid, Result};
use crate::heat::HeatKernel;
use crate::kato::{strong_kato_integral, KatoProfile};
use crate::report::{ReportBuilder, VerificationReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub theta_raw: f64,
    pub theta_corrected: f64,
    /// Below the trusted time range; not used for the verdict.
    pub excluded: bool,
    pub tainted: bool,
    /// Whether the step from the previous trusted row (smaller λ) respects the orientation.
    pub step_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityScan {
    pub basepoint: usize,
    pub s: f64,
    pub t: f64,
    pub c_n: f64,
    pub big_lambda: f64,
    pub lambda_bar: f64,
    /// `true` when the corrected sequence should be nondecreasing in λ (`t ≥ s`).
    pub nondecreasing: bool,
    /// Rows in increasing λ.
    pub rows: Vec<ScanRow>,
    pub report: VerificationReport,
}

impl MonotonicityScan {
    /// CSV `lambda,theta_raw,theta_corrected,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,theta_raw,theta_corrected,verdict\n");
        for r in &self.rows {
            let v = match (r.excluded, r.step_ok) {
                (true, _) => "excluded",
                (false, None) => "start",
                (false, Some(true)) => "ok",
                (false, Some(false)) => "violation",
            };
            out.push_str(&format!("{:e},{:e},{:e},{v}\n", r.lambda, r.theta_raw, r.theta_corrected));
        }
        out
    }
}

fn phi_at(profile: &KatoProfile, tau: f64) -> Result<f64> {
    if profile.values.iter().all(|&k| k == 0.0) {
        return Ok(0.0);
    }
    Ok(strong_kato_integral(profile, tau)?.value)
}

/// Scans `λ ↦ θ_x(λs, λt)·exp(c_n Φ(λt)(t/s − s/t))` for `λ ≤ λ̄`, which is
/// nondecreasing when `t ≥ s` and nonincreasing when `t ≤ s`. Per-step tolerance
/// is `1e−4` relative.
pub fn monotonicity_scan(
    hk: &HeatKernel,
    profile: &KatoProfile,
    x: usize,
    s: f64,
    t: f64,
    lambda_grid: Option<&[f64]>,
    c_n: f64,
) -> Result<MonotonicityScan> {
    if !(s > 0.0 && t > 0.0) {
        return invalid("s and t must be positive");
    }
    hk.space().check_vertex(x)?;
    let n = hk.space().dim() as f64;
    let t_end = *profile.times.last().unwrap();
    let strong = if profile.values.iter().all(|&k| k == 0.0) {
        None
    } else {
        Some(strong_kato_integral(profile, t_end)?)
    };
    let samples = format!("x={x}, s={s:e}, t={t:e}");
    let big_lambda = strong.map_or(0.0, |s| s.value);
    if !big_lambda.is_finite() {
        let r = VerificationReport::inconclusive("monotonicity", &samples, "strong Kato integral diverges");
        return Ok(MonotonicityScan {
            basepoint: x,
            s,
            t,
            c_n,
            big_lambda,
            lambda_bar: 0.0,
            nondecreasing: t >= s,
            rows: Vec::new(),
            report: r,
        });
    }
    let lambda_bar = (-c_n * big_lambda * s / t).exp().min((-4.0 * n.sqrt() * big_lambda).exp());
    let grid: Vec<f64> = match lambda_grid {
        Some(g) => {
            if g.iter().any(|&l| !(l > 0.0) || l > lambda_bar * (1.0 + 1e-12)) || g.windows(2).any(|w| w[1] >= w[0]) {
                return invalid(format!("λ grid must be decreasing within (0, {lambda_bar:e}]"));
            }
            g.to_vec()
        }
        None => (0..16).map(|j| lambda_bar * 0.01f64.powf(j as f64 / 15.0)).collect(),
    };
    let t_min = hk.t_min();
    let zero = strong.is_none();
    let mut rows = grid
        .par_iter()
        .map(|&l| {
            let th = theta(hk, l * s, l * t, x)?;
            let phi = if zero {
                0.0
            } else {
                if l * t > t_end * (1.0 + 1e-12) {
                    return invalid(format!("profile ends at {t_end:e}, before λt = {:e}", l * t));
                }
                phi_at(profile, l * t)?
            };
            let corr = (c_n * phi * (t / s - s / t)).exp();
            Ok(ScanRow {
                lambda: l,
                theta_raw: th.value,
                theta_corrected: th.value * corr,
                excluded: l * s.min(t) < t_min,
                tainted: th.is_tainted(),
                step_ok: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.reverse();
    let nondecreasing = t >= s;
    let sign = if nondecreasing { 1.0 } else { -1.0 };
    let tol = 1e-4;
    let mut b = ReportBuilder::new("monotonicity", samples.clone(), tol);
    let mut prev: Option<usize> = None;
    for j in 0..rows.len() {
        if rows[j].excluded {
            continue;
        }
        if let Some(p) = prev {
            let margin = sign * (rows[j].theta_corrected - rows[p].theta_corrected) / rows[p].theta_corrected.abs();
            let tainted = rows[j].tainted || rows[p].tainted;
            rows[j].step_ok = Some(margin >= -tol);
            b.push(format!("lambda={:e}", rows[j].lambda), margin, tainted);
        }
        prev = Some(j);
    }
    let trusted = rows.iter().filter(|r| !r.excluded).count();
    let report = if trusted < 2 {
        VerificationReport::inconclusive(
            "monotonicity",
            &samples,
            format!("{trusted} λ values above the trusted time {t_min:e}; λ̄ = {lambda_bar:e} is below resolution"),
        )
    } else {
        if trusted < rows.len() {
            b.note(format!("{} λ values excluded below t_min = {t_min:e}", rows.len() - trusted));
        }
        b.finish()
    };
    Ok(MonotonicityScan { basepoint: x, s, t, c_n, big_lambda, lambda_bar, nondecreasing, rows, report })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceScan {
    pub basepoint: usize,
    pub times: Vec<f64>,
    /// `(4πt)^{n/2} H(t,x,x)`.
    pub values: Vec<f64>,
    pub phi: Vec<f64>,
    /// Largest relative deviation from `θ_x(t/4, t/2)`.
    pub identity_residual: f64,
    pub raw_monotone: bool,
    /// Smallest `η` making `exp(Φ(t)/η)·value` nondecreasing; `None` when no `η` works.
    pub eta: Option<f64>,
}

pub fn heat_trace_scan(hk: &HeatKernel, profile: &KatoProfile, x: usize, t_grid: &[f64]) -> Result<HeatTraceScan> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("t grid must be increasing");
    }
    let mut values = Vec::new();
    let mut phi = Vec::new();
    let mut resid: f64 = 0.0;
    for &t in t_grid {
        let q = heat_trace_quantity(hk, x, t)?;
        let th = theta(hk, t / 4.0, t / 2.0, x)?.value;
        resid = resid.max((q - th).abs() / q.abs());
        values.push(q);
        phi.push(phi_at(profile, t)?);
    }
    let raw_monotone = values.windows(2).all(|w| w[1] >= w[0]);
    // need (Φ_{j+1} − Φ_j)/η ≥ ln q_j − ln q_{j+1} for every step
    let mut inv_eta: f64 = 0.0;
    let mut feasible = true;
    for j in 0..values.len().saturating_sub(1) {
        let need = values[j].ln() - values[j + 1].ln();
        if need > 0.0 {
            let d = phi[j + 1] - phi[j];
            if d > 0.0 {
                inv_eta = inv_eta.max(need / d);
            } else {
                feasible = false;
            }
        }
    }
    let eta = if !feasible {
        None
    } else if inv_eta == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(1.0 / inv_eta)
    };
    Ok(HeatTraceScan { basepoint: x, times: t_grid.to_vec(), values, phi, identity_residual: resid, raw_monotone, eta })
}
