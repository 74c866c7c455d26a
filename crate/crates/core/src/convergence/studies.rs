use super::gh::ball_gh_to_euclidean;
use crate::entropy::{big_theta_row, omega};
use crate::error::{invalid, Result};
use crate::geometry::DiscreteSpace;
use crate::heat::spectrum;
use crate::report::{ReportBuilder, VerificationReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Rejects families whose basepoints are not matched: mesh levels must place them within
/// one edge length of the first level's basepoint.
pub fn matched_basepoints(family: &[&DiscreteSpace], xs: &[usize]) -> Result<()> {
    if family.is_empty() || family.len() != xs.len() {
        return invalid("one basepoint per family member is required");
    }
    for (k, (s, &x)) in family.iter().zip(xs).enumerate() {
        s.check_vertex(x)?;
        if k == 0 {
            continue;
        }
        if let (Some(a), Some(b)) = (family[0].mesh(), s.mesh()) {
            let (p, q) = (a.surface.positions[xs[0]], b.surface.positions[x]);
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
            let h = family[0].max_edge_length().max(s.max_edge_length());
            if d > h {
                return invalid(format!("basepoint of level {k} is {d:e} away from level 0"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralStudy {
    /// First `m` eigenvalues (including `λ_0 = 0`) per level.
    pub levels: Vec<Vec<f64>>,
    /// `|λ_k(level) − λ_k(level − 1)|` per level from the second on.
    pub gaps: Vec<Vec<f64>>,
    /// Relative errors against `targets` at the finest level, when given.
    pub final_errors: Option<Vec<f64>>,
    pub report: VerificationReport,
}

impl SpectralStudy {
    /// CSV `level,k,lambda`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,k,lambda\n");
        for (l, ev) in self.levels.iter().enumerate() {
            for (k, v) in ev.iter().enumerate() {
                s.push_str(&format!("{l},{k},{v:e}\n"));
            }
        }
        s
    }
}

/// Eigenvalue table along a refinement family. Passes when successive gaps shrink for every
/// nonzero mode (relative slack `tol`) and, with `targets`, the finest level is within `tol`.
pub fn spectral_convergence_study(family: &[&DiscreteSpace], m: usize, targets: Option<&[f64]>, tol: f64) -> Result<SpectralStudy> {
    if family.is_empty() {
        return invalid("empty family");
    }
    let levels = family
        .iter()
        .map(|s| spectrum(s, m.min(s.vertex_count())).map(|sp| sp.eigenvalues))
        .collect::<Result<Vec<_>>>()?;
    let m = levels.iter().map(|l| l.len()).min().unwrap();
    let gaps: Vec<Vec<f64>> = levels.windows(2).map(|w| (0..m).map(|k| (w[1][k] - w[0][k]).abs()).collect()).collect();
    let mut b = ReportBuilder::new("spectral_convergence", format!("{} levels × {m} modes", family.len()), tol);
    for (l, w) in gaps.windows(2).enumerate() {
        for k in 1..m {
            let scale = levels.last().unwrap()[k].abs().max(f64::MIN_POSITIVE);
            b.push(format!("level={},k={k}", l + 2), (w[0][k] - w[1][k]) / scale, false);
        }
    }
    let final_errors = match targets {
        Some(t) => {
            let fin = levels.last().unwrap();
            let errs: Vec<f64> = (0..m.min(t.len()))
                .map(|k| if t[k] == 0.0 { fin[k].abs() } else { (fin[k] - t[k]).abs() / t[k].abs() })
                .collect();
            for (k, e) in errs.iter().enumerate() {
                b.push(format!("target k={k}"), tol - e, false);
            }
            Some(errs)
        }
        None => None,
    };
    Ok(SpectralStudy { levels, gaps, final_errors, report: b.finish() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub eps: f64,
    /// Rescaled radii `r ∈ [1/2, 2]`.
    pub radii: Vec<f64>,
    /// `μ(B_{εr}(x)) / (ω_n (εr)ⁿ)`.
    pub ratios: Vec<f64>,
    /// `(max − min)/mean` of the ratio curve.
    pub cone_defect: f64,
    /// GH upper bound between `B_ε(x)` and the Euclidean ball, divided by `ε`.
    pub gh_defect: f64,
    /// `(max − min)/mean` of `Θ_x(s)` over `s = (εr)²`.
    pub theta_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentProbe {
    pub center: usize,
    pub rows: Vec<ProbeRow>,
    /// Scales below 5 mean edge lengths.
    pub excluded: Vec<f64>,
}

impl TangentProbe {
    /// CSV `eps,r,ratio,gh_defect,theta_defect`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,r,ratio,gh_defect,theta_defect\n");
        for row in &self.rows {
            for (r, q) in row.radii.iter().zip(&row.ratios) {
                s.push_str(&format!("{:e},{r:e},{q:e},{:e},{:e}\n", row.eps, row.gh_defect, row.theta_defect));
            }
        }
        s
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if mean == 0.0 {
        0.0
    } else {
        (max - min) / mean
    }
}

/// How nearly the rescalings `(X, ε⁻¹d, ε⁻ⁿμ, x)` look like a metric cone, for a decreasing `ε_grid`.
pub fn tangent_probe(space: &DiscreteSpace, x: usize, eps_grid: &[f64], gh_samples: usize) -> Result<TangentProbe> {
    space.check_vertex(x)?;
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("ε grid must be decreasing");
    }
    let n = space.dim();
    let dist = space.distances_from(x);
    let floor = 5.0 * space.mean_edge_length();
    let radii: Vec<f64> = (0..9).map(|j| 0.5 * 4f64.powf(j as f64 / 8.0)).collect();
    let mut excluded = Vec::new();
    let kept: Vec<f64> = eps_grid
        .iter()
        .copied()
        .filter(|&e| {
            let ok = e >= floor;
            if !ok {
                excluded.push(e);
            }
            ok
        })
        .collect();
    let rows = kept
        .par_iter()
        .map(|&eps| {
            let ratios: Vec<f64> = radii
                .iter()
                .map(|r| space.ball_from_row(x, &dist, eps * r).measure / (omega(n) * (eps * r).powi(n as i32)))
                .collect();
            let thetas = radii.iter().map(|r| big_theta_row(space, &dist, (eps * r).powi(2))).collect::<Result<Vec<_>>>()?;
            let gh = ball_gh_to_euclidean(space, x, eps, n, gh_samples)?;
            Ok(ProbeRow {
                eps,
                radii: radii.clone(),
                cone_defect: spread(&ratios),
                ratios,
                gh_defect: gh.upper / eps,
                theta_defect: spread(&thetas),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentProbe { center: x, rows, excluded })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeContinuity {
    pub r: f64,
    pub volumes: Vec<f64>,
    pub target: Option<f64>,
    pub report: VerificationReport,
}

/// Ball volumes `μ(B_r(x_level))` along a family. With a target, the finest level must be
/// within `tol` relative; successive differences must not grow by more than `tol·|v_final|`.
pub fn volume_continuity_check(family: &[&DiscreteSpace], xs: &[usize], r: f64, target: Option<f64>, tol: f64) -> Result<VolumeContinuity> {
    matched_basepoints(family, xs)?;
    let volumes: Vec<f64> = family.iter().zip(xs).map(|(s, &x)| s.ball(x, r).map(|b| b.measure)).collect::<Result<_>>()?;
    let last = *volumes.last().unwrap();
    let mut b = ReportBuilder::new("volume_continuity", format!("{} levels, r={r:e}", family.len()), tol);
    let diffs: Vec<f64> = volumes.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    for (l, w) in diffs.windows(2).enumerate() {
        b.push(format!("cauchy level={}", l + 2), (w[0] - w[1]) / last.abs(), false);
    }
    if let Some(t) = target {
        b.push("target", tol - (last - t).abs() / t.abs(), false);
    }
    Ok(VolumeContinuity { r, volumes, target, report: b.finish() })
}
