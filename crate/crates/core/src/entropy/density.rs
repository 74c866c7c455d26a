use super::{big_theta_row, omega};
use crate::convergence::matched_basepoints;
use crate::error::{invalid, Result};
use crate::geometry::DiscreteSpace;
use crate::report::{ReportBuilder, VerificationReport};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub basepoint: usize,
    pub radii: Vec<f64>,
    pub ball_volumes: Vec<f64>,
    /// `μ(B_r) / (ω_n rⁿ)`.
    pub ratios: Vec<f64>,
    pub trusted: Vec<bool>,
    /// Extrapolated `ϑ`.
    pub density: f64,
    pub uncertainty: f64,
    /// `Θ_x(s)` at `s = r_min²`.
    pub big_theta_check: f64,
    pub notes: Vec<String>,
}

impl DensityEstimate {
    /// CSV `r,ball_volume,ratio`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,ball_volume,ratio\n");
        for ((r, v), q) in self.radii.iter().zip(&self.ball_volumes).zip(&self.ratios) {
            s.push_str(&format!("{r:e},{v:e},{q:e}\n"));
        }
        s
    }
}

/// Two-radius extrapolation assuming `ratio = ϑ + c r²`.
fn richardson(r0: f64, q0: f64, r1: f64, q1: f64) -> f64 {
    (r1 * r1 * q0 - r0 * r0 * q1) / (r1 * r1 - r0 * r0)
}

/// `ϑ` as the intercept of a least-squares fit `ratio ≈ ϑ + c r²` over radii in
/// `[3·mean edge, diam/4]`; the uncertainty is the larger of the fit's standard error
/// and the spread of the three smallest-radius pairwise Richardson estimates.
pub fn volume_density(space: &DiscreteSpace, x: usize, r_grid: Option<&[f64]>) -> Result<DensityEstimate> {
    space.check_vertex(x)?;
    let n = space.dim();
    let dist = space.distances_from(x);
    let lo = 3.0 * space.mean_edge_length();
    let hi = space.diameter_estimate() / 4.0;
    let radii: Vec<f64> = match r_grid {
        Some(g) => {
            if g.is_empty() || g.iter().any(|&r| !(r > 0.0)) || g.windows(2).any(|w| w[1] <= w[0]) {
                return invalid("radius grid must be positive and increasing");
            }
            g.to_vec()
        }
        None => {
            if lo >= hi {
                return invalid(format!("space too coarse: 3·mean edge {lo:e} exceeds diam/4 {hi:e}"));
            }
            (0..16).map(|j| lo * (hi / lo).powf(j as f64 / 15.0)).collect()
        }
    };
    let mut notes = Vec::new();
    let mut ball_volumes = Vec::new();
    let mut ratios = Vec::new();
    let mut trusted = Vec::new();
    for &r in &radii {
        let v = space.ball_from_row(x, &dist, r).measure;
        ball_volumes.push(v);
        ratios.push(v / (omega(n) * r.powi(n as i32)));
        let ok = r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12);
        if !ok {
            notes.push(format!("r={r:e} outside trusted range [{lo:e}, {hi:e}], excluded"));
        }
        trusted.push(ok);
    }
    let pts: Vec<(f64, f64)> = radii.iter().zip(&ratios).zip(&trusted).filter(|t| *t.1).map(|((r, q), _)| (*r, *q)).collect();
    if pts.len() < 3 {
        return invalid(format!("{} trusted radii; at least 3 are needed", pts.len()));
    }
    let (density, se) = {
        let m = pts.len() as f64;
        let xs: Vec<f64> = pts.iter().map(|p| p.0 * p.0).collect();
        let xm = xs.iter().sum::<f64>() / m;
        let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&pts).map(|(x, p)| (x - xm) * (p.1 - ym)).sum();
        let c = sxy / sxx;
        let a = ym - c * xm;
        let rss: f64 = xs.iter().zip(&pts).map(|(x, p)| (p.1 - a - c * x).powi(2)).sum();
        let sigma2 = rss / (m - 2.0);
        (a, (sigma2 * (1.0 / m + xm * xm / sxx)).sqrt())
    };
    let rich: Vec<f64> = pts.windows(2).take(3).map(|w| richardson(w[0].0, w[0].1, w[1].0, w[1].1)).collect();
    let spread = rich.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - rich.iter().cloned().fold(f64::INFINITY, f64::min);
    let big_theta_check = big_theta_row(space, &dist, pts[0].0 * pts[0].0)?;
    Ok(DensityEstimate {
        basepoint: x,
        radii,
        ball_volumes,
        ratios,
        trusted,
        density,
        uncertainty: se.max(spread),
        big_theta_check,
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LscProbe {
    pub estimates: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub report: VerificationReport,
}

/// Tabulates `ϑ` along a refinement family; passes when every level's estimate is at
/// least the final estimate minus `tol`.
pub fn density_lsc_probe(family: &[&DiscreteSpace], xs: &[usize], r_grid: Option<&[f64]>, tol: f64) -> Result<LscProbe> {
    matched_basepoints(family, xs)?;
    let est = family.iter().zip(xs).map(|(s, &x)| volume_density(s, x, r_grid)).collect::<Result<Vec<_>>>()?;
    let last = est.last().unwrap().density;
    let mut b = ReportBuilder::new("density_lsc", format!("{} levels", family.len()), tol);
    for (k, e) in est.iter().enumerate() {
        b.push(format!("level={k}"), e.density - last, false);
    }
    Ok(LscProbe {
        estimates: est.iter().map(|e| e.density).collect(),
        uncertainties: est.iter().map(|e| e.uncertainty).collect(),
        report: b.finish(),
    })
}
