use crate::error::{invalid, Result};
use crate::heat::{carre_du_champ, HeatKernel};
use serde::{Deserialize, Serialize};

/// Quintic step: 1 on `[0, 1/4]`, 0 on `[3/4, ∞)`, with vanishing first and second
/// derivatives at both junctions.
pub fn smooth_profile(s: f64) -> f64 {
    if s <= 0.25 {
        1.0
    } else if s >= 0.75 {
        0.0
    } else {
        let w = (s - 0.25) * 2.0;
        1.0 - w * w * w * (10.0 - 15.0 * w + 6.0 * w * w)
    }
}

/// `u((d − r)/s)` from exact distances, without heat smoothing.
pub fn profile_cutoff(dist: &[f64], r: f64, s: f64) -> Vec<f64> {
    dist.iter().map(|d| smooth_profile((d - r) / s)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub center: usize,
    pub r: f64,
    pub s: f64,
    /// Smoothing time `min{(s/(4e²√(2n)))², T}`.
    pub t: f64,
    pub chi: Vec<f64>,
    pub distances: Vec<f64>,
    /// `sup|dχ|·min(s, √T)`.
    pub grad_norm: f64,
    /// `sup|Δχ|·min(s², T)`.
    pub lap_norm: f64,
    /// `max_{B_r}|χ − 1|`.
    pub interior_defect: f64,
    /// `max` of `|χ|` off `B_{r+s}`.
    pub exterior_defect: f64,
    pub taints: Vec<String>,
}

impl CutoffReport {
    /// CSV `vertex,distance,chi`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("vertex,distance,chi\n");
        for (i, (d, c)) in self.distances.iter().zip(&self.chi).enumerate() {
            s.push_str(&format!("{i},{d:e},{c:e}\n"));
        }
        s
    }
}

/// Heat-smoothed cut-off `χ = u((P_t d_x − r)/s)`.
pub fn heat_cutoff(hk: &HeatKernel, x: usize, r: f64, s: f64, big_t: f64) -> Result<CutoffReport> {
    let space = hk.space();
    space.check_vertex(x)?;
    if !(r >= 0.0 && s > 0.0 && big_t > 0.0) {
        return invalid("cut-off needs r ≥ 0, s > 0 and T > 0");
    }
    let n = space.dim() as f64;
    let mut taints = Vec::new();
    if s < 3.0 * space.mean_edge_length() {
        taints.push(format!("s = {s:e} is below 3 mean edge lengths"));
    }
    let t = (s / (4.0 * std::f64::consts::E.powi(2) * (2.0 * n).sqrt())).powi(2).min(big_t);
    if t < hk.t_min() {
        taints.push(format!("smoothing time {t:e} below t_min = {:e}", hk.t_min()));
    }
    if hk.truncation_tainted(t) {
        taints.push("spectral truncation".into());
    }
    let dist = space.distances_from(x);
    let rho = hk.apply(t, &dist)?;
    let chi = profile_cutoff(&rho, r, s);
    let grad = carre_du_champ(space, &chi).iter().fold(0.0f64, |a, g| a.max(g.sqrt()));
    let lap = space.laplacian(&chi).iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let mut interior_defect: f64 = 0.0;
    let mut exterior_defect: f64 = 0.0;
    for (d, c) in dist.iter().zip(&chi) {
        if *d <= r {
            interior_defect = interior_defect.max((c - 1.0).abs());
        }
        if *d >= r + s {
            exterior_defect = exterior_defect.max(c.abs());
        }
    }
    Ok(CutoffReport {
        center: x,
        r,
        s,
        t,
        grad_norm: grad * s.min(big_t.sqrt()),
        lap_norm: lap * (s * s).min(big_t),
        chi,
        distances: dist,
        interior_defect,
        exterior_defect,
        taints,
    })
}
