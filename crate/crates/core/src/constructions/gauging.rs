use crate::error::{invalid, Result};
use crate::geometry::PotentialField;
use crate::heat::HeatKernel;
use crate::kato::kato_constant;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugingResult {
    pub t_star: f64,
    pub k_t_star: f64,
    /// `ε = 4k_{t*}`.
    pub epsilon: f64,
    /// `δ = 2/ε − 1`; infinite when `V ≡ 0`.
    pub delta: f64,
    pub times: Vec<f64>,
    /// `I(t_j, ·)` per requested time.
    pub i_values: Vec<Vec<f64>>,
    /// `J = I^{−1/δ}`.
    pub j_values: Vec<Vec<f64>>,
    pub iterations: usize,
    /// `⌊log(1e−10)/log(1 − 2k_{t*})⌋ + 1`.
    pub iteration_budget: usize,
    pub residual: f64,
    pub contraction: f64,
}

impl GaugingResult {
    /// Largest violation of `1 ≤ I ≤ e^{4δk}` and `e^{−4k} ≤ J ≤ 1`, zero when both hold.
    pub fn bounds_violation(&self) -> f64 {
        let k = self.k_t_star;
        let i_hi = if self.delta.is_finite() { (4.0 * self.delta * k).exp() } else { 1.0 };
        let j_lo = (-4.0 * k).exp();
        let mut worst: f64 = 0.0;
        for (ir, jr) in self.i_values.iter().zip(&self.j_values) {
            for (&i, &j) in ir.iter().zip(jr) {
                worst = worst.max(1.0 - i).max(i - i_hi).max(j_lo - j).max(j - 1.0);
            }
        }
        worst
    }
}

/// `(1 − e^{−z})/z` and `(1 − e^{−z} − z e^{−z})/z²`.
fn exp_weights(z: f64) -> (f64, f64) {
    if z < 1e-3 {
        let (mut e1, mut e2, mut term) = (0.0, 0.0, 1.0);
        for k in 0..8 {
            e1 += term / (k + 1) as f64;
            e2 += term / (k + 2) as f64;
            term *= -z / (k + 1) as f64;
        }
        (e1, e2)
    } else {
        let e = (-z).exp();
        (-(-z).exp_m1() / z, (1.0 - e - z * e) / (z * z))
    }
}

struct Solve {
    values: Vec<Vec<f64>>,
    iterations: usize,
    residual: f64,
}

/// Picard iteration `I ← 1 + 2δ T[I]` with `I` piecewise linear in time and each
/// mode integrated exactly against `e^{−λ(t−s)}`.
fn picard(hk: &HeatKernel, v: &[f64], grid: &[f64], two_delta: f64, max_iter: usize, tol: f64) -> Solve {
    let n = v.len();
    let lam = &hk.spectral().eigenvalues;
    let m = lam.len();
    let weights: Vec<Vec<(f64, f64, f64)>> = grid
        .windows(2)
        .map(|w| {
            let h = w[1] - w[0];
            lam.iter()
                .map(|&l| {
                    let z = l * h;
                    let (e1, e2) = exp_weights(z);
                    ((-z).exp(), h * e2, h * (e1 - e2))
                })
                .collect()
        })
        .collect();
    let mut cur = vec![vec![1.0; n]; grid.len()];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        let a: Vec<Vec<f64>> = cur
            .iter()
            .map(|i| hk.coefficients(&i.iter().zip(v).map(|(a, b)| a * b).collect::<Vec<_>>()))
            .collect();
        let mut b = vec![0.0; m];
        let mut next = Vec::with_capacity(grid.len());
        next.push(vec![1.0; n]);
        for j in 1..grid.len() {
            for k in 0..m {
                let (d, wl, wr) = weights[j - 1][k];
                b[k] = d * b[k] + wl * a[j - 1][k] + wr * a[j][k];
            }
            let t = hk.synthesize(&b);
            next.push(t.iter().map(|x| 1.0 + two_delta * x).collect());
        }
        residual = cur.iter().flatten().zip(next.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        cur = next;
        if residual <= tol {
            break;
        }
    }
    Solve { values: cur, iterations, residual }
}

fn interp(grid: &[f64], vals: &[Vec<f64>], t: f64) -> Vec<f64> {
    let j = grid.partition_point(|&s| s < t).min(grid.len() - 1);
    if grid[j] == t || j == 0 {
        return vals[j].clone();
    }
    let w = (t - grid[j - 1]) / (grid[j] - grid[j - 1]);
    vals[j - 1].iter().zip(&vals[j]).map(|(a, b)| a + w * (b - a)).collect()
}

/// Gauging function `J = I^{−1/δ}` where `I(t,x) = 1 + 2δ∫_0^t Σ_y H(t−s,x,y)V_y I(s,y) μ_y ds`,
/// `ε = 4k_{t*}`, `δ = 2/ε − 1`. Requires `k_{t*} < 1/8`.
pub fn gauging_function(hk: &HeatKernel, v: &PotentialField, t_star: f64, time_grid: &[f64]) -> Result<GaugingResult> {
    if !(t_star > 0.0) {
        return invalid("t* must be positive");
    }
    if time_grid.iter().any(|&t| !(0.0..=t_star * (1.0 + 1e-12)).contains(&t)) {
        return invalid("output times must lie in [0, t*]");
    }
    let k = kato_constant(hk, v, t_star)?;
    if k >= 0.125 {
        return invalid(format!("k_t* = {k:e} ≥ 1/8; the iteration is not a contraction"));
    }
    let times = time_grid.to_vec();
    let n = hk.space().vertex_count();
    if k == 0.0 || v.max() == 0.0 {
        let ones = vec![vec![1.0; n]; times.len()];
        return Ok(GaugingResult {
            t_star,
            k_t_star: k,
            epsilon: 0.0,
            delta: f64::INFINITY,
            times,
            i_values: ones.clone(),
            j_values: ones,
            iterations: 1,
            iteration_budget: 1,
            residual: 0.0,
            contraction: 0.0,
        });
    }
    let epsilon = 4.0 * k;
    let delta = 2.0 / epsilon - 1.0;
    let contraction = 1.0 - 2.0 * k;
    let budget = (1e-10f64.ln() / contraction.ln()).floor() as usize + 1;
    let mut grid = vec![0.0];
    grid.extend((0..64).map(|j| t_star * 1e-4 * 1e4f64.powf(j as f64 / 63.0)));
    grid.extend((1..=64).map(|j| t_star * j as f64 / 64.0));
    grid.extend_from_slice(time_grid);
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * t_star);
    let mut fine = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        fine.push(w[0]);
        fine.push(0.5 * (w[0] + w[1]));
    }
    fine.push(*grid.last().unwrap());
    let max_iter = 4 * budget + 10;
    let coarse = picard(hk, v.values(), &grid, 2.0 * delta, max_iter, 1e-10);
    let finer = picard(hk, v.values(), &fine, 2.0 * delta, max_iter, 1e-10);
    let extrapolated: Vec<Vec<f64>> = coarse
        .values
        .iter()
        .enumerate()
        .map(|(j, c)| c.iter().zip(&finer.values[2 * j]).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
        .collect();
    let i_values: Vec<Vec<f64>> = times.iter().map(|&t| interp(&grid, &extrapolated, t)).collect();
    let j_values = i_values.iter().map(|r| r.iter().map(|i| i.powf(-1.0 / delta)).collect()).collect();
    Ok(GaugingResult {
        t_star,
        k_t_star: k,
        epsilon,
        delta,
        times,
        i_values,
        j_values,
        iterations: coarse.iterations.max(finer.iterations),
        iteration_budget: budget,
        residual: coarse.residual.max(finer.residual),
        contraction,
    })
}
