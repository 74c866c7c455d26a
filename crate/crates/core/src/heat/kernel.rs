use super::SpectralData;
use crate::error::{invalid, Result};
use crate::geometry::DiscreteSpace;

/// Clamping applied to a kernel row before taking logarithms or powers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClampInfo {
    pub floor: f64,
    pub clamped: usize,
}

/// Heat kernel handle: a space with its (possibly truncated) eigenbasis.
#[derive(Clone, Copy, Debug)]
pub struct HeatKernel<'a> {
    space: &'a DiscreteSpace,
    spectral: &'a SpectralData,
    /// Relative floor for clamped evaluations, as a fraction of `max_y H(t,x,y)`.
    pub floor_rel: f64,
}

impl<'a> HeatKernel<'a> {
    pub fn new(space: &'a DiscreteSpace, spectral: &'a SpectralData) -> Result<Self> {
        if space.vertex_count() != spectral.vertex_count() {
            return invalid("spectral data does not match the space");
        }
        Ok(HeatKernel { space, spectral, floor_rel: 1e-15 })
    }

    pub fn space(&self) -> &'a DiscreteSpace {
        self.space
    }

    pub fn spectral(&self) -> &'a SpectralData {
        self.spectral
    }

    pub fn is_truncated(&self) -> bool {
        !self.spectral.is_full()
    }

    /// Truncation is harmless at time `t` when the first dropped mode has
    /// decayed below `1e-12`.
    pub fn truncation_tainted(&self, t: f64) -> bool {
        self.is_truncated() && (-self.spectral.max_eigenvalue() * t).exp() > 1e-12
    }

    /// Smallest trusted time, `(2 · mean edge length)²`.
    pub fn t_min(&self) -> f64 {
        (2.0 * self.space.mean_edge_length()).powi(2)
    }

    fn decay(&self, t: f64) -> Vec<f64> {
        self.spectral.eigenvalues.iter().map(|l| (-l * t).exp()).collect()
    }

    fn check_time(t: f64) -> Result<()> {
        if t > 0.0 && t.is_finite() {
            Ok(())
        } else {
            invalid(format!("time must be positive, got {t}"))
        }
    }

    /// `H(t,x,y) = Σ_k e^{−λ_k t} φ_k(x) φ_k(y)`; symmetric bit for bit.
    pub fn kernel(&self, t: f64, x: usize, y: usize) -> Result<f64> {
        Self::check_time(t)?;
        self.space.check_vertex(x)?;
        self.space.check_vertex(y)?;
        let e = self.decay(t);
        let (px, py) = (self.spectral.modes_at(x), self.spectral.modes_at(y));
        Ok(e.iter().zip(px.iter().zip(py)).map(|(e, (a, b))| e * (a * b)).sum())
    }

    /// `y ↦ H(t,x,y)`.
    pub fn kernel_row(&self, t: f64, x: usize) -> Result<Vec<f64>> {
        Self::check_time(t)?;
        self.space.check_vertex(x)?;
        let e = self.decay(t);
        let px = self.spectral.modes_at(x);
        Ok((0..self.space.vertex_count())
            .map(|y| e.iter().zip(px.iter().zip(self.spectral.modes_at(y))).map(|(e, (a, b))| e * (a * b)).sum())
            .collect())
    }

    /// Kernel row with entries below `floor_rel · max_y H` raised to that floor.
    pub fn kernel_row_clamped(&self, t: f64, x: usize) -> Result<(Vec<f64>, ClampInfo)> {
        let mut row = self.kernel_row(t, x)?;
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let floor = (self.floor_rel * max).max(1e-300);
        let mut clamped = 0;
        for v in row.iter_mut() {
            if *v < floor {
                *v = floor;
                clamped += 1;
            }
        }
        Ok((row, ClampInfo { floor, clamped }))
    }

    /// `a_k = ⟨f, φ_k⟩_μ`.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let m = self.spectral.mode_count();
        let mu = self.space.measure();
        let mut a = vec![0.0; m];
        for (i, (&fi, &mi)) in f.iter().zip(mu).enumerate() {
            let w = fi * mi;
            for (ak, p) in a.iter_mut().zip(self.spectral.modes_at(i)) {
                *ak += w * p;
            }
        }
        a
    }

    /// `Σ_k a_k φ_k`.
    pub fn synthesize(&self, a: &[f64]) -> Vec<f64> {
        (0..self.space.vertex_count())
            .map(|i| self.spectral.modes_at(i).iter().zip(a).map(|(p, c)| p * c).sum())
            .collect()
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() == self.space.vertex_count() {
            Ok(())
        } else {
            invalid("field length does not match the space")
        }
    }

    /// `P_t f`; `P_0 f = f`.
    pub fn apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        if t == 0.0 {
            return Ok(f.to_vec());
        }
        Self::check_time(t)?;
        let e = self.decay(t);
        let a: Vec<f64> = self.coefficients(f).iter().zip(&e).map(|(a, e)| a * e).collect();
        Ok(self.synthesize(&a))
    }

    /// `Δ P_t f = Σ λ_k e^{−λ_k t} a_k φ_k`; the time derivative is its negative.
    pub fn apply_laplacian(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        if !(t >= 0.0) {
            return invalid("time must be nonnegative");
        }
        let a: Vec<f64> = self
            .coefficients(f)
            .iter()
            .zip(&self.spectral.eigenvalues)
            .map(|(a, l)| a * l * (-l * t).exp())
            .collect();
        Ok(self.synthesize(&a))
    }

    /// `Σ_y H(t,x,y) μ_y`.
    pub fn stochastic_mass(&self, t: f64, x: usize) -> Result<f64> {
        let row = self.kernel_row(t, x)?;
        Ok(row.iter().zip(self.space.measure()).map(|(h, m)| h * m).sum())
    }

    /// `|Σ_z H(t,x,z) H(s,z,y) μ_z − H(t+s,x,y)|`.
    pub fn chapman_residual(&self, t: f64, s: f64, x: usize, y: usize) -> Result<f64> {
        Self::check_time(s)?;
        let a = self.kernel_row(t, x)?;
        let b = self.kernel_row(s, y)?;
        let conv: f64 = a.iter().zip(&b).zip(self.space.measure()).map(|((p, q), m)| p * q * m).sum();
        Ok((conv - self.kernel(t + s, x, y)?).abs())
    }

    /// `E_t(u) = ⟨u − P_t u, u⟩_μ / t`.
    pub fn dirichlet_energy_t(&self, t: f64, u: &[f64]) -> Result<f64> {
        Self::check_time(t)?;
        self.check_len(u)?;
        let a = self.coefficients(u);
        // mode sum avoids cancellation in u − P_t u
        let spectral: f64 = a
            .iter()
            .zip(&self.spectral.eigenvalues)
            .map(|(a, l)| a * a * -(-l * t).exp_m1() / t)
            .sum();
        if self.is_truncated() {
            let pu = self.apply(t, u)?;
            let diff: Vec<f64> = u.iter().zip(&pu).map(|(a, b)| a - b).collect();
            return Ok(self.space.inner(&diff, u) / t);
        }
        Ok(spectral)
    }
}

/// Carré du champ `Γ(u)`: graph form `(1/2μ_i) Σ_j (−W_ij)(u_i − u_j)²`, or on
/// meshes the per-face `|∇u|²` shared as `A_f/3` per corner and divided by `μ_i`.
/// In both cases `Σ_i Γ(u)_i μ_i = uᵀWu`.
pub fn carre_du_champ(space: &DiscreteSpace, u: &[f64]) -> Vec<f64> {
    let n = space.vertex_count();
    let mu = space.measure();
    let mut g = vec![0.0; n];
    match space.mesh() {
        Some(mesh) => {
            for (f, t) in mesh.surface.faces.iter().enumerate() {
                let grad = mesh.face_gradient(f, u);
                let e = mesh.faces[f].area / 3.0 * crate::geometry::dot3(grad, grad);
                for &v in t {
                    g[v] += e;
                }
            }
        }
        None => {
            let w = space.stiffness();
            for i in 0..n {
                let (c, v) = w.row(i);
                for (&j, &a) in c.iter().zip(v) {
                    if j != i {
                        g[i] += 0.5 * (-a) * (u[i] - u[j]).powi(2);
                    }
                }
            }
        }
    }
    g.iter_mut().zip(mu).for_each(|(x, m)| *x /= m);
    g
}
