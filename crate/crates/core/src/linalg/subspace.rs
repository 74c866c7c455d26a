use super::{dot, sym_eigen, CsrMatrix, EnvelopeCholesky};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SubspaceOptions {
    /// Convergence threshold on `‖Wφ − λMφ‖_{M⁻¹}` relative to the largest wanted eigenvalue.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Block size; defaults to `max(2m, m + 8)`.
    pub block: Option<usize>,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        SubspaceOptions { tol: 1e-10, max_iter: 2000, seed: 0x5eed, block: None }
    }
}

pub struct SubspaceResult {
    pub values: Vec<f64>,
    /// Column-major `n × m`, mass-orthonormal.
    pub vectors: Vec<f64>,
    /// Euclidean residual norms `‖Wφ_k − λ_k Mφ_k‖₂`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn m_orthonormalize(y: &mut [f64], n: usize, p: usize, mass: &[f64], rng: &mut ChaCha8Rng) {
    let mdot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(mass).map(|((x, y), m)| x * y * m).sum() };
    for j in 0..p {
        for _pass in 0..2 {
            for k in 0..j {
                let (head, tail) = y.split_at_mut(j * n);
                let qk = &head[k * n..(k + 1) * n];
                let yj = &mut tail[..n];
                let c = mdot(qk, yj);
                yj.iter_mut().zip(qk).for_each(|(a, b)| *a -= c * b);
            }
        }
        let col = &mut y[j * n..(j + 1) * n];
        let mut nrm = mdot(col, col).sqrt();
        if !(nrm > 1e-300) || !nrm.is_finite() {
            col.iter_mut().for_each(|v| *v = rng.gen::<f64>() - 0.5);
            nrm = mdot(col, col).sqrt();
        }
        col.iter_mut().for_each(|v| *v /= nrm);
    }
}

/// Smallest `m` eigenpairs of `Wφ = λMφ` with `M = diag(mass)`, `W` symmetric
/// positive semidefinite. Shift-invert block subspace iteration with
/// Rayleigh–Ritz projection; deterministic for a fixed seed.
pub fn smallest_eigenpairs(w: &CsrMatrix, mass: &[f64], m: usize, opts: &SubspaceOptions) -> Result<SubspaceResult> {
    let n = w.n();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("mode count {m} outside 1..={n}")));
    }
    let p = opts.block.unwrap_or((2 * m).max(m + 8)).clamp(m, n);
    let scale = (0..n).map(|i| w.get(i, i) / mass[i]).fold(0.0, f64::max).max(1e-300);
    let tau = 1e-6 * scale;
    let chol = EnvelopeCholesky::factor(&w.add_diag(tau, mass))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..n * p).map(|_| rng.gen::<f64>() - 0.5).collect();
    x[..n].iter_mut().for_each(|v| *v = 1.0);
    m_orthonormalize(&mut x, n, p, mass, &mut rng);

    let mut residuals = vec![f64::INFINITY; m];
    let mut theta = vec![0.0; p];
    let mut wy = vec![0.0; n];
    for iter in 1..=opts.max_iter {
        let mut y = vec![0.0; n * p];
        for j in 0..p {
            let rhs: Vec<f64> = x[j * n..(j + 1) * n].iter().zip(mass).map(|(a, b)| a * b).collect();
            y[j * n..(j + 1) * n].copy_from_slice(&chol.solve(&rhs));
        }
        m_orthonormalize(&mut y, n, p, mass, &mut rng);
        let mut wcols = vec![0.0; n * p];
        for j in 0..p {
            w.matvec_into(&y[j * n..(j + 1) * n], &mut wy);
            wcols[j * n..(j + 1) * n].copy_from_slice(&wy);
        }
        let mut h = vec![0.0; p * p];
        for a in 0..p {
            for b in 0..=a {
                let v = dot(&y[a * n..(a + 1) * n], &wcols[b * n..(b + 1) * n]);
                h[a * p + b] = v;
                h[b * p + a] = v;
            }
        }
        let eig = sym_eigen(&h, p)?;
        theta.copy_from_slice(&eig.values);
        let mut wx = vec![0.0; n * p];
        for c in 0..p {
            let z = &eig.vectors[c * p..(c + 1) * p];
            let (xc, wxc) = (&mut x[c * n..(c + 1) * n], &mut wx[c * n..(c + 1) * n]);
            xc.iter_mut().for_each(|v| *v = 0.0);
            wxc.iter_mut().for_each(|v| *v = 0.0);
            for (k, &zk) in z.iter().enumerate() {
                if zk == 0.0 {
                    continue;
                }
                let yk = &y[k * n..(k + 1) * n];
                let wk = &wcols[k * n..(k + 1) * n];
                for i in 0..n {
                    xc[i] += zk * yk[i];
                    wxc[i] += zk * wk[i];
                }
            }
        }
        let reference = theta[m - 1].abs().max(theta[..m].iter().fold(0.0f64, |a, b| a.max(b.abs()))).max(1e-300);
        let mut converged = true;
        for k in 0..m {
            let (xc, wxc) = (&x[k * n..(k + 1) * n], &wx[k * n..(k + 1) * n]);
            let mut r_m = 0.0;
            let mut r_2 = 0.0;
            for i in 0..n {
                let r = wxc[i] - theta[k] * mass[i] * xc[i];
                r_m += r * r / mass[i];
                r_2 += r * r;
            }
            residuals[k] = r_2.sqrt();
            if r_m.sqrt() > opts.tol * reference {
                converged = false;
            }
        }
        if converged {
            let vectors = x[..n * m].to_vec();
            return Ok(SubspaceResult { values: theta[..m].to_vec(), vectors, residuals, iterations: iter });
        }
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    Err(Error::NoConvergence { iterations: opts.max_iter, worst, residuals })
}
