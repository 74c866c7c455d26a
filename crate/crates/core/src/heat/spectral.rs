use crate::error::{invalid, Result};
use crate::geometry::DiscreteSpace;
use crate::linalg::{smallest_eigenpairs, sym_eigen, SubspaceOptions};
use serde::{Deserialize, Serialize};

/// Spaces up to this size use the dense solver under [`EigenMethod::Auto`].
pub const DENSE_LIMIT: usize = 600;

/// Under [`EigenMethod::Auto`], spaces up to this size also go dense when at least a quarter
/// of the spectrum is requested.
pub const DENSE_BLOCK_LIMIT: usize = 3000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenMethod {
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    pub method: EigenMethod,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { method: EigenMethod::Auto, seed: 0x5eed, tol: 1e-10 }
    }
}

/// Truncated mass-orthonormal eigendecomposition of `Wφ = λMφ`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// Row-major `n × m`: `vectors[i*m + k] = φ_k(i)`.
    vectors: Vec<f64>,
    /// `‖Wφ_k − λ_k Mφ_k‖₂`.
    pub residuals: Vec<f64>,
    pub method: EigenMethod,
    n: usize,
    m: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralExport {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub m: usize,
}

impl SpectralData {
    pub fn mode_count(&self) -> usize {
        self.m
    }
    pub fn vertex_count(&self) -> usize {
        self.n
    }
    pub fn is_full(&self) -> bool {
        self.m == self.n
    }
    /// `φ_0(x), …, φ_{m−1}(x)`.
    pub fn modes_at(&self, x: usize) -> &[f64] {
        &self.vectors[x * self.m..(x + 1) * self.m]
    }
    pub fn mode(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.m + k]).collect()
    }
    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn export(&self) -> SpectralExport {
        SpectralExport { eigenvalues: self.eigenvalues.clone(), residuals: self.residuals.clone(), m: self.m }
    }

    /// Little-endian f64 blob, one row per mode.
    pub fn eigenvector_blob(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * self.n * self.m);
        for k in 0..self.m {
            for i in 0..self.n {
                out.extend_from_slice(&self.vectors[i * self.m + k].to_le_bytes());
            }
        }
        out
    }
}

/// Smallest `m` eigenpairs of the space's Laplacian.
pub fn spectrum(space: &DiscreteSpace, m: usize) -> Result<SpectralData> {
    spectrum_with(space, m, &SpectrumOptions::default())
}

pub fn spectrum_with(space: &DiscreteSpace, m: usize, opts: &SpectrumOptions) -> Result<SpectralData> {
    let n = space.vertex_count();
    if m == 0 || m > n {
        return invalid(format!("mode count {m} outside 1..={n}"));
    }
    let mu = space.measure();
    let w = space.stiffness();
    let method = match opts.method {
        EigenMethod::Auto if n <= DENSE_LIMIT || (n <= DENSE_BLOCK_LIMIT && 4 * m >= n) => EigenMethod::Dense,
        EigenMethod::Auto => EigenMethod::Iterative,
        other => other,
    };
    let (mut values, mut cols) = match method {
        EigenMethod::Dense => {
            let isq: Vec<f64> = mu.iter().map(|m| 1.0 / m.sqrt()).collect();
            let mut s = w.to_dense();
            for i in 0..n {
                for j in 0..n {
                    s[i * n + j] *= isq[i] * isq[j];
                }
            }
            let e = sym_eigen(&s, n)?;
            let mut cols = e.vectors;
            cols.truncate(n * m);
            for k in 0..m {
                for i in 0..n {
                    cols[k * n + i] *= isq[i];
                }
            }
            (e.values[..m].to_vec(), cols)
        }
        _ => {
            let r = smallest_eigenpairs(w, mu, m, &SubspaceOptions { tol: opts.tol, seed: opts.seed, ..Default::default() })?;
            (r.values, r.vectors)
        }
    };
    values[0] = 0.0;
    let c = 1.0 / space.total_measure().sqrt();
    cols[..n].iter_mut().for_each(|v| *v = c);
    for k in 1..m {
        let col = &mut cols[k * n..(k + 1) * n];
        let mut best = 0;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let mut residuals = Vec::with_capacity(m);
    for k in 0..m {
        let col = &cols[k * n..(k + 1) * n];
        let wx = w.matvec(col);
        let r: f64 = (0..n).map(|i| (wx[i] - values[k] * mu[i] * col[i]).powi(2)).sum();
        residuals.push(r.sqrt());
    }
    let mut vectors = vec![0.0; n * m];
    for k in 0..m {
        for i in 0..n {
            vectors[i * m + k] = cols[k * n + i];
        }
    }
    Ok(SpectralData { eigenvalues: values, vectors, residuals, method, n, m })
}
