use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column-major `n × n`: eigenvector `k` occupies `vectors[k*n..(k+1)*n]`.
    pub vectors: Vec<f64>,
}

/// Dense symmetric eigensolve of a row-major `n × n` matrix (lower triangle read).
pub fn sym_eigen(a: &[f64], n: usize) -> Result<SymEigen> {
    assert_eq!(a.len(), n * n);
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::InvalidArgument(format!("dense eigensolve failed: {e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap().then(i.cmp(&j)));
    let values = order.iter().map(|&k| s[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (c, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[c * n + i] = u[(i, k)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Cholesky factor `L` (row-major, lower) of a small SPD matrix.
pub fn small_cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if !(d > 0.0) {
                    return Err(Error::NotPositiveDefinite(i));
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    Ok(l)
}
