use super::CsrMatrix;
use crate::error::{Error, Result};
use std::collections::VecDeque;

/// Reverse Cuthill–McKee ordering of the sparsity graph. Returns `perm` with
/// `perm[new] = old`. Every connected component is handled.
pub fn rcm_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let deg: Vec<usize> = (0..n).map(|i| a.row(i).0.iter().filter(|&&j| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize| -> (usize, usize) {
        // returns (farthest vertex with min degree in last level, depth)
        let mut dist = vec![usize::MAX; n];
        let mut q = VecDeque::from([start]);
        dist[start] = 0;
        let mut last = start;
        while let Some(v) = q.pop_front() {
            last = v;
            for &w in a.row(v).0 {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        let depth = dist[last];
        let best = (0..n)
            .filter(|&v| dist[v] == depth)
            .min_by_key(|&v| (deg[v], v))
            .unwrap_or(last);
        (best, depth)
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start within this component
        let mut start = seed;
        let (mut cand, mut depth) = bfs_levels(start);
        for _ in 0..8 {
            let (c2, d2) = bfs_levels(cand);
            if d2 <= depth {
                break;
            }
            start = cand;
            cand = c2;
            depth = d2;
        }
        let _ = cand;
        let mut q = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (deg[w], w));
            for w in nb {
                if !visited[w] {
                    visited[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Cholesky factor of a symmetric positive definite sparse matrix stored in
/// envelope (variable-band) form after RCM reordering.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n();
        let perm = rcm_order(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; offset[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (c, v) = a.row(old);
            for (&j, &x) in c.iter().zip(v) {
                let jn = inv[j];
                if jn <= new {
                    data[offset[new] + jn - first[new]] += x;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = data[offset[i] + j - fi];
                let ri = &data[offset[i] + k0 - fi..offset[i] + j - fi];
                let rj = &data[offset[j] + k0 - fj..offset[j] + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                let djj = data[offset[j] + j - fj];
                data[offset[i] + j - fi] = s / djj;
            }
            let row = &data[offset[i]..offset[i] + i - fi];
            let d = data[offset[i] + i - fi] - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite(perm[i]));
            }
            data[offset[i] + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { perm, first, offset, data })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i] + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / self.data[self.offset[i] + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.data[self.offset[i] + i - fi];
            let xi = y[i];
            let row = &self.data[self.offset[i]..self.offset[i] + i - fi];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d_plus_shift(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        // a long-range coupling to exercise the envelope
        t.push((0, n - 1, -0.5));
        t.push((n - 1, 0, -0.5));
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn solve_reproduces_rhs() {
        let a = laplace_1d_plus_shift(40);
        let chol = EnvelopeCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = chol.solve(&b);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplace_1d_plus_shift(17);
        let mut p = rcm_order(&a);
        p.sort();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(EnvelopeCholesky::factor(&a).is_err());
    }
}
