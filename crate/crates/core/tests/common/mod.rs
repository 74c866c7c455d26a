#![allow(dead_code)]

use katolab::geometry::{build_graph_space, DiscreteSpace, GraphSpec};
use katolab::heat::{spectrum, HeatKernel, SpectralData};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected random graph: a spanning path plus random chords.
pub fn random_graph(n: usize, seed: u64) -> DiscreteSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((i - 1, i, rng.gen_range(0.5..2.0), Some(rng.gen_range(0.5..1.5))));
    }
    for _ in 0..n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i + 1 < j {
            edges.push((i, j, rng.gen_range(0.1..1.0), Some(rng.gen_range(1.0..2.0))));
        }
    }
    let measures = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    build_graph_space(&GraphSpec { dim: 1, measures, edges, ..Default::default() }).unwrap()
}

pub fn full_spectrum(space: &DiscreteSpace) -> SpectralData {
    spectrum(space, space.vertex_count()).unwrap()
}

pub fn with_kernel<R>(space: &DiscreteSpace, f: impl FnOnce(&HeatKernel) -> R) -> R {
    let sp = full_spectrum(space);
    let hk = HeatKernel::new(space, &sp).unwrap();
    f(&hk)
}

/// Dense `e^{−t(L − diag(shift))}` with `L = M⁻¹W`, by nalgebra's matrix exponential.
/// Entry `(x, y)` is the transition weight, so `H(t,x,y) = P[(x,y)] / μ_y`.
pub fn dense_semigroup(space: &DiscreteSpace, t: f64, shift: &[f64]) -> DMatrix<f64> {
    let n = space.vertex_count();
    let w = space.stiffness().to_dense();
    let mu = space.measure();
    let s = DMatrix::from_fn(n, n, |i, j| {
        -t * (w[i * n + j] / (mu[i] * mu[j]).sqrt() - if i == j { shift[i] } else { 0.0 })
    });
    let e = s.exp();
    DMatrix::from_fn(n, n, |i, j| e[(i, j)] * (mu[j] / mu[i]).sqrt())
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}
