mod common;

use common::*;
use katolab::generators::{cycle, flat_torus};
use katolab::geometry::{build_graph_space, build_mesh_space};
use katolab::heat::{carre_du_champ, spectrum, HeatKernel};
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn kernel_matches_matrix_exponential() {
    let space = random_graph(12, 3);
    let n = space.vertex_count();
    with_kernel(&space, |hk| {
        for t in [0.05, 0.4, 3.0] {
            let p = dense_semigroup(&space, t, &vec![0.0; n]);
            for x in 0..n {
                let row = hk.kernel_row(t, x).unwrap();
                let oracle: Vec<f64> = (0..n).map(|y| p[(x, y)] / space.measure()[y]).collect();
                assert!(max_rel(&row, &oracle) < 1e-10, "t = {t}, x = {x}");
            }
        }
    });
}

#[test]
fn cycle_spectrum_closed_form() {
    let n = 30;
    let space = build_graph_space(&cycle(n, Some(1.0)).unwrap()).unwrap();
    let sp = spectrum(&space, n).unwrap();
    let h = 1.0 / n as f64;
    let mut exact: Vec<f64> = (0..n).map(|k| 4.0 / (h * h) * (PI * k as f64 / n as f64).sin().powi(2)).collect();
    exact.sort_by(f64::total_cmp);
    for (a, b) in sp.eigenvalues.iter().zip(&exact) {
        assert!((a - b).abs() <= 1e-9 * (1.0 + b), "{a} vs {b}");
    }
}

#[test]
fn regular_torus_spectrum_matches_five_point_stencil() {
    let n = 12;
    let space = build_mesh_space(&flat_torus(1.0, 1.0, n).unwrap()).unwrap();
    let sp = spectrum(&space, n * n).unwrap();
    let h = 1.0 / n as f64;
    let s = |j: usize| (PI * j as f64 / n as f64).sin().powi(2);
    let mut exact: Vec<f64> = (0..n * n).map(|q| 4.0 / (h * h) * (s(q / n) + s(q % n))).collect();
    exact.sort_by(f64::total_cmp);
    for (a, b) in sp.eigenvalues.iter().zip(&exact) {
        assert!((a - b).abs() <= 1e-8 * (1.0 + b), "{a} vs {b}");
    }
}

#[test]
fn iterative_and_dense_spectra_agree() {
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 30).unwrap()).unwrap();
    let dense = spectrum(&space, space.vertex_count()).unwrap();
    let opts = katolab::heat::SpectrumOptions { method: katolab::heat::EigenMethod::Iterative, ..Default::default() };
    let iter = katolab::heat::spectrum_with(&space, 12, &opts).unwrap();
    for k in 0..12 {
        assert!((dense.eigenvalues[k] - iter.eigenvalues[k]).abs() <= 1e-7 * (1.0 + dense.eigenvalues[k]));
    }
}

#[test]
fn auto_method_goes_dense_for_large_blocks() {
    use katolab::heat::EigenMethod;
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 32).unwrap()).unwrap();
    assert_eq!(spectrum(&space, 300).unwrap().method, EigenMethod::Dense);
    assert_eq!(spectrum(&space, 8).unwrap().method, EigenMethod::Iterative);
}

#[test]
fn carre_du_champ_integrates_to_energy() {
    let space = build_mesh_space(&flat_torus(1.0, 2.0, 10).unwrap()).unwrap();
    let u: Vec<f64> = (0..space.vertex_count()).map(|i| ((i * 7) % 13) as f64).collect();
    let g = carre_du_champ(&space, &u);
    let total: f64 = g.iter().zip(space.measure()).map(|(a, b)| a * b).sum();
    assert!((total - space.energy(&u)).abs() <= 1e-10 * total);
}

#[test]
fn dirichlet_energy_tends_to_form() {
    let space = random_graph(10, 9);
    with_kernel(&space, |hk| {
        let u: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let e = hk.dirichlet_energy_t(1e-7, &u).unwrap();
        assert!((e - space.energy(&u)).abs() <= 1e-5 * space.energy(&u));
    });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_symmetric_positive_stochastic(seed in 0u64..1000, n in 3usize..14, t in 0.01f64..5.0) {
        let space = random_graph(n, seed);
        let sp = spectrum(&space, n).unwrap();
        let hk = HeatKernel::new(&space, &sp).unwrap();
        for x in 0..n {
            prop_assert!((hk.stochastic_mass(t, x).unwrap() - 1.0).abs() < 1e-10);
            for y in 0..n {
                let (a, b) = (hk.kernel(t, x, y).unwrap(), hk.kernel(t, y, x).unwrap());
                prop_assert_eq!(a, b);
                prop_assert!(a > -1e-12 * hk.kernel(t, x, x).unwrap());
            }
        }
    }

    #[test]
    fn semigroup_property(seed in 0u64..1000, t in 0.01f64..2.0, s in 0.01f64..2.0) {
        let space = random_graph(9, seed);
        let sp = spectrum(&space, 9).unwrap();
        let hk = HeatKernel::new(&space, &sp).unwrap();
        let f: Vec<f64> = (0..9).map(|i| ((i as u64 + seed) % 5) as f64 - 2.0).collect();
        let two = hk.apply(s, &hk.apply(t, &f).unwrap()).unwrap();
        let one = hk.apply(t + s, &f).unwrap();
        prop_assert!(max_rel(&two, &one) < 1e-10);
    }
}
