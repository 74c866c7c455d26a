mod common;

use common::*;
use katolab::generators::{cycle, flat_torus, icosphere};
use katolab::geometry::{build_graph_space, build_mesh_space};
use katolab::heat::HeatKernel;
use katolab::inequalities::*;
use katolab::report::Verdict;
use proptest::prelude::*;

#[test]
fn li_yau_constant_datum_gives_full_margin() {
    let space = build_mesh_space(&icosphere(1.0, 1).unwrap()).unwrap();
    with_kernel(&space, |hk| {
        let u0 = vec![2.0; space.vertex_count()];
        let r = li_yau_residual(hk, None, &u0, &[0, 5, 9], &[0.1, 0.5], 1e-3).unwrap();
        // normalized by n/(2t), so a constant datum has margin exactly 1
        assert!((r.min_margin - 1.0).abs() < 1e-10);
        assert!((r.mean_margin - 1.0).abs() < 1e-10);
    });
}

#[test]
fn li_yau_rejects_nonpositive_datum() {
    let space = build_graph_space(&cycle(10, None).unwrap()).unwrap();
    with_kernel(&space, |hk| {
        let mut u0 = vec![1.0; 10];
        u0[3] = 0.0;
        assert!(li_yau_residual(hk, None, &u0, &[0], &[0.1], 1e-3).is_err());
    });
}

#[test]
fn gradient_estimate_on_cycle_modes() {
    let space = build_graph_space(&cycle(24, None).unwrap()).unwrap();
    let sp = full_spectrum(&space);
    let hk = HeatKernel::new(&space, &sp).unwrap();
    for k in [1, 3, 8] {
        let g = gradient_estimate_check(&hk, None, &sp.mode(k), 0.2, 1e-9).unwrap();
        assert_eq!(g.report.verdict, Verdict::Pass);
        assert!(g.lipschitz_holds);
    }
}

#[test]
fn gaussian_fit_is_at_least_one() {
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 16).unwrap()).unwrap();
    with_kernel(&space, |hk| {
        let t0 = hk.t_min();
        let pairs: Vec<(usize, usize)> = (0..20).map(|k| (0, k * 12)).collect();
        let fit = gaussian_bound_fit(hk, &pairs, &[t0, 4.0 * t0, 0.1]).unwrap();
        assert!(fit.beta >= 1.0 && fit.beta < 50.0, "{}", fit.beta);
        assert!(fit.samples_used > 0);
    });
}

#[test]
fn harmonic_detection() {
    // coordinate functions on a flat torus patch are discrete harmonic away from the seam
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 20).unwrap()).unwrap();
    let [u, _] = katolab::constructions::local_coordinates(&space, 210).unwrap();
    let ball = space.ball(210, 0.2).unwrap();
    let mut interior = vec![false; space.vertex_count()];
    for &v in &ball.vertices {
        interior[v] = true;
    }
    assert!(check_harmonic(&space, &u, &interior, 1e-10).is_ok());
    let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    assert!(check_harmonic(&space, &sq, &interior, 1e-10).is_err());
}

#[test]
fn hessian_of_quadratic_on_flat_patch() {
    // u = x² has Hessian diag(2, 0), so |∇du|² = 4 wherever the 1-ring fit is exact
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 20).unwrap()).unwrap();
    let x0 = 210;
    let [u, _] = katolab::constructions::local_coordinates(&space, x0).unwrap();
    let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    let h = discrete_hessian(&space, &sq).unwrap();
    let ball = space.ball(x0, 0.2).unwrap();
    for &v in &ball.vertices {
        let val = h[v].unwrap();
        assert!((val - 4.0).abs() < 1e-8, "vertex {v}: {val}");
    }
}

#[test]
fn edge_lipschitz_of_linear_function() {
    let space = build_graph_space(&cycle(40, Some(1.0)).unwrap()).unwrap();
    let u: Vec<f64> = (0..40).map(|i| 3.0 * (i.min(40 - i) as f64 / 40.0)).collect();
    assert!((edge_lipschitz(&space, &u, None) - 3.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bl_scalar_margin_nonnegative(xi in 0.0f64..50.0, n in 1.0f64..6.0) {
        prop_assert!(bl_scalar_margin(xi, n) >= -1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bakry_ledoux_on_cycle(seed in 0u64..1000, t in 0.01f64..1.0) {
        use rand::{Rng, SeedableRng};
        let space = build_graph_space(&cycle(20, None).unwrap()).unwrap();
        let sp = full_spectrum(&space);
        let hk = HeatKernel::new(&space, &sp).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b = bakry_ledoux_residual(&hk, None, &v, &phi, t, 1e-9).unwrap();
        prop_assert!(b.lhs >= b.rhs_weak - 1e-9 * space.inner(&v, &v));
    }
}
