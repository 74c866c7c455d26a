mod common;

use common::*;
use katolab::constructions::*;
use katolab::generators::{cycle, flat_torus};
use katolab::geometry::{build_graph_space, build_mesh_space, PotentialField};
use katolab::heat::HeatKernel;
use proptest::prelude::*;

#[test]
fn profile_is_c2_at_junctions() {
    let h = 1e-5;
    for s0 in [0.25, 0.75] {
        let d1 = (smooth_profile(s0 + h) - smooth_profile(s0 - h)) / (2.0 * h);
        let d2 = (smooth_profile(s0 + h) - 2.0 * smooth_profile(s0) + smooth_profile(s0 - h)) / (h * h);
        assert!(d1.abs() < 1e-8 && d2.abs() < 1e-3, "{s0}: {d1} {d2}");
    }
    assert_eq!(smooth_profile(0.5), 0.5);
}

#[test]
fn heat_cutoff_sandwich_and_csv() {
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 24).unwrap()).unwrap();
    with_kernel(&space, |hk| {
        let c = heat_cutoff(hk, 0, 0.2, 0.2, 1.0).unwrap();
        assert!(c.interior_defect <= 1e-12 && c.exterior_defect <= 1e-12);
        assert!(c.chi.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(c.taints.iter().any(|t| t.contains("t_min")));
        assert_eq!(c.to_csv().lines().count(), space.vertex_count() + 1);
    });
}

#[test]
fn gauging_vanishing_potential_is_trivial() {
    let space = random_graph(6, 1);
    with_kernel(&space, |hk| {
        let g = gauging_function(hk, &PotentialField::zero(6), 1.0, &[0.5, 1.0]).unwrap();
        assert_eq!(g.iterations, 1);
        assert!(g.j_values.iter().flatten().all(|&j| j == 1.0));
    });
}

#[test]
fn gauging_rejects_large_kato_constant() {
    let space = random_graph(6, 1);
    with_kernel(&space, |hk| {
        let v = PotentialField::constant(6, 1.0).unwrap();
        assert!(gauging_function(hk, &v, 0.2, &[0.1]).is_err());
    });
}

#[test]
fn gauging_matches_schrodinger_semigroup() {
    let space = random_graph(5, 21);
    let v = vec![0.1, 0.0, 0.02, 0.0, 0.05];
    with_kernel(&space, |hk| {
        let g = gauging_function(hk, &PotentialField::new(v.clone()).unwrap(), 1.0, &[0.3, 1.0]).unwrap();
        for (t, row) in g.times.iter().zip(&g.i_values) {
            let shift: Vec<f64> = v.iter().map(|x| 2.0 * g.delta * x).collect();
            let p = dense_semigroup(&space, *t, &shift);
            let exact: Vec<f64> = (0..5).map(|x| (0..5).map(|y| p[(x, y)]).sum()).collect();
            assert!(max_rel(row, &exact) < 1e-6, "t = {t}");
        }
        assert!(g.bounds_violation() <= 1e-12);
    });
}

#[test]
fn harmonic_extension_reproduces_linear_data() {
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 20).unwrap()).unwrap();
    let [u, v] = local_coordinates(&space, 210).unwrap();
    let lin: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 1.0 + 2.0 * a - b).collect();
    let (interior, _, _) = ball_with_collar(&space, 210, 0.2).unwrap();
    let h = harmonic_extension(&space, &interior, &lin).unwrap();
    assert!(max_rel(&h, &lin) < 1e-10);
}

#[test]
fn splitting_map_on_flat_patch() {
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 40).unwrap()).unwrap();
    let [u, v] = local_coordinates(&space, 0).unwrap();
    let map = build_splitting_map(&space, 0, 0.15, &[u, v]).unwrap();
    let q = map.metrics;
    assert!(q.eps_lip < 1e-8 && q.eps_gram < 1e-8 && q.eps_hess < 1e-8);
    assert!(q.gh_defect < 0.05, "{}", q.gh_defect);
    assert_eq!(splitting_quality(&space, &map).unwrap(), q);
    let e = map.export();
    assert_eq!(e.fields[0].len(), e.vertices.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profile_monotone(a in -1.0f64..2.0, b in -1.0f64..2.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(smooth_profile(lo) >= smooth_profile(hi));
    }

    #[test]
    fn harmonic_replacement_obeys_maximum_principle(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let space = build_graph_space(&cycle(30, None).unwrap()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let boundary = [0usize, 10, 20];
        let data: Vec<f64> = (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let h = harmonic_replacement(&space, &boundary, &data).unwrap();
        let (lo, hi) = data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &d| (l.min(d), u.max(d)));
        prop_assert!(h.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
        for (b, d) in boundary.iter().zip(&data) {
            prop_assert_eq!(h[*b], *d);
        }
    }

    #[test]
    fn gauging_within_bounds(seed in 0u64..200, c in 0.0f64..0.1) {
        let space = random_graph(6, seed);
        let sp = full_spectrum(&space);
        let hk = HeatKernel::new(&space, &sp).unwrap();
        let v = PotentialField::new((0..6).map(|i| if (i as u64 + seed) % 2 == 0 { c } else { 0.0 }).collect()).unwrap();
        let g = gauging_function(&hk, &v, 1.0, &[0.25, 0.5, 1.0]).unwrap();
        prop_assert!(g.bounds_violation() <= 1e-9);
        prop_assert!(g.iterations <= g.iteration_budget);
    }
}
