use katolab::generators::*;
use katolab::geometry::*;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn gauss_bonnet_on_closed_surfaces() {
    for (mesh, chi) in [
        (icosphere(1.0, 2).unwrap(), 2.0),
        (ellipsoid(1.0, 0.7, 0.5, 2).unwrap(), 2.0),
        (dumbbell(0.5, 1).unwrap(), 2.0),
        (flat_torus(1.0, 2.0, 8).unwrap(), 0.0),
    ] {
        let space = build_mesh_space(&mesh).unwrap();
        let k = gaussian_curvature(&space).unwrap();
        let total: f64 = k.iter().zip(space.measure()).map(|(a, b)| a * b).sum();
        assert!((total - 2.0 * PI * chi).abs() < 1e-9, "{total}");
    }
}

#[test]
fn lumped_measure_sums_to_area() {
    let mesh = flat_torus(1.5, 2.0, 10).unwrap();
    let space = build_mesh_space(&mesh).unwrap();
    assert!((space.total_measure() - 3.0).abs() < 1e-12);
    assert!((mesh.total_area() - 3.0).abs() < 1e-12);
}

#[test]
fn off_round_trip() {
    let mesh = icosphere(1.0, 1).unwrap();
    let back = read_off(&write_off(&mesh)).unwrap();
    let a = build_mesh_space(&mesh).unwrap();
    let b = build_mesh_space(&back).unwrap();
    let (ma, mb) = (a.measure(), b.measure());
    assert!(ma.iter().zip(mb).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn graph_text_round_trip() {
    let spec = cycle(7, Some(2.0)).unwrap();
    let back = read_graph(&write_graph(&spec)).unwrap();
    let (a, b) = (build_graph_space(&spec).unwrap(), build_graph_space(&back).unwrap());
    assert_eq!(a.stiffness().to_dense(), b.stiffness().to_dense());
    assert_eq!(a.distances_from(0), b.distances_from(0));
}

#[test]
fn cone_metric_has_prescribed_angle() {
    // unrolled-sector chord below angular separation π, through the apex above it
    let space = build_graph_space(&cone_graph(1.5 * PI, 16).unwrap()).unwrap();
    let chord = 2.0 * (0.375 * PI).sin();
    assert!((metric_cone_distance(1.0, 0.0, 1.0, 0.75 * PI, 1.5 * PI) - chord).abs() < 1e-12);
    assert!((metric_cone_distance(1.0, 0.0, 1.0, 1.2 * PI, 3.0 * PI) - 2.0).abs() < 1e-12);
    assert!((metric_cone_distance(0.5, 0.1, 0.7, 0.1, 1.5 * PI) - 0.2).abs() < 1e-12);
    assert!(space.vertex_count() > 16);
}

#[test]
fn disconnected_graph_is_rejected() {
    let spec = GraphSpec { dim: 1, measures: vec![1.0; 4], edges: vec![(0, 1, 1.0, None), (2, 3, 1.0, None)], ..Default::default() };
    assert!(matches!(build_graph_space(&spec), Err(katolab::Error::Disconnected(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rescale_scales_everything(eps in 0.1f64..5.0) {
        let space = build_mesh_space(&flat_torus(1.0, 1.0, 6).unwrap()).unwrap();
        let s = rescale(&space, eps).unwrap();
        prop_assert!((s.total_measure() - space.total_measure() / (eps * eps)).abs() < 1e-10 * s.total_measure());
        let (d0, d1) = (space.distances_from(3), s.distances_from(3));
        prop_assert!(d0.iter().zip(&d1).all(|(a, b)| (a / eps - b).abs() <= 1e-12 * (1.0 + b)));
        let u: Vec<f64> = (0..36).map(|i| (i as f64 * 0.37).sin()).collect();
        // the Dirichlet energy is scale invariant in dimension 2
        prop_assert!((s.energy(&u) - space.energy(&u)).abs() <= 1e-10 * space.energy(&u));
    }

    #[test]
    fn metric_axioms_on_meshes(level in 0usize..2) {
        let space = build_mesh_space(&icosphere(1.0, level).unwrap()).unwrap();
        let d = all_pairs(&space);
        let n = space.vertex_count();
        for i in 0..n {
            prop_assert_eq!(d[i * n + i], 0.0);
            for j in 0..n {
                prop_assert!((d[i * n + j] - d[j * n + i]).abs() < 1e-12);
                for k in (0..n).step_by(3) {
                    prop_assert!(d[i * n + k] <= d[i * n + j] + d[j * n + k] + 1e-12);
                }
            }
        }
    }
}
