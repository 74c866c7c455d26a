use katolab::convergence::*;
use katolab::generators::{cycle, flat_torus};
use katolab::geometry::{build_graph_space, build_mesh_space, rescale};
use proptest::prelude::*;

fn metric_from(points: &[(f64, f64)]) -> FiniteMetric {
    FiniteMetric::from_points(&points.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>()).unwrap()
}

#[test]
fn distance_to_a_point_is_half_diameter() {
    let x = metric_from(&[(0.0, 0.0), (1.0, 0.0), (0.3, 0.8), (0.5, 0.5)]);
    let p = metric_from(&[(0.0, 0.0)]);
    let g = gh_distance_small(&x, &p).unwrap();
    assert!((g.upper - x.diameter() / 2.0).abs() < 1e-15);
    assert_eq!(g.method, GhMethod::Exhaustive);
}

#[test]
fn equilateral_versus_two_points() {
    // triangle of side 1 against a segment of length 1: optimal distortion 1, so GH = 1/2
    let tri = FiniteMetric::new(3, vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
    let seg = FiniteMetric::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    assert!((gh_distance_small(&tri, &seg).unwrap().upper - 0.5).abs() < 1e-15);
}

#[test]
fn witnessing_correspondence_realizes_bound() {
    let x = metric_from(&[(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)]);
    let y = metric_from(&[(0.0, 0.0), (1.1, 0.0), (0.1, 1.9), (0.5, 0.5)]);
    let g = gh_distance_small(&x, &y).unwrap();
    assert!((distortion(&x, &y, &g.correspondence) / 2.0 - g.upper).abs() < 1e-15);
}

#[test]
fn halton_sequence_values() {
    assert_eq!(halton(1, 2), 0.5);
    assert_eq!(halton(2, 2), 0.25);
    assert_eq!(halton(3, 2), 0.75);
    assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn euclidean_sample_in_ball() {
    let pts = euclidean_ball_sample(2, 0.5, 50).unwrap();
    assert_eq!(pts.len(), 50);
    assert_eq!(pts[0], vec![0.0, 0.0]);
    assert!(pts.iter().all(|p| p[0].hypot(p[1]) <= 0.5 + 1e-15));
}

#[test]
fn flat_ball_is_close_to_euclidean() {
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 40).unwrap()).unwrap();
    let g = ball_gh_to_euclidean(&space, 0, 0.2, 2, 200).unwrap();
    assert!(g.lower <= g.upper);
    assert!(g.upper < 0.05, "{:?}", (g.lower, g.upper));
}

#[test]
fn transfer_function_rejects_uncovered_target() {
    let x = metric_from(&[(0.0, 0.0), (1.0, 0.0)]);
    let y = metric_from(&[(0.0, 0.0), (1.0, 0.0), (5.0, 0.0)]);
    assert!(transfer_function(&[(0, 0), (1, 1)], &y, &[1.0, 2.0], 0.1).is_err());
    let f = transfer_function(&[(0, 0), (1, 1), (1, 2)], &y, &[1.0, 2.0], 0.1).unwrap();
    assert_eq!(f.len(), 3);
    let _ = x;
}

#[test]
fn circle_spectrum_study_converges() {
    let spaces: Vec<_> = [40, 80, 160].iter().map(|&n| build_graph_space(&cycle(n, None).unwrap()).unwrap()).collect();
    let fam: Vec<_> = spaces.iter().collect();
    let st = spectral_convergence_study(&fam, 5, Some(&[0.0, 1.0, 1.0, 4.0, 4.0]), 0.01).unwrap();
    assert!(st.report.verdict.is_success());
    assert_eq!(st.to_csv().lines().next().unwrap().split(',').count() >= 2, true);
}

#[test]
fn tangent_probe_of_flat_point() {
    let space = build_mesh_space(&flat_torus(1.0, 1.0, 80).unwrap()).unwrap();
    let p = tangent_probe(&space, 0, &[0.12, 0.08], 40).unwrap();
    assert_eq!(p.rows.len(), 2);
    assert!(p.excluded.is_empty());
    for row in &p.rows {
        assert!(row.cone_defect < 0.25 && row.gh_defect < 0.6, "{row:?}");
    }
    // larger scales feel the periodic images through the Gaussian tails
    assert!(p.rows[1].theta_defect < 0.1 && p.rows[1].theta_defect < p.rows[0].theta_defect);
    assert_eq!(p.to_csv().lines().count(), 1 + 2 * p.rows[0].radii.len());
}

fn small_metric() -> impl Strategy<Value = FiniteMetric> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..6).prop_map(|p| metric_from(&p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gh_scales_and_bounds(x in small_metric(), y in small_metric(), s in 0.1f64..10.0) {
        let g = gh_distance_small(&x, &y).unwrap();
        prop_assert!(g.lower <= g.upper + 1e-15);
        let gs = gh_distance_small(&x.scaled(s), &y.scaled(s)).unwrap();
        prop_assert!((gs.upper - s * g.upper).abs() <= 1e-12 * (1.0 + s));
        prop_assert!(g.upper >= 0.5 * (x.diameter() - y.diameter()).abs() - 1e-15);
        prop_assert!(g.upper <= 0.5 * x.diameter().max(y.diameter()) + 1e-15);
    }

    #[test]
    fn greedy_bound_dominates(x in small_metric(), y in small_metric()) {
        let exact = gh_distance_small(&x, &y).unwrap().upper;
        let greedy = gh_upper_bound(&x, &y, 8);
        prop_assert!(greedy.upper >= exact - 1e-15);
        prop_assert!(greedy.lower <= exact + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tangent_probe_is_scale_consistent(a in 0.3f64..3.0, eps in 0.25f64..0.4) {
        let space = build_mesh_space(&flat_torus(1.0, 1.0, 24).unwrap()).unwrap();
        let scaled = rescale(&space, a).unwrap();
        let p = tangent_probe(&space, 5, &[eps], 30).unwrap();
        let q = tangent_probe(&scaled, 5, &[eps / a], 30).unwrap();
        prop_assert_eq!(p.rows.len(), 1);
        prop_assert_eq!(q.rows.len(), 1);
        let (p, q) = (&p.rows[0], &q.rows[0]);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * (1.0 + x.abs());
        for (x, y) in p.ratios.iter().zip(&q.ratios) {
            prop_assert!(close(*x, *y), "{} vs {}", x, y);
        }
        prop_assert!(close(p.cone_defect, q.cone_defect));
        prop_assert!(close(p.gh_defect, q.gh_defect), "{} vs {}", p.gh_defect, q.gh_defect);
        prop_assert!(close(p.theta_defect, q.theta_defect), "{} vs {}", p.theta_defect, q.theta_defect);
    }
}
