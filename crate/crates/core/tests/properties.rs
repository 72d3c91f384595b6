use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use removable_core::certify::{
    adjacent_cube_estimate, carpet_counterexample, measure_zero_bound, TestFunction,
};
use removable_core::detour::{
    detour_path, group_paths, interval_cover, validate_partition, verify_detour, working_level,
};
use removable_core::fractal::{
    apollonian, cantor_staircase, gasket_levels, tangency_report, verify_nested_construction,
    TangentCircleTriple,
};
use removable_core::qhyp::{holder_fit, qh_distance, QhGraph};
use removable_core::whitney::{refine_for_qh, whitney_decompose, ShapeDomain};
use removable_core::{Error, FractalApproximation, Line, Point, SceneComponent, Shape};

fn gasket() -> &'static FractalApproximation {
    static G: OnceLock<FractalApproximation> = OnceLock::new();
    G.get_or_init(|| gasket_levels(8).unwrap())
}

fn disk_graph(cutoff: i32) -> QhGraph {
    QhGraph::new(
        refine_for_qh(&whitney_decompose(Arc::new(ShapeDomain::unit_disk()), cutoff).unwrap())
            .unwrap(),
    )
}

fn disk8() -> &'static QhGraph {
    static G: OnceLock<QhGraph> = OnceLock::new();
    G.get_or_init(|| disk_graph(8))
}

fn arb_disk_point(r: f64) -> impl Strategy<Value = Point> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(move |(u, t)| Point::new(r * u.sqrt() * t.cos(), r * u.sqrt() * t.sin()))
}

fn arb_line() -> impl Strategy<Value = Line> {
    (any::<bool>(), -0.05..1.05f64).prop_map(|(h, o)| {
        if h {
            Line::horizontal(o * 0.9)
        } else {
            Line::vertical(o)
        }
    })
}

/// Three mutually tangent circles with radii r1, r2, r3.
fn triple(r1: f64, r2: f64, r3: f64) -> TangentCircleTriple {
    let (a, b) = (r1 + r2, r1 + r3);
    let c = r2 + r3;
    let x = (a * a + b * b - c * c) / (2.0 * a);
    let y = (b * b - x * x).max(0.0).sqrt();
    let disc = |i, p: Point, r| SceneComponent::bounded(i, Shape::circle(p, r).unwrap());
    TangentCircleTriple::new(
        disc(1, Point::new(0.0, 0.0), r1),
        disc(2, Point::new(a, 0.0), r2),
        disc(3, Point::new(x, y), r3),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn apollonian_circles_are_disjoint_and_tangent(r1 in 0.5..2.0f64, r2 in 0.5..2.0f64, r3 in 0.5..2.0f64) {
        let f = apollonian(&triple(r1, r2, r3), 0.08).unwrap();
        let t = tangency_report(&f).unwrap();
        prop_assert!(t.max_overlap <= 1e-9, "{t:?}");
        prop_assert!(t.max_residual <= 1e-9, "{t:?}");
        prop_assert!(verify_nested_construction(&f).pass);
    }

    #[test]
    fn staircase_is_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cantor_staircase(x, 48).unwrap().value <= cantor_staircase(y, 48).unwrap().value);
    }

    #[test]
    fn whitney_cubes_on_random_triangles(
        p in (0.1..0.9f64, 0.1..0.9f64),
        q in (0.1..0.9f64, 0.1..0.9f64),
        r in (0.1..0.9f64, 0.1..0.9f64),
    ) {
        let pts = [Point::new(p.0, p.1), Point::new(q.0, q.1), Point::new(r.0, r.1)];
        let area = ((pts[1] - pts[0]).cross(pts[2] - pts[0])).abs() / 2.0;
        prop_assume!(area > 0.02);
        let w = whitney_decompose(Arc::new(ShapeDomain(Shape::polygon(pts.to_vec()).unwrap())), 8).unwrap();
        for (i, a) in w.cubes.iter().enumerate() {
            prop_assert!(a.side() <= w.dist_lo[i]);
            prop_assert!(w.dist_lo[i] <= 4.0 * std::f64::consts::SQRT_2 * a.side() * (1.0 + 1e-9));
            for b in &w.cubes[i + 1..] {
                prop_assert!(!a.interiors_intersect(b));
            }
        }
    }

    #[test]
    fn qh_triangle_inequality(a in arb_disk_point(0.9), b in arb_disk_point(0.9), c in arb_disk_point(0.9)) {
        let g = disk8();
        let ab = qh_distance(g, a, b).unwrap();
        let bc = qh_distance(g, b, c).unwrap();
        let ac = qh_distance(g, a, c).unwrap();
        prop_assert_eq!(ab, qh_distance(g, b, a).unwrap());
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn detour_paths_verify(line in arb_line(), eps in 0.04..0.3f64) {
        let g = gasket();
        match detour_path(&line, g, eps) {
            Err(Error::ExceptionalLine { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            Ok(out) => {
                let p = out.path().expect("gasket lines give paths");
                prop_assert!(verify_detour(p, g).pass);
                for arc in &p.arcs {
                    prop_assert!(arc.diameter < eps);
                }
            }
        }
    }

    #[test]
    fn cover_lies_in_solid_hits(line in arb_line(), m in 0u32..6) {
        let g = gasket();
        let cover = interval_cover(&line, g, m).unwrap();
        let hits: Vec<_> = g.solids_at(m).iter().flat_map(|s| s.shape.line_hits(&line)).collect();
        for c in &cover {
            prop_assert!(hits.iter().any(|h| h.lo <= c.interval.lo && c.interval.hi <= h.hi));
        }
    }
}

#[test]
fn grouping_partitions_touched_sets() {
    let g = gasket();
    let eps = 0.1;
    let m = working_level(g, eps).unwrap();
    let paths: Vec<_> = (0..30)
        .map(|k| Line::horizontal(0.013 + 0.0271 * k as f64))
        .filter_map(|l| detour_path(&l, g, eps).ok()?.path().cloned())
        .collect();
    assert!(paths.len() > 20 && paths.iter().all(|p| p.level == m));
    let part = group_paths(&paths, g);
    assert!(validate_partition(&part, &paths, g));
    for (i, a) in part.groups.iter().enumerate() {
        for b in &part.groups[i + 1..] {
            for &x in a {
                for &y in b {
                    assert!(paths[x]
                        .touched
                        .iter()
                        .all(|t| !paths[y].touched.contains(t)));
                }
            }
        }
    }
}

#[test]
fn qh_distance_settles_under_refinement() {
    let (a, b) = (Point::new(0.1, -0.2), Point::new(-0.5, 0.6));
    let coarse = qh_distance(&disk_graph(7), a, b).unwrap();
    let fine = qh_distance(&disk_graph(8), a, b).unwrap();
    assert!(fine <= coarse + 0.1, "{coarse} → {fine}");
}

#[test]
fn holder_fit_dominates_disk_samples() {
    let fit = holder_fit(disk8(), Point::new(0.0, 0.0), 64).unwrap();
    assert!(fit.fit().unwrap().max_residual <= 1e-6);
}

#[test]
fn adjacent_estimate_on_every_disk_pair() {
    let w = whitney_decompose(Arc::new(ShapeDomain::unit_disk()), 6).unwrap();
    let fns = [
        TestFunction::constant(2.0),
        TestFunction::x(),
        TestFunction::x2_plus_y(),
        TestFunction::sin_product(),
        TestFunction::exp_cos(),
    ];
    for f in &fns {
        for &(i, j) in &w.adjacency {
            let e = adjacent_cube_estimate(&w, f, i, j).unwrap();
            assert!(e.pass, "{} on ({i}, {j}): {e:?}", f.name);
        }
    }
}

#[test]
fn carpet_energy_is_monotone() {
    let r = carpet_counterexample(3.0, 7, 0.5).unwrap();
    assert!(r.energy_by_level.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn certificates_are_deterministic() {
    let g = gasket();
    let line = Line::horizontal(0.3001);
    let a = serde_json::to_string(&measure_zero_bound(g, &line, 3).unwrap()).unwrap();
    let b = serde_json::to_string(&measure_zero_bound(g, &line, 3).unwrap()).unwrap();
    assert_eq!(a, b);
}
