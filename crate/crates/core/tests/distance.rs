#![allow(clippy::excessive_precision)]

mod common;

use std::f64::consts::PI;

use common::{random_point, rng, uniform};
use heis_tube::projection::distance_to_surface;
use heis_tube::tolerances::{HALFSPACE_PROJECTION, METRIC_INVARIANCE, MINIMIZING_ARC, PLANE_FOCUS, SADDLE_DISTANCE};
use heis_tube::{
    cc_distance, cc_geodesic, exp_s, parallel_surface_sample, project_to_surface, reach_estimate, Error, LevelSurface,
    Patch, Point, ProjectionOptions, Reach, ReachOptions, SeedGrid,
};
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = Point> {
    (prop::collection::vec(-2.0..2.0f64, 2 * n), -2.0..2.0f64).prop_map(|(z, t)| Point::new(&z, t))
}

#[test]
fn frozen_distances() {
    let d = cc_distance(&Point::new(&[0.2, -0.4], 0.3), &Point::new(&[-0.7, 0.5], 1.9));
    assert!((d - 2.1151613924617046611).abs() < 1e-13);
    let d = cc_distance(&Point::origin(1), &Point::new(&[1.0, 0.0], 0.25));
    assert!((d - 1.0867702039448220816).abs() < 1e-13);
}

#[test]
fn vertical_axis() {
    for t in [-3.0, 0.1, 1.0, 4.0] {
        let d = cc_distance(&Point::origin(2), &Point::new(&[0.0; 4], t));
        assert!((d - (2.0 * PI * f64::abs(t)).sqrt()).abs() < 1e-14);
    }
}

#[test]
fn horizontal_segment_is_euclidean() {
    let d = cc_distance(&Point::origin(2), &Point::new(&[0.3, -0.4, 1.2, 0.0], 0.0));
    assert!((d - 1.3).abs() < 1e-14);
}

#[test]
fn halfspace_projection() {
    let mut r = rng(41);
    let s = LevelSurface::halfspace_x1(1);
    let patch = Patch::graph_box(0, &[-1.5, -3.5], &[1.5, 3.5], 0.0).unwrap();
    let seeds = SeedGrid::new(&s, &patch, 16).unwrap();
    for _ in 0..100 {
        let (x, y, t) = (
            uniform(&mut r, 0.05, 2.0),
            uniform(&mut r, -1.0, 1.0),
            uniform(&mut r, -1.0, 1.0),
        );
        let res = project_to_surface(&s, &Point::new(&[x, y], t), &seeds, &ProjectionOptions::default()).unwrap();
        assert!((res.dist - x).abs() <= HALFSPACE_PROJECTION);
        assert!(res.foot.coord_distance(&Point::new(&[0.0, y], t - x * y)) <= HALFSPACE_PROJECTION);
        assert_eq!(res.multiplicity_hint, 1);
    }
}

#[test]
fn halfspace_projection_h2() {
    let mut r = rng(43);
    let s = LevelSurface::halfspace_x1(2);
    let patch = Patch::graph_box(0, &[-1.2, -1.2, -1.2, -3.0], &[1.2, 1.2, 1.2, 3.0], 0.0).unwrap();
    let seeds = SeedGrid::new(&s, &patch, 7).unwrap();
    for _ in 0..10 {
        let p = random_point(&mut r, 2, 1.0);
        let x = uniform(&mut r, 0.05, 1.5);
        let p = Point::new(&[x, p.z[1], p.z[2], p.z[3]], p.t);
        let res = project_to_surface(&s, &p, &seeds, &ProjectionOptions::default()).unwrap();
        assert!((res.dist - x).abs() <= HALFSPACE_PROJECTION);
        let foot = Point::new(&[0.0, p.z[1], p.z[2], p.z[3]], p.t - x * p.z[1]);
        assert!(res.foot.coord_distance(&foot) <= HALFSPACE_PROJECTION);
    }
}

#[test]
fn rejects_interior_points() {
    let s = LevelSurface::halfspace_x1(1);
    let patch = Patch::graph_box(0, &[-1.0, -1.0], &[1.0, 1.0], 0.0).unwrap();
    let seeds = SeedGrid::new(&s, &patch, 8).unwrap();
    let r = project_to_surface(
        &s,
        &Point::new(&[-0.5, 0.0], 0.0),
        &seeds,
        &ProjectionOptions::default(),
    );
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

fn plane_seeds() -> (LevelSurface, SeedGrid) {
    let s = LevelSurface::plane_t(1);
    let patch = Patch::annulus(2, 0.1, 3.0, &[], &[], 0.0).unwrap();
    let seeds = SeedGrid::new(&s, &patch, 24).unwrap();
    (s, seeds)
}

#[test]
fn plane_axis_is_equidistant() {
    let (s, seeds) = plane_seeds();
    for t in [0.1, 1.0, 4.0] {
        let p = Point::new(&[0.0, 0.0], t);
        match project_to_surface(&s, &p, &seeds, &ProjectionOptions::default()) {
            Err(Error::AmbiguousProjection { solutions }) => {
                assert!(solutions.len() >= 2);
                for sol in &solutions {
                    assert!((sol.dist / (PI * t).sqrt() - 1.0).abs() <= 1e-8);
                    assert!(sol.foot.t.abs() < 1e-12);
                    assert!((sol.foot.z[0].hypot(sol.foot.z[1]) - (4.0 * t / PI).sqrt()).abs() < 1e-8);
                }
            }
            other => panic!("expected several feet, got {other:?}"),
        }
        let d = distance_to_surface(&s, &p, &seeds, &ProjectionOptions::default()).unwrap();
        assert!((d / (PI * t).sqrt() - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn plane_focus() {
    // every normal geodesic from the circle of radius r₀ reaches the axis at s = πr₀/2
    let s = LevelSurface::plane_t(1);
    for (r0, th) in [(0.5, 0.3), (1.0, 2.0), (1.7, -1.1)] {
        let q = Point::new(&[r0 * f64::cos(th), r0 * f64::sin(th)], 0.0);
        let p = exp_s(&s, &q, PI * r0 / 2.0).unwrap();
        assert!(p.coord_distance(&Point::new(&[0.0, 0.0], PI * r0 * r0 / 4.0)) <= PLANE_FOCUS);
    }
}

fn saddle_seeds() -> (LevelSurface, SeedGrid) {
    let s = LevelSurface::saddle_t_xy(1);
    let patch = Patch::graph_box(2, &[-2.0, -3.0], &[2.0, 3.0], 0.0).unwrap();
    let seeds = SeedGrid::new(&s, &patch, 24).unwrap();
    (s, seeds)
}

#[test]
fn saddle_has_two_feet() {
    let (s, seeds) = saddle_seeds();
    for (x0, y0) in [(0.5, 0.2), (1.0, -0.4), (-0.8, 0.7)] {
        let p = Point::new(&[0.0, y0 - x0], PI * x0 * x0 / 2.0);
        match project_to_surface(&s, &p, &seeds, &ProjectionOptions::default()) {
            Err(Error::AmbiguousProjection { solutions }) => {
                assert_eq!(solutions.len(), 2);
                for sol in &solutions {
                    assert!((sol.dist - PI * f64::abs(x0) / 2.0).abs() <= SADDLE_DISTANCE);
                    assert!((sol.foot.z[0].abs() - f64::abs(x0)).abs() < 1e-8);
                }
            }
            other => panic!("expected two feet, got {other:?}"),
        }
    }
}

#[test]
fn saddle_axis() {
    // δ((0,0,t)) = √(πt/2) for the saddle t = xy
    let (s, seeds) = saddle_seeds();
    for t in [0.1, 1.0, 2.0] {
        let d = distance_to_surface(&s, &Point::new(&[0.0, 0.0], t), &seeds, &ProjectionOptions::default()).unwrap();
        assert!((d - (PI * t / 2.0).sqrt()).abs() <= SADDLE_DISTANCE, "t = {t}: {d}");
    }
}

#[test]
fn parallel_sample() {
    let s = LevelSurface::halfspace_x1(1);
    let patch = Patch::graph_box(0, &[-1.0, -1.0], &[1.0, 1.0], 0.0).unwrap();
    let pts = parallel_surface_sample(&s, &patch, 5, 0.4).unwrap();
    assert_eq!(pts.len(), 25);
    assert!(pts.iter().all(|p| (p.z[0] - 0.4).abs() < 1e-14));

    let (s, _) = plane_seeds();
    let patch = Patch::annulus(2, 1.0, 2.0, &[], &[], 0.0).unwrap();
    assert!(parallel_surface_sample(&s, &patch, 8, 0.3).is_ok());
    assert!(matches!(
        parallel_surface_sample(&s, &patch, 8, 2.5),
        Err(Error::ReachExceeded(_))
    ));
}

#[test]
fn reach() {
    let s = LevelSurface::halfspace_x1(1);
    let patch = Patch::graph_box(0, &[-1.0, -1.0], &[1.0, 1.0], 0.0).unwrap();
    let pts: Vec<Point> = patch.lattice(5).iter().map(|u| patch.point(&s, u).unwrap()).collect();
    assert_eq!(
        reach_estimate(&s, &pts, &ReachOptions::default()).unwrap(),
        Reach::Unbounded
    );

    let s = LevelSurface::plane_t(1);
    let patch = Patch::annulus(2, 1.0, 2.0, &[], &[], 0.0).unwrap();
    let pts: Vec<Point> = patch.lattice(8).iter().map(|u| patch.point(&s, u).unwrap()).collect();
    let Reach::Bounded(v) = reach_estimate(&s, &pts, &ReachOptions::default()).unwrap() else {
        panic!("plane reach should be finite");
    };
    assert!((v - PI / 2.0).abs() < 1e-4, "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symmetric(p in point(2), q in point(2)) {
        let (a, b) = (cc_distance(&p, &q), cc_distance(&q, &p));
        prop_assert!((a - b).abs() <= METRIC_INVARIANCE * (1.0 + a));
    }

    #[test]
    fn left_invariant(g in point(2), p in point(2), q in point(2)) {
        let a = cc_distance(&p, &q);
        let b = cc_distance(&(&g * &p), &(&g * &q));
        prop_assert!((a - b).abs() <= METRIC_INVARIANCE * (1.0 + a));
    }

    #[test]
    fn triangle(p in point(1), q in point(1), w in point(1)) {
        let slack = cc_distance(&p, &w) + cc_distance(&w, &q) - cc_distance(&p, &q);
        prop_assert!(slack >= -METRIC_INVARIANCE);
    }

    #[test]
    fn homogeneous(q in point(2), k in 0.1..10.0f64) {
        let z: Vec<f64> = q.z.iter().map(|v| k * v).collect();
        let a = cc_distance(&Point::origin(2), &Point::new(&z, k * k * q.t));
        let b = k * cc_distance(&Point::origin(2), &q);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn minimizing_arc(p in point(2), q in point(2)) {
        let arc = cc_geodesic(&p, &q);
        prop_assert!(arc.endpoint().coord_distance(&q) <= MINIMIZING_ARC * (1.0 + arc.length));
        prop_assert!(arc.within_minimizing_range());
        // restarting from any interior point reproduces the remaining length
        let mid = arc.point_at(0.4 * arc.length);
        let rest = cc_distance(&mid, &q);
        prop_assert!((rest - 0.6 * arc.length).abs() <= MINIMIZING_ARC * (1.0 + arc.length));
    }
}
