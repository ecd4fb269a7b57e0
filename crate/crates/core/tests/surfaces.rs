mod common;

use std::collections::BTreeMap;

use common::{random_point, rng, uniform};
use heis_tube::surface::{curvature_scalars, lambda_from_commutator, nabla_e_nuh_check};
use heis_tube::{
    fd_directional, frame_at, shape_operator, singular_set_scan, umbilic_check, Error, LevelSurface, Patch, Point,
    Polynomial, EPS_SING,
};
use nalgebra::DMatrix;
use rand::RngExt;

fn paraboloid_point(r: &mut rand_chacha::ChaCha8Rng, n: usize, a: f64) -> Point {
    let z: Vec<f64> = (0..2 * n).map(|_| uniform(r, -1.0, 1.0)).collect();
    let t = a * z.iter().map(|v| v * v).sum::<f64>();
    Point::new(&z, t)
}

fn saddle_point(r: &mut rand_chacha::ChaCha8Rng) -> Point {
    let (x, y) = (
        uniform(r, 0.2, 1.5) * if r.random_bool(0.5) { 1.0 } else { -1.0 },
        uniform(r, -1.0, 1.0),
    );
    Point::new(&[x, y], x * y)
}

fn cylinder_point(r: &mut rand_chacha::ChaCha8Rng, n: usize, radius: f64) -> Point {
    let z: Vec<f64> = (0..2 * n).map(|_| uniform(r, -1.0, 1.0)).collect();
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let z: Vec<f64> = z.iter().map(|v| radius * v / norm).collect();
    Point::new(&z, uniform(r, -1.0, 1.0))
}

/// `A(e_r, e_c) = −⟨∇_{e_c}ν_h, e_r⟩ − μ⟨J e_c, e_r⟩` with the derivative taken by finite differences.
fn shape_by_fd(surface: &LevelSurface, q: &Point) -> DMatrix<f64> {
    let f = frame_at(surface, q, EPS_SING).unwrap();
    let basis = f.horizontal_tangent_basis();
    let k = basis.len();
    let derivs: Vec<Vec<f64>> = basis
        .iter()
        .map(|e| {
            fd_directional(surface, q, e, 1e-4, |p| {
                Ok(surface.horizontal_normal(p)?.nu_h.h.to_vec())
            })
            .unwrap()
        })
        .collect();
    DMatrix::from_fn(k, k, |r, c| {
        let d: f64 = derivs[c].iter().zip(&basis[r].h).map(|(a, b)| a * b).sum();
        -d - f.mu * basis[c].j().dot(&basis[r])
    })
}

#[test]
fn halfspace_is_flat() {
    let s = LevelSurface::halfspace_x1(2);
    let (a, h, s2) = shape_operator(&s, &Point::new(&[0.0, 0.3, -0.4, 1.0], 2.0)).unwrap();
    assert!(a.iter().all(|v| v.abs() < 1e-15));
    assert_eq!((h, s2), (0.0, 0.0));
}

#[test]
fn plane_t() {
    // ν_h = (y, −x)/|z|, λ = 2/|z|, and the plane is minimal
    let s = LevelSurface::plane_t(1);
    let q = Point::new(&[0.6, -0.8], 0.0);
    let f = frame_at(&s, &q, EPS_SING).unwrap();
    assert!(f.nu_h.max_abs_diff(&heis_tube::FrameVector::horizontal(&[-0.8, -0.6])) < 1e-15);
    assert!((f.lambda - 2.0).abs() < 1e-15);
    assert!(f.mean_curvature.abs() < 1e-15);
    assert!((f.nh_norm - 1.0 / 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn saddle() {
    let s = LevelSurface::saddle_t_xy(1);
    let mut r = rng(3);
    for _ in 0..20 {
        let q = saddle_point(&mut r);
        let f = frame_at(&s, &q, EPS_SING).unwrap();
        assert!((f.lambda - 1.0 / q.z[0].abs()).abs() < 1e-12);
        assert!(f.mean_curvature.abs() < 1e-14);
    }
}

#[test]
fn singular_points_rejected() {
    let s = LevelSurface::saddle_t_xy(1);
    assert!(matches!(
        frame_at(&s, &Point::new(&[0.0, 0.7], 0.0), EPS_SING),
        Err(Error::SingularPoint { .. })
    ));
    let s = LevelSurface::paraboloid(2, 1.0);
    assert!(matches!(
        s.horizontal_normal(&Point::origin(2)),
        Err(Error::SingularPoint { .. })
    ));
}

#[test]
fn shape_matches_finite_differences() {
    let mut r = rng(5);
    let cases: Vec<(LevelSurface, Point)> = (0..10)
        .flat_map(|_| {
            vec![
                (LevelSurface::paraboloid(2, 0.7), paraboloid_point(&mut r, 2, 0.7)),
                (LevelSurface::paraboloid(1, 1.3), paraboloid_point(&mut r, 1, 1.3)),
                (LevelSurface::cylinder(2, 1.2), cylinder_point(&mut r, 2, 1.2)),
                (LevelSurface::saddle_t_xy(1), saddle_point(&mut r)),
            ]
        })
        .collect();
    for (s, q) in cases {
        let exact = shape_operator(&s, &q).unwrap().0;
        let fd = shape_by_fd(&s, &q);
        let err = (&exact - &fd).amax();
        assert!(err < 1e-7, "{:?}: {err}", q.coords());
    }
}

#[test]
fn lambda_derivatives_match_finite_differences() {
    let mut r = rng(9);
    let s = LevelSurface::paraboloid(2, 0.7);
    for _ in 0..10 {
        let q = paraboloid_point(&mut r, 2, 0.7);
        let f = frame_at(&s, &q, EPS_SING).unwrap();
        for (e, want) in f.basis.iter().zip(&f.dlam) {
            let d = fd_directional(&s, &q, e, 1e-4, |p| Ok(vec![s.horizontal_normal(p)?.lambda])).unwrap();
            assert!((d[0] - want).abs() < 1e-7 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn normal_derivative_along_characteristic() {
    let mut r = rng(21);
    for _ in 0..10 {
        for (s, q) in [
            (LevelSurface::paraboloid(2, 0.7), paraboloid_point(&mut r, 2, 0.7)),
            (LevelSurface::cylinder(2, 1.0), cylinder_point(&mut r, 2, 1.0)),
            (LevelSurface::saddle_t_xy(1), saddle_point(&mut r)),
        ] {
            let res = nabla_e_nuh_check(&s, &q).unwrap();
            assert!(res < 1e-7, "{res}");
        }
    }
}

#[test]
fn commutator_lambda() {
    let mut r = rng(23);
    for _ in 0..20 {
        for (s, q) in [
            (LevelSurface::paraboloid(1, 0.9), paraboloid_point(&mut r, 1, 0.9)),
            (LevelSurface::saddle_t_xy(1), saddle_point(&mut r)),
            (LevelSurface::cylinder(1, 1.1), cylinder_point(&mut r, 1, 1.1)),
        ] {
            let lam = frame_at(&s, &q, EPS_SING).unwrap().lambda;
            assert!((lambda_from_commutator(&s, &q).unwrap() - lam).abs() < 1e-12 * (1.0 + lam.abs()));
        }
    }
    let s = LevelSurface::plane_t(2);
    assert!(matches!(
        lambda_from_commutator(&s, &Point::new(&[1.0, 0.0, 0.0, 0.0], 0.0)),
        Err(Error::WrongDimension { .. })
    ));
}

#[test]
fn curvatures_independent_of_basis() {
    let mut r = rng(29);
    let s = LevelSurface::paraboloid(2, 0.7);
    for _ in 0..10 {
        let q = paraboloid_point(&mut r, 2, 0.7);
        let f = frame_at(&s, &q, EPS_SING).unwrap();
        let basis = f.horizontal_tangent_basis();
        let m = DMatrix::from_fn(3, 3, |_, _| uniform(&mut r, -1.0, 1.0));
        let rot = m.qr().q();
        let rotated: Vec<_> = (0..3)
            .map(|c| {
                (0..3).fold(heis_tube::FrameVector::zero(2), |acc, k| {
                    acc.axpy(rot[(k, c)], &basis[k])
                })
            })
            .collect();
        let (h, s2) = curvature_scalars(&f.shape_in_basis(&rotated));
        assert!((h - f.mean_curvature).abs() < 1e-12);
        assert!((s2 - f.sigma2).abs() < 1e-12);
    }
}

#[test]
fn left_translation_preserves_geometry() {
    let mut r = rng(31);
    let s = LevelSurface::paraboloid(2, 0.7);
    for _ in 0..10 {
        let q = paraboloid_point(&mut r, 2, 0.7);
        let h = random_point(&mut r, 2, 1.0);
        let moved = s.left_translated(&h).unwrap();
        let hq = &h * &q;
        assert!(moved.value(&hq).abs() < 1e-12);
        let (a, b) = (
            frame_at(&s, &q, EPS_SING).unwrap(),
            frame_at(&moved, &hq, EPS_SING).unwrap(),
        );
        assert!((a.lambda - b.lambda).abs() < 1e-10);
        assert!((a.nh_norm - b.nh_norm).abs() < 1e-12);
        assert!((a.mean_curvature - b.mean_curvature).abs() < 1e-10);
        assert!((a.sigma2 - b.sigma2).abs() < 1e-10);
        assert!(a.nu_h.max_abs_diff(&b.nu_h) < 1e-12);
    }
}

#[test]
fn umbilic_examples() {
    let mut r = rng(37);
    for _ in 0..5 {
        let q = paraboloid_point(&mut r, 2, 0.7);
        let rep = umbilic_check(&LevelSurface::paraboloid(2, 0.7), &q, 1e-8).unwrap();
        assert!(rep.is_umbilic, "{rep:?}");
        let res = rep.residuals.unwrap();
        assert!(res.z_relation.abs() < 1e-10 && res.v_normal_ratio < 1e-10);
        assert!(res.v_mu < 1e-6 && res.v_rho < 1e-6, "{res:?}");

        let q = cylinder_point(&mut r, 2, 1.0);
        assert!(
            umbilic_check(&LevelSurface::cylinder(2, 1.0), &q, 1e-8)
                .unwrap()
                .is_umbilic
        );
    }
    // elliptic cylinder x₁² + 2x₂² = 1
    let g = Polynomial::var(5, 0)
        .pow(2)
        .add(&Polynomial::var(5, 2).pow(2).scale(2.0))
        .sub(&Polynomial::constant(5, 1.0));
    let s = LevelSurface::new(2, g).unwrap();
    let c = 0.5f64.sqrt();
    let q = Point::new(&[c, 0.3, 0.5, -0.2], 0.1);
    assert!(!umbilic_check(&s, &q, 1e-8).unwrap().is_umbilic);
}

#[test]
fn singular_scan() {
    let s = LevelSurface::paraboloid(1, 1.0);
    let patch = Patch::graph_box(2, &[-0.73, -0.61], &[0.89, 0.47], 0.0).unwrap();
    let found = singular_set_scan(&s, &patch, 21, 1e-8).unwrap();
    assert_eq!(found.len(), 1);
    assert!(found[0].coord_distance(&Point::origin(1)) < 1e-8);

    // the singular set of t = xy is the line x = 0
    let s = LevelSurface::saddle_t_xy(1);
    let patch = Patch::graph_box(2, &[-0.77, -1.0], &[0.61, 1.0], 0.0).unwrap();
    let found = singular_set_scan(&s, &patch, 15, 1e-8).unwrap();
    assert!(!found.is_empty());
    assert!(found.iter().all(|q| q.z[0].abs() < 1e-8 && q.t.abs() < 1e-8));

    let s = LevelSurface::cylinder(1, 1.0);
    let patch = Patch::graph_box(0, &[-0.9, -1.0], &[0.9, 1.0], 1.0).unwrap();
    assert!(singular_set_scan(&s, &patch, 11, 1e-8).unwrap().is_empty());
}

#[test]
fn json_and_builtins() {
    for name in LevelSurface::BUILTIN_NAMES {
        let s = LevelSurface::builtin(name, 2, &BTreeMap::new()).unwrap();
        assert_eq!(LevelSurface::from_json(&s.to_json()).unwrap(), s);
    }
    let p = BTreeMap::from([("a".to_string(), 0.25)]);
    assert_eq!(
        LevelSurface::builtin("paraboloid", 1, &p).unwrap(),
        LevelSurface::paraboloid(1, 0.25)
    );
    assert!(LevelSurface::builtin("torus", 1, &BTreeMap::new()).is_err());
    assert!(LevelSurface::builtin("plane-t", 0, &BTreeMap::new()).is_err());
    assert!(LevelSurface::from_json("{").is_err());
}
