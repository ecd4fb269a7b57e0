#![allow(clippy::excessive_precision)]

mod common;

use std::f64::consts::PI;

use common::{rng, uniform};
use heis_tube::steiner::{
    det_b_first_derivative, det_b_second_derivative, parallel_area, series3_h1_cubic, surface_nodes, NormalJacobian,
};
use heis_tube::tolerances::{DET_B_TAYLOR, SERIES_MIN_ORDER, UMBILIC_VS_DET};
use heis_tube::{
    det_b, exp_s, frame_at, polynomial_witness, series3, steiner_coeffs_h1, tube_volume_h1, tube_volume_hn,
    tube_volume_umbilic, Error, LevelSurface, Patch, Point, Polynomial, SurfaceQuadrature, EPS_SING,
};
use nalgebra::DMatrix;

fn quad() -> SurfaceQuadrature {
    SurfaceQuadrature::default()
}

/// Method comparisons on 4-dimensional patches share their nodes, so a coarse rule suffices.
fn coarse() -> SurfaceQuadrature {
    SurfaceQuadrature { nodes: 5, panels: 1 }
}

fn plane_annulus() -> (LevelSurface, Patch) {
    (
        LevelSurface::plane_t(1),
        Patch::annulus(2, 1.0, 2.0, &[], &[], 0.0).unwrap(),
    )
}

fn paraboloid_patch() -> (LevelSurface, Patch) {
    (
        LevelSurface::paraboloid(2, 1.0),
        Patch::graph_box(4, &[0.2, -0.5, 0.1, -0.4], &[0.8, 0.3, 0.6, 0.2], 0.0).unwrap(),
    )
}

fn cylinder_patch() -> (LevelSurface, Patch) {
    // x₁ solved from |z|² = 1 over (y₁, x₂, y₂, t)
    (
        LevelSurface::cylinder(2, 1.0),
        Patch::graph_box(0, &[-0.3, -0.4, 0.1, -0.5], &[0.4, 0.2, 0.5, 0.5], 0.9).unwrap(),
    )
}

fn saddle_patch() -> (LevelSurface, Patch) {
    (
        LevelSurface::saddle_t_xy(1),
        Patch::graph_box(2, &[0.3, -0.5], &[1.0, 0.5], 0.0).unwrap(),
    )
}

// 30-digit quadrature of the closed-form integrand for g = t over 1 ≤ |z| ≤ 2
const PLANE_TUBE: [(f64, f64); 4] = [
    (0.05, 0.73303822040594946973),
    (0.1, 1.4660744796059523584),
    (0.2, 2.9320864199180894003),
    (0.5, 7.3240171849303044518),
];

#[test]
fn plane_annulus_volumes() {
    let (s, patch) = plane_annulus();
    let radii: Vec<f64> = PLANE_TUBE.iter().map(|r| r.0).collect();
    let h1 = tube_volume_h1(&s, &patch, quad(), &radii).unwrap();
    let hn = tube_volume_hn(&s, &patch, quad(), &radii).unwrap();
    for (k, (_, want)) in PLANE_TUBE.iter().enumerate() {
        assert!(
            (h1.volumes[k] / want - 1.0).abs() < 1e-12,
            "{} vs {want}",
            h1.volumes[k]
        );
        assert!(
            (hn.volumes[k] / want - 1.0).abs() < 1e-12,
            "{} vs {want}",
            hn.volumes[k]
        );
    }
    // the perimeter is 2π∫ρ² dρ; the quadratic and cubic terms vanish
    let c = h1.series3.c;
    assert!((c[0] - 14.0 * PI / 3.0).abs() < 1e-12);
    assert!(c[1].abs() < 1e-13 && c[2].abs() < 1e-12);
    assert!((series3_h1_cubic(&s, &patch, quad()).unwrap() - c[2]).abs() < 1e-12);
}

#[test]
fn plane_coefficients() {
    // a = |N_h| (1, 0, 4/ρ², 0, −4/ρ⁴) at radius ρ
    let s = LevelSurface::plane_t(1);
    let rho: f64 = 1.3;
    let a = steiner_coeffs_h1(&s, &Point::new(&[0.0, rho], 0.0)).unwrap().a;
    let nh = rho / (1.0 + rho * rho).sqrt();
    let want = [nh, 0.0, 4.0 * nh / rho.powi(2), 0.0, -4.0 * nh / rho.powi(4)];
    for (x, y) in a.iter().zip(&want) {
        assert!((x - y).abs() < 1e-14, "{a:?}");
    }
    assert!(matches!(
        steiner_coeffs_h1(&LevelSurface::plane_t(2), &Point::new(&[1.0, 0.0, 0.0, 0.0], 0.0)),
        Err(Error::WrongDimension { .. })
    ));
}

#[test]
fn h1_integrand_is_minus_det() {
    let mut r = rng(51);
    let (s, _) = saddle_patch();
    for _ in 0..20 {
        let (x, y) = (uniform(&mut r, 0.2, 1.5), uniform(&mut r, -1.0, 1.0));
        let q = Point::new(&[x, y], x * y);
        let f = frame_at(&s, &q, EPS_SING).unwrap();
        let a = steiner_coeffs_h1(&s, &q).unwrap();
        for k in 0..6 {
            let t = 0.3 * k as f64;
            assert!((a.integrand(f.lambda, t) + det_b(&s, &q, t).unwrap()).abs() < 1e-12);
        }
    }
}

/// `|det ∂(exp_S(q(u), s))/∂(u, s)|` over the area density, by central differences.
fn det_by_fd(surface: &LevelSurface, patch: &Patch, u: &[f64], s: f64) -> f64 {
    let map = |u: &[f64], s: f64| exp_s(surface, &patch.point(surface, u).unwrap(), s).unwrap().coords();
    let dim = u.len() + 1;
    let h = 1e-5;
    let mut jac = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let (mut up, mut um) = (u.to_vec(), u.to_vec());
        let (mut sp, mut sm) = (s, s);
        if c < u.len() {
            up[c] += h;
            um[c] -= h;
        } else {
            sp += h;
            sm -= h;
        }
        let (a, b) = (map(&up, sp), map(&um, sm));
        for r in 0..dim {
            jac[(r, c)] = (a[r] - b[r]) / (2.0 * h);
        }
    }
    let q = patch.point(surface, u).unwrap();
    let f = frame_at(surface, &q, EPS_SING).unwrap();
    jac.determinant().abs() / patch.area_density(surface, &q, u, f.grad_norm)
}

#[test]
fn det_matches_volume_distortion() {
    let mut r = rng(53);
    for (s, patch) in [paraboloid_patch(), cylinder_patch(), saddle_patch(), plane_annulus()] {
        let (lo, hi) = patch.param_bounds();
        for _ in 0..5 {
            let u: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| uniform(&mut r, *a, *b)).collect();
            let q = patch.point(&s, &u).unwrap();
            for t in [0.01, 0.1, 0.3] {
                let exact = det_b(&s, &q, t).unwrap().abs();
                let fd = det_by_fd(&s, &patch, &u, t);
                assert!((exact - fd).abs() < 1e-7 * (1.0 + exact), "{exact} vs {fd}");
            }
        }
    }
}

#[test]
fn taylor_at_zero() {
    let mut r = rng(57);
    let (s, patch) = paraboloid_patch();
    let (lo, hi) = patch.param_bounds();
    for _ in 0..20 {
        let u: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| uniform(&mut r, *a, *b)).collect();
        let f = frame_at(&s, &patch.point(&s, &u).unwrap(), EPS_SING).unwrap();
        let jac = NormalJacobian::new(&f);
        assert!((jac.det(0.0) + f.nh_norm).abs() < 1e-14);
        let h = 1e-3;
        let (p, z, m) = (jac.det(h), jac.det(0.0), jac.det(-h));
        let d1 = (p - m) / (2.0 * h);
        let d2 = (p - 2.0 * z + m) / (h * h);
        let (w1, w2) = (det_b_first_derivative(&f), det_b_second_derivative(&f));
        assert!((d1 - w1).abs() <= DET_B_TAYLOR * w1.abs(), "{d1} vs {w1}");
        assert!((d2 - w2).abs() <= DET_B_TAYLOR * w2.abs(), "{d2} vs {w2}");
    }
}

#[test]
fn series_order() {
    let radii: Vec<f64> = (0..9).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
    let (s, patch) = paraboloid_patch();
    let p = tube_volume_hn(&s, &patch, coarse(), &radii)
        .unwrap()
        .series3
        .remainder_order
        .unwrap();
    assert!(p >= SERIES_MIN_ORDER, "paraboloid order {p}");
    let (s, patch) = saddle_patch();
    let tube = tube_volume_h1(&s, &patch, quad(), &radii).unwrap();
    let p = tube.series3.remainder_order.unwrap();
    assert!(p >= SERIES_MIN_ORDER, "saddle order {p}");
    assert_eq!(tube.series3.c, series3(&s, &patch, quad()).unwrap());
}

#[test]
fn umbilic_reduction() {
    let radii = [0.02, 0.05, 0.1, 0.2];
    for (s, patch) in [paraboloid_patch(), cylinder_patch()] {
        let a = tube_volume_umbilic(&s, &patch, coarse(), &radii).unwrap();
        let b = tube_volume_hn(&s, &patch, coarse(), &radii).unwrap();
        for (x, y) in a.volumes.iter().zip(&b.volumes) {
            assert!((x / y - 1.0).abs() <= UMBILIC_VS_DET, "{x} vs {y}");
        }
    }
    let g = Polynomial::var(5, 0)
        .pow(2)
        .add(&Polynomial::var(5, 2).pow(2).scale(2.0))
        .sub(&Polynomial::constant(5, 1.0));
    let ellipse = LevelSurface::new(2, g).unwrap();
    let patch = Patch::graph_box(0, &[-0.3, -0.2, 0.1, -0.5], &[0.4, 0.2, 0.4, 0.5], 0.9).unwrap();
    assert!(matches!(
        tube_volume_umbilic(&ellipse, &patch, coarse(), &[0.1]),
        Err(Error::NotUmbilic { .. })
    ));
    let (s, patch) = plane_annulus();
    assert!(matches!(
        tube_volume_umbilic(&s, &patch, quad(), &[0.1]),
        Err(Error::WrongDimension { .. })
    ));
}

#[test]
fn coarea() {
    // d|U_r|/dr is the area of the parallel piece
    let (s, patch) = paraboloid_patch();
    let nodes = surface_nodes(&s, &patch, coarse()).unwrap();
    for r in [0.03, 0.08, 0.15] {
        let h = 1e-4;
        let v = tube_volume_hn(&s, &patch, coarse(), &[r - h, r + h]).unwrap().volumes;
        let fd = (v[1] - v[0]) / (2.0 * h);
        let area = parallel_area(&nodes, r);
        assert!((fd / area - 1.0).abs() < 1e-7, "{fd} vs {area}");
    }
    assert!((parallel_area(&nodes, 0.0) - series3(&s, &patch, coarse()).unwrap()[0]).abs() < 1e-12);
}

#[test]
fn polynomial_characterization() {
    let s = LevelSurface::cylinder(1, 1.0);
    let patch = Patch::graph_box(0, &[-0.6, -1.0], &[0.6, 1.0], 0.9).unwrap();
    let w = polynomial_witness(&s, &patch, quad(), 4, None).unwrap();
    assert!(w.is_polynomial && w.fitted_degree.unwrap() <= 2, "{w:?}");

    let (s, patch) = plane_annulus();
    let w = polynomial_witness(&s, &patch, quad(), 4, None).unwrap();
    assert!(!w.is_polynomial, "{w:?}");
}

#[test]
fn radius_checks() {
    let (s, patch) = plane_annulus();
    assert!(matches!(
        tube_volume_h1(&s, &patch, quad(), &[-0.1]),
        Err(Error::InvalidInput(_))
    ));
    assert!(matches!(
        tube_volume_hn(&s, &patch, quad(), &[3.5]),
        Err(Error::ReachExceeded(_))
    ));
    let v = tube_volume_hn(&s, &patch, quad(), &[0.0]).unwrap();
    assert_eq!(v.volumes, vec![0.0]);
}

#[test]
fn halfspace_tube_is_linear() {
    let s = LevelSurface::halfspace_x1(2);
    let patch = Patch::graph_box(0, &[0.0, 0.0, 0.0, 0.0], &[1.0, 2.0, 1.0, 1.5], 0.0).unwrap();
    let v = tube_volume_hn(&s, &patch, coarse(), &[0.5, 1.0, 7.0]).unwrap().volumes;
    for (x, r) in v.iter().zip([0.5, 1.0, 7.0]) {
        assert!((x / (3.0 * r) - 1.0).abs() < 1e-12);
    }
}
