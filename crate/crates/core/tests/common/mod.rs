#![allow(dead_code)]

use heis_tube::group::{coords_to_frame, frame_to_coords};
use heis_tube::{FrameVector, GeodesicArc, JacobiData, Point};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Point {
    let z: Vec<f64> = (0..2 * n).map(|_| uniform(rng, -scale, scale)).collect();
    Point::new(&z, uniform(rng, -scale, scale))
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> FrameVector {
    loop {
        let h: Vec<f64> = (0..2 * n).map(|_| uniform(rng, -1.0, 1.0)).collect();
        let v = FrameVector::horizontal(&h);
        if v.norm() > 0.1 {
            return v.normalized();
        }
    }
}

/// Random Jacobi data along `arc`, with `U̇(0)` horizontal and orthogonal to the velocity.
pub fn random_jacobi_data(rng: &mut ChaCha8Rng, arc: &GeodesicArc) -> JacobiData {
    let n = arc.base.n();
    let u0: Vec<f64> = (0..2 * n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let a: Vec<f64> = (0..2 * n).map(|_| uniform(rng, -1.0, 1.0)).collect();
    let a = FrameVector::horizontal(&a);
    let a = a.axpy(-a.dot(&arc.dir), &arc.dir);
    JacobiData {
        u0: FrameVector::new(&u0, uniform(rng, -1.0, 1.0)),
        u0dot: a,
        lambda_prime: uniform(rng, -1.0, 1.0),
    }
}

/// Member `ε` of the geodesic family: base moved along `U(0)`, direction
/// turned along `U̇(0)`, curvature shifted by `ελ′`.
pub fn family_member(arc: &GeodesicArc, data: &JacobiData, eps: f64) -> Point {
    let p = &arc.base;
    let step = frame_to_coords(p, &data.u0);
    let c: Vec<f64> = p.coords().iter().zip(&step).map(|(a, b)| a + eps * b).collect();
    let base = Point::from_coords(&c).unwrap();
    let dir = arc.dir.axpy(eps, &data.u0dot.horizontal_part()).normalized();
    GeodesicArc::new(base, dir, arc.curvature + eps * data.lambda_prime, arc.length)
        .unwrap()
        .endpoint()
}

/// `∂_ε` of the family at the endpoint, in frame components.
pub fn jacobi_fd(arc: &GeodesicArc, data: &JacobiData, eps: f64) -> FrameVector {
    let plus = family_member(arc, data, eps).coords();
    let minus = family_member(arc, data, -eps).coords();
    let d: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
    coords_to_frame(&arc.endpoint(), &d)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}
