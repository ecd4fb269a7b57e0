//! Geodesics of curvature λ.
//!
//! A unit-speed horizontal curve with `∇_γ̇ γ̇ + λ J(γ̇) = 0` starting at `p`
//! with velocity `w` (frame components) is, with `x = λs`,
//!
//! ```text
//! z(s) = z_p + s (sinc(x) w − versin_ratio(x) Jw)
//! t(s) = t_p + |w|² s² sin_defect2(x) + ⟨z_p, s (versin_ratio(x) w + sinc(x) Jw)⟩
//! γ̇(s) = cos(x) w − sin(x) Jw            (frame components)
//! ```
//!
//! For λ = 0 these are horizontal straight lines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{dot, frame_to_coords, j_horizontal, symplectic, Coords, FrameVector, Point};
use crate::special::{sin_defect2, sinc, versin_ratio};

/// Tolerance on `|dir| = 1` accepted by [`GeodesicArc::new`].
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicArc {
    pub base: Point,
    pub dir: FrameVector,
    pub curvature: f64,
    pub length: f64,
}

impl GeodesicArc {
    pub fn new(base: Point, dir: FrameVector, curvature: f64, length: f64) -> Result<Self> {
        if dir.h.len() != base.z.len() {
            return Err(Error::DimensionMismatch {
                expected: base.n(),
                found: dir.n(),
            });
        }
        if dir.vert != 0.0 {
            return Err(Error::InvalidInput("geodesic direction must be horizontal".into()));
        }
        if (dir.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidInput(format!(
                "geodesic direction must be unit, |dir| = {}",
                dir.norm()
            )));
        }
        if !(length >= 0.0) || !curvature.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need finite curvature and length ≥ 0, got λ = {curvature}, s = {length}"
            )));
        }
        Ok(GeodesicArc {
            base,
            dir,
            curvature,
            length,
        })
    }

    /// Same geodesic, different length.
    pub fn with_length(&self, length: f64) -> GeodesicArc {
        GeodesicArc { length, ..self.clone() }
    }

    pub fn endpoint(&self) -> Point {
        geodesic_point(self)
    }

    pub fn tangent(&self) -> FrameVector {
        geodesic_tangent(self)
    }

    pub fn point_at(&self, s: f64) -> Point {
        point_with_velocity(&self.base, &self.dir.h, self.curvature, s)
    }

    pub fn tangent_at(&self, s: f64) -> FrameVector {
        tangent_with_velocity(&self.dir.h, self.curvature, s)
    }

    /// `|λ s| ≤ 2π`, the range on which the arc can be length-minimizing.
    pub fn within_minimizing_range(&self) -> bool {
        (self.curvature * self.length).abs() <= 2.0 * std::f64::consts::PI
    }
}

/// Endpoint of `arc`.
pub fn geodesic_point(arc: &GeodesicArc) -> Point {
    arc.point_at(arc.length)
}

/// Velocity of `arc` at its endpoint, in frame components.
pub fn geodesic_tangent(arc: &GeodesicArc) -> FrameVector {
    arc.tangent_at(arc.length)
}

/// Closed-form point of the geodesic through `base` with arbitrary (not
/// necessarily unit) horizontal velocity `w` and curvature `lambda`.
pub fn point_with_velocity(base: &Point, w: &[f64], lambda: f64, s: f64) -> Point {
    let x = lambda * s;
    let (f, g) = (sinc(x), versin_ratio(x));
    let jw = j_horizontal(w);
    let mut z = Coords::with_capacity(w.len());
    let mut t = base.t + dot(w, w) * s * s * sin_defect2(x);
    for k in 0..w.len() {
        z.push(base.z[k] + s * (f * w[k] - g * jw[k]));
        t += base.z[k] * s * (g * w[k] + f * jw[k]);
    }
    Point { z, t }
}

pub fn tangent_with_velocity(w: &[f64], lambda: f64, s: f64) -> FrameVector {
    let (sn, cs) = (lambda * s).sin_cos();
    let jw = j_horizontal(w);
    FrameVector {
        h: w.iter().zip(&jw).map(|(a, b)| cs * a - sn * b).collect(),
        vert: 0.0,
    }
}

/// Coordinate velocity of the arc at parameter `s`.
pub fn coordinate_velocity(arc: &GeodesicArc, s: f64) -> Vec<f64> {
    frame_to_coords(&arc.point_at(s), &arc.tangent_at(s))
}

/// Fixed-step RK4 integration of the geodesic system
///
/// ```text
/// ż = h,  ṫ = Σ(ẋᵢ yᵢ − xᵢ ẏᵢ),  ḣ = −λ J(h)
/// ```
///
/// from `arc.base` with `h(0) = arc.dir` over `[0, arc.length]`.
pub fn geodesic_ode_oracle(arc: &GeodesicArc, steps: usize) -> Point {
    let steps = steps.max(1);
    let m = arc.base.z.len();
    let lambda = arc.curvature;
    // state: z (m), t, h (m)
    let rhs = |y: &[f64]| -> Vec<f64> {
        let (z, rest) = y.split_at(m);
        let h = &rest[1..];
        let jh = j_horizontal(h);
        let mut d = Vec::with_capacity(2 * m + 1);
        d.extend_from_slice(h);
        d.push(symplectic(z, h));
        d.extend(jh.iter().map(|v| -lambda * v));
        d
    };
    let mut y: Vec<f64> = arc.base.z.iter().copied().collect();
    y.push(arc.base.t);
    y.extend_from_slice(&arc.dir.h);
    let dt = arc.length / steps as f64;
    let axpy = |y: &[f64], c: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, 0.5 * dt, &k1));
        let k3 = rhs(&axpy(&y, 0.5 * dt, &k2));
        let k4 = rhs(&axpy(&y, dt, &k3));
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    Point {
        z: Coords::from_slice(&y[..m]),
        t: y[m],
    }
}
