//! Jacobi fields along geodesics of curvature λ.
//!
//! A variation through unit-speed geodesics with curvature `λ + ελ′` gives a
//! field `U` whose horizontal part solves `Ü_h + λJ(U̇_h) + λ′J(γ̇) = 0`, so
//!
//! ```text
//! U_h(s) = U_h(0) + f₁ U̇_h(0) − λ f₂ J(U̇_h(0)) + λ′ (λ k γ̇(s) − f₂ J(γ̇(s)))
//! ```
//!
//! in frame components, while `c = ⟨U, T⟩` solves `c⃛ + λ² ċ + 2λ′ = 0`.

use serde::{Deserialize, Serialize};

use crate::geodesic::GeodesicArc;
use crate::group::FrameVector;
use crate::special::ArcWeights;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiData {
    /// `U(0)`.
    pub u0: FrameVector,
    /// `U̇(0)`; only its horizontal part enters the horizontal formula.
    pub u0dot: FrameVector,
    /// `λ′ = U(λ)`.
    pub lambda_prime: f64,
}

/// Initial data `(c(0), ċ(0), c̈(0))` of the vertical component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalData {
    pub c0: f64,
    pub c0dot: f64,
    pub c0ddot: f64,
}

impl JacobiData {
    /// Vertical initial data along `arc`: `ċ = 2⟨U, Jγ̇⟩` and
    /// `c̈ = 2⟨U̇, Jγ̇⟩ + 2λ⟨U, γ̇⟩` at `s = 0`.
    pub fn vertical_data(&self, arc: &GeodesicArc) -> VerticalData {
        let v = &arc.dir;
        let jv = v.j();
        VerticalData {
            c0: self.u0.vert,
            c0dot: 2.0 * self.u0.dot(&jv),
            c0ddot: 2.0 * (self.u0dot.dot(&jv) + arc.curvature * self.u0.dot(v)),
        }
    }

    /// Full field `U(s)` in frame components at `s = arc.length`.
    pub fn field(&self, arc: &GeodesicArc) -> FrameVector {
        let mut u = jacobi_horizontal(self, arc);
        let vd = self.vertical_data(arc);
        u.vert = c_solution(vd.c0, vd.c0dot, vd.c0ddot, arc.curvature, self.lambda_prime, arc.length);
        u
    }
}

/// Horizontal part of the Jacobi field at `s = arc.length`.
pub fn jacobi_horizontal(data: &JacobiData, arc: &GeodesicArc) -> FrameVector {
    let lambda = arc.curvature;
    let s = arc.length;
    let w = ArcWeights::new(lambda, s);
    let (f1, f2) = (w.f[1], w.f[2]);
    let ud = data.u0dot.horizontal_part();
    let gdot = arc.tangent_at(s);
    let lp = data.lambda_prime;
    data.u0
        .horizontal_part()
        .axpy(f1, &ud)
        .axpy(-lambda * f2, &ud.j())
        .axpy(lp * lambda * w.k, &gdot)
        .axpy(-lp * f2, &gdot.j())
}

/// `c(s) = c(0) + ċ(0) f₁ + c̈(0) f₂ − 2λ′ k`.
pub fn c_solution(c0: f64, c0dot: f64, c0ddot: f64, lambda: f64, lambda_prime: f64, s: f64) -> f64 {
    let w = ArcWeights::new(lambda, s);
    c0 + c0dot * w.f[1] + c0ddot * w.f[2] - 2.0 * lambda_prime * w.k
}

/// `ċ(s) = ċ(0) f₀ + c̈(0) f₁ − 2λ′ f₂`.
pub fn c_derivative(c0dot: f64, c0ddot: f64, lambda: f64, lambda_prime: f64, s: f64) -> f64 {
    let w = ArcWeights::new(lambda, s);
    c0dot * w.f[0] + c0ddot * w.f[1] - 2.0 * lambda_prime * w.f[2]
}

/// `c̈(s) = −λ² ċ(0) f₁ + c̈(0) f₀ − 2λ′ f₁`.
pub fn c_second_derivative(c0dot: f64, c0ddot: f64, lambda: f64, lambda_prime: f64, s: f64) -> f64 {
    let w = ArcWeights::new(lambda, s);
    -lambda * lambda * c0dot * w.f[1] + c0ddot * w.f[0] - 2.0 * lambda_prime * w.f[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Point;

    #[test]
    fn constant_field_is_transported() {
        let arc = GeodesicArc::new(Point::origin(2), FrameVector::x(2, 1), 1.3, 0.9).unwrap();
        let data = JacobiData {
            u0: FrameVector::new(&[0.1, 0.2, 0.3, 0.4], 0.5),
            u0dot: FrameVector::zero(2),
            lambda_prime: 0.0,
        };
        let u = jacobi_horizontal(&data, &arc);
        assert!(u.max_abs_diff(&data.u0.horizontal_part()) < 1e-15);
    }

    #[test]
    fn flat_vertical_component() {
        let (c0, c1, c2, lp, s): (f64, f64, f64, f64, f64) = (0.3, -1.1, 0.7, 0.4, 1.7);
        let expect = c0 + c1 * s + 0.5 * c2 * s * s - lp / 3.0 * s.powi(3);
        assert!((c_solution(c0, c1, c2, 0.0, lp, s) - expect).abs() < 1e-14);
    }

    #[test]
    fn derivative_without_forcing() {
        let (c1, lambda, s) = (0.8, 2.1, 0.6);
        let d = c_derivative(c1, 0.0, lambda, 0.0, s);
        assert!((d - c1 * (lambda * s).cos()).abs() < 1e-15);
    }
}
