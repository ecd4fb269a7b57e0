//! Group structure of ℍⁿ in exponential coordinates `(x₁, y₁, …, xₙ, yₙ, t)`.
//!
//! The product is
//!
//! ```text
//! (z, t) · (w, s) = (z + w, t + s + Σᵢ (y_z,i x_w,i − x_z,i y_w,i))
//! ```
//!
//! with contact form `θ = dt + Σ(−yᵢ dxᵢ + xᵢ dyᵢ)` and left-invariant frame
//! `Xᵢ = ∂xᵢ + yᵢ ∂t`, `Yᵢ = ∂yᵢ − xᵢ ∂t`, `T = ∂t`, so that `[Xᵢ, Yᵢ] = −2T`.
//!
//! Tangent vectors are carried as [`FrameVector`]s, i.e. components in that
//! frame. Because the frame is parallel for the pseudo-hermitian connection,
//! covariant derivatives of fields reduce to derivatives of these components.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Inline storage for the `2n` horizontal entries; spills to the heap for n > 2.
pub type Coords = SmallVec<[f64; 4]>;

/// A point `(z, t)` of ℍⁿ, `z = (x₁, y₁, …, xₙ, yₙ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: Coords,
    pub t: f64,
}

/// Tangent vector in the basis `X₁, Y₁, …, Xₙ, Yₙ, T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameVector {
    pub h: Coords,
    pub vert: f64,
}

impl Point {
    /// # Panics
    /// If `z` has odd length or is empty.
    pub fn new(z: &[f64], t: f64) -> Self {
        assert!(
            !z.is_empty() && z.len().is_multiple_of(2),
            "z must hold 2n entries, got {}",
            z.len()
        );
        Point {
            z: Coords::from_slice(z),
            t,
        }
    }

    pub fn try_new(z: &[f64], t: f64) -> Result<Self> {
        if z.is_empty() || !z.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("z must hold 2n entries, got {}", z.len())));
        }
        Ok(Point::new(z, t))
    }

    pub fn origin(n: usize) -> Self {
        Point {
            z: SmallVec::from_elem(0.0, 2 * n),
            t: 0.0,
        }
    }

    /// Builds a point from the flat coordinate vector `(x₁, y₁, …, t)`.
    pub fn from_coords(c: &[f64]) -> Result<Self> {
        match c.split_last() {
            Some((t, z)) => Point::try_new(z, *t),
            None => Err(Error::InvalidInput("empty coordinate vector".into())),
        }
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    /// Coordinate count `2n + 1`.
    pub fn dim(&self) -> usize {
        self.z.len() + 1
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.dim());
        c.extend_from_slice(&self.z);
        c.push(self.t);
        c
    }

    pub fn coord(&self, k: usize) -> f64 {
        if k < self.z.len() {
            self.z[k]
        } else {
            self.t
        }
    }

    /// Euclidean distance in coordinates; used for numerical tie-breaking only.
    pub fn coord_distance(&self, other: &Point) -> f64 {
        let dz: f64 = self.z.iter().zip(&other.z).map(|(a, b)| (a - b) * (a - b)).sum();
        (dz + (self.t - other.t).powi(2)).sqrt()
    }

    pub fn inv(&self) -> Point {
        Point {
            z: self.z.iter().map(|v| -v).collect(),
            t: -self.t,
        }
    }

    /// Group product without the dimension check.
    ///
    /// # Panics
    /// In debug builds, if the dimensions differ.
    pub fn compose(&self, other: &Point) -> Point {
        debug_assert_eq!(self.z.len(), other.z.len());
        let z = self.z.iter().zip(&other.z).map(|(a, b)| a + b).collect();
        Point {
            z,
            t: self.t + other.t + symplectic(&self.z, &other.z),
        }
    }
}

/// `Σᵢ (y_a,i x_b,i − x_a,i y_b,i)`, the vertical cocycle of the group law.
pub fn symplectic(a: &[f64], b: &[f64]) -> f64 {
    a.chunks_exact(2)
        .zip(b.chunks_exact(2))
        .map(|(p, q)| p[1] * q[0] - p[0] * q[1])
        .sum()
}

fn same_n(p: &Point, q: &Point) -> Result<()> {
    if p.z.len() != q.z.len() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: q.n(),
        });
    }
    Ok(())
}

pub fn group_mul(p: &Point, q: &Point) -> Result<Point> {
    same_n(p, q)?;
    Ok(p.compose(q))
}

pub fn group_inv(p: &Point) -> Point {
    p.inv()
}

impl Mul for &Point {
    type Output = Point;

    /// # Panics
    /// In debug builds, if the dimensions differ.
    fn mul(self, rhs: &Point) -> Point {
        self.compose(rhs)
    }
}

impl FrameVector {
    pub fn zero(n: usize) -> Self {
        FrameVector {
            h: SmallVec::from_elem(0.0, 2 * n),
            vert: 0.0,
        }
    }

    pub fn horizontal(h: &[f64]) -> Self {
        FrameVector {
            h: Coords::from_slice(h),
            vert: 0.0,
        }
    }

    pub fn new(h: &[f64], vert: f64) -> Self {
        FrameVector {
            h: Coords::from_slice(h),
            vert,
        }
    }

    /// `Xᵢ` for `i` in `0..n`.
    pub fn x(n: usize, i: usize) -> Self {
        let mut v = FrameVector::zero(n);
        v.h[2 * i] = 1.0;
        v
    }

    /// `Yᵢ` for `i` in `0..n`.
    pub fn y(n: usize, i: usize) -> Self {
        let mut v = FrameVector::zero(n);
        v.h[2 * i + 1] = 1.0;
        v
    }

    pub fn t(n: usize) -> Self {
        let mut v = FrameVector::zero(n);
        v.vert = 1.0;
        v
    }

    /// Basis vector number `k` in the order `X₁, Y₁, …, Xₙ, Yₙ, T`.
    pub fn basis(n: usize, k: usize) -> Self {
        let mut v = FrameVector::zero(n);
        if k < 2 * n {
            v.h[k] = 1.0;
        } else {
            v.vert = 1.0;
        }
        v
    }

    pub fn n(&self) -> usize {
        self.h.len() / 2
    }

    pub fn is_horizontal(&self) -> bool {
        self.vert == 0.0
    }

    /// `J`: `Xᵢ ↦ Yᵢ`, `Yᵢ ↦ −Xᵢ`, `T ↦ 0`.
    pub fn j(&self) -> FrameVector {
        FrameVector {
            h: j_horizontal(&self.h),
            vert: 0.0,
        }
    }

    pub fn horizontal_part(&self) -> FrameVector {
        FrameVector {
            h: self.h.clone(),
            vert: 0.0,
        }
    }

    /// Inner product of the Riemannian metric making the frame orthonormal.
    pub fn dot(&self, other: &FrameVector) -> f64 {
        dot(&self.h, &other.h) + self.vert * other.vert
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> FrameVector {
        FrameVector {
            h: self.h.iter().map(|v| c * v).collect(),
            vert: c * self.vert,
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &FrameVector) -> FrameVector {
        FrameVector {
            h: self.h.iter().zip(&other.h).map(|(a, b)| a + c * b).collect(),
            vert: self.vert + c * other.vert,
        }
    }

    pub fn normalized(&self) -> FrameVector {
        self.scale(1.0 / self.norm())
    }

    pub fn max_abs_diff(&self, other: &FrameVector) -> f64 {
        self.h
            .iter()
            .zip(&other.h)
            .map(|(a, b)| (a - b).abs())
            .fold((self.vert - other.vert).abs(), f64::max)
    }
}

impl Add for &FrameVector {
    type Output = FrameVector;
    fn add(self, rhs: &FrameVector) -> FrameVector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &FrameVector {
    type Output = FrameVector;
    fn sub(self, rhs: &FrameVector) -> FrameVector {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &FrameVector {
    type Output = FrameVector;
    fn neg(self) -> FrameVector {
        self.scale(-1.0)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn j_horizontal(h: &[f64]) -> Coords {
    let mut out = Coords::with_capacity(h.len());
    for pair in h.chunks_exact(2) {
        out.push(-pair[1]);
        out.push(pair[0]);
    }
    out
}

/// Coordinate vector `(ẋ₁, ẏ₁, …, ṫ)` of the frame vector `v` at `p`.
pub fn frame_to_coords(p: &Point, v: &FrameVector) -> Vec<f64> {
    let mut c = Vec::with_capacity(p.dim());
    c.extend_from_slice(&v.h);
    c.push(v.vert + symplectic(&p.z, &v.h));
    c
}

/// Inverse of [`frame_to_coords`]; the vertical part is the contact form `θ_p(c)`.
pub fn coords_to_frame(p: &Point, c: &[f64]) -> FrameVector {
    let m = p.z.len();
    FrameVector {
        h: Coords::from_slice(&c[..m]),
        vert: c[m] - symplectic(&p.z, &c[..m]),
    }
}

/// `θ_p(c) = c_t + Σ(−yᵢ c_xᵢ + xᵢ c_yᵢ)`.
pub fn contact_form(p: &Point, c: &[f64]) -> f64 {
    coords_to_frame(p, c).vert
}

/// Coordinate expressions of `X₁, Y₁, …, Xₙ, Yₙ, T` at `p`, one vector per entry.
pub fn left_frame_at(p: &Point) -> Vec<Vec<f64>> {
    let n = p.n();
    (0..=2 * n)
        .map(|k| frame_to_coords(p, &FrameVector::basis(n, k)))
        .collect()
}
