//! Sub-Riemannian geometry of the Heisenberg groups ℍⁿ.
//!
//! Points are `(z, t)` with `z = (x₁, y₁, …, xₙ, yₙ)` and group law
//! `(z, t)·(z′, t′) = (z + z′, t + t′ + Σ(yᵢx′ᵢ − xᵢy′ᵢ))`. The left-invariant
//! frame is `Xᵢ = ∂ₓᵢ + yᵢ∂ₜ`, `Yᵢ = ∂_yᵢ − xᵢ∂ₜ`, `T = ∂ₜ`.
//!
//! ```
//! use heis_tube::{cc_distance, Point};
//!
//! let d = cc_distance(&Point::origin(1), &Point::new(&[0.0, 0.0], 1.0));
//! assert!((d - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod error;
pub mod geodesic;
pub mod group;
pub mod jacobi;
pub mod oracles;
pub mod patch;
pub mod poly;
pub mod projection;
pub mod roots;
pub mod special;
pub mod steiner;
pub mod surface;
pub mod tolerances;

pub use distance::{
    cc_distance, cc_geodesic, exp_s, normal_geodesic, parallel_surface_sample, reach_estimate, Reach, ReachOptions,
};
pub use error::{Error, Result};
pub use geodesic::{geodesic_ode_oracle, geodesic_point, geodesic_tangent, GeodesicArc};
pub use group::{group_inv, group_mul, left_frame_at, FrameVector, Point};
pub use jacobi::{c_derivative, c_solution, jacobi_horizontal, JacobiData};
pub use oracles::{brute_distance, fd_directional, mc_tube_volume, MCEstimate, McOptions};
pub use patch::{Domain, Patch};
pub use poly::{Monomial, Polynomial};
pub use projection::{project_to_surface, ProjectionOptions, ProjectionResult, SeedGrid};
pub use special::ArcWeights;
pub use steiner::{
    det_b, polynomial_witness, series3, steiner_coeffs_h1, tube_volume_h1, tube_volume_hn, tube_volume_umbilic,
    SteinerCoeffs, SurfaceQuadrature, TubeMethod, TubeResult,
};
pub use surface::{frame_at, shape_operator, singular_set_scan, umbilic_check, LevelSurface, SurfaceFrame, EPS_SING};
