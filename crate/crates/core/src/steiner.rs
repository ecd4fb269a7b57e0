//! Steiner-type tube volumes `|U_r|` of a surface patch `U`.
//!
//! For a regular point `q` with normal geodesic of curvature `λ`, the area
//! of the parallel surface at distance `s` is `|det B(s)| dS`, where the rows
//! of `B` are
//!
//! ```text
//! [ ½ċᵢ(s), cᵢ(s), δᵢₖ + f₁⟨ėᵢ,eₖ⟩ − λf₂⟨Jėᵢ,eₖ⟩ (k = 3..2n) ]
//! ```
//!
//! with `cᵢ` the vertical parts of the Jacobi fields starting at `eᵢ` with
//! derivative `ėᵢ = ∇_{eᵢ}ν_h`. In ℍ¹ this reduces to `−Σ aᵢ fᵢ(λ, s)`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FrameVector, Point};
use crate::jacobi::{c_derivative, c_solution, JacobiData, VerticalData};
use crate::patch::Patch;
use crate::special::ArcWeights;
use crate::surface::{frame_at, umbilic_check, LevelSurface, SurfaceFrame, EPS_SING};

/// Gauss–Legendre nodes per `s`-panel.
pub const S_NODES: usize = 32;

/// `a₀, …, a₄` at a point of a surface in ℍ¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinerCoeffs {
    pub a: [f64; 5],
}

impl SteinerCoeffs {
    pub fn from_frame(f: &SurfaceFrame) -> Result<Self> {
        if f.n() != 1 {
            return Err(Error::WrongDimension {
                required: 1,
                found: f.n(),
            });
        }
        let nh = f.nh_norm;
        let h = f.mean_curvature;
        let (e1mu, e2mu) = (f.mu_derivs[0], f.mu_derivs[1]);
        Ok(SteinerCoeffs {
            a: [
                nh,
                nh * h,
                -4.0 * nh * e1mu,
                -4.0 * e2mu,
                -4.0 * h * e2mu - 4.0 * nh * e1mu * e1mu,
            ],
        })
    }

    /// `Σ aᵢ fᵢ(λ, s)`.
    pub fn integrand(&self, lambda: f64, s: f64) -> f64 {
        let w = ArcWeights::new(lambda, s);
        self.a.iter().zip(w.f.iter()).map(|(a, f)| a * f).sum()
    }
}

pub fn steiner_coeffs_h1(surface: &LevelSurface, q: &Point) -> Result<SteinerCoeffs> {
    if surface.n() != 1 {
        return Err(Error::WrongDimension {
            required: 1,
            found: surface.n(),
        });
    }
    SteinerCoeffs::from_frame(&frame_at(surface, q, EPS_SING)?)
}

/// Initial data of `B(s)` at one surface point.
#[derive(Debug, Clone)]
pub struct NormalJacobian {
    n: usize,
    lambda: f64,
    vertical: Vec<VerticalData>,
    lambda_prime: Vec<f64>,
    /// `⟨ėᵢ, eₖ⟩` and `⟨Jėᵢ, eₖ⟩` for `k ≥ 3`, row-major `2n × (2n − 2)`.
    tangential: Vec<(f64, f64)>,
}

impl NormalJacobian {
    pub fn new(f: &SurfaceFrame) -> Self {
        let n = f.n();
        let dim = 2 * n;
        let arc = crate::geodesic::GeodesicArc {
            base: f.q.clone(),
            dir: f.nu_h.clone(),
            curvature: f.lambda,
            length: 0.0,
        };
        let mut vertical = Vec::with_capacity(dim);
        let mut tangential = Vec::with_capacity(dim * (dim - 2));
        for i in 0..dim {
            let data = JacobiData {
                u0: f.basis[i].clone(),
                u0dot: f.nu_derivs[i].clone(),
                lambda_prime: f.dlam[i],
            };
            vertical.push(data.vertical_data(&arc));
            let d = &f.nu_derivs[i];
            let jd = d.j();
            for e in &f.basis[2..] {
                tangential.push((d.dot(e), jd.dot(e)));
            }
        }
        NormalJacobian {
            n,
            lambda: f.lambda,
            vertical,
            lambda_prime: f.dlam.clone(),
            tangential,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(cᵢ(s), ċᵢ(s))` for each row.
    pub fn vertical_columns(&self, s: f64) -> Vec<(f64, f64)> {
        let l = self.lambda;
        self.vertical
            .iter()
            .zip(&self.lambda_prime)
            .map(|(v, &lp)| {
                (
                    c_solution(v.c0, v.c0dot, v.c0ddot, l, lp, s),
                    c_derivative(v.c0dot, v.c0ddot, l, lp, s),
                )
            })
            .collect()
    }

    pub fn matrix(&self, s: f64) -> DMatrix<f64> {
        let dim = 2 * self.n;
        let w = ArcWeights::new(self.lambda, s);
        let (f1, f2) = (w.f[1], w.f[2]);
        let cols = self.vertical_columns(s);
        DMatrix::from_fn(dim, dim, |i, k| match k {
            0 => 0.5 * cols[i].1,
            1 => cols[i].0,
            _ => {
                let (p, jp) = self.tangential[i * (dim - 2) + (k - 2)];
                let delta = if i == k { 1.0 } else { 0.0 };
                delta + f1 * p - self.lambda * f2 * jp
            }
        })
    }

    /// Signed `det B(s)`; negative from `s = 0` up to the first conjugate point.
    pub fn det(&self, s: f64) -> f64 {
        if self.n == 1 {
            let c = self.vertical_columns(s);
            return 0.5 * (c[0].1 * c[1].0 - c[0].0 * c[1].1);
        }
        self.matrix(s).determinant()
    }
}

pub fn det_b(surface: &LevelSurface, q: &Point, s: f64) -> Result<f64> {
    Ok(NormalJacobian::new(&frame_at(surface, q, EPS_SING)?).det(s))
}

/// `−|N_h|H`, the closed-form first derivative of `det B` at `s = 0`.
pub fn det_b_first_derivative(f: &SurfaceFrame) -> f64 {
    -f.nh_norm * f.mean_curvature
}

/// `|N_h|(4e₁(μ) + (2n+2)μ² + |σ|² − H²)` with `μ = ⟨N,T⟩/|N_h|`, the
/// closed-form second derivative of `det B` at `s = 0`.
pub fn det_b_second_derivative(f: &SurfaceFrame) -> f64 {
    let n = f.n() as f64;
    let h = f.mean_curvature;
    f.nh_norm * (4.0 * f.mu_derivs[0] + (2.0 * n + 2.0) * f.mu * f.mu + f.sigma2 - h * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeMethod {
    H1Closed,
    HnDet,
    Umbilic,
    #[serde(rename = "montecarlo")]
    MonteCarlo,
}

impl TubeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TubeMethod::H1Closed => "h1-closed",
            TubeMethod::HnDet => "hn-det",
            TubeMethod::Umbilic => "umbilic",
            TubeMethod::MonteCarlo => "montecarlo",
        }
    }
}

/// `A(U)`, `½∫H dP` and the cubic coefficient of `|U_r|`, plus the fitted
/// log–log order of `|U_r| − (c₁r + c₂r² + c₃r³)` when at least two radii
/// have a nonzero remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Series3 {
    pub c: [f64; 3],
    pub remainder_order: Option<f64>,
}

impl Series3 {
    pub fn eval(&self, r: f64) -> f64 {
        r * (self.c[0] + r * (self.c[1] + r * self.c[2]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeResult {
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub series3: Series3,
    pub method: TubeMethod,
}

/// Tensor Gauss–Legendre resolution over the patch parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceQuadrature {
    pub nodes: usize,
    pub panels: usize,
}

impl Default for SurfaceQuadrature {
    fn default() -> Self {
        SurfaceQuadrature { nodes: 8, panels: 2 }
    }
}

/// One quadrature node on the surface with its area weight `dS`.
#[derive(Debug, Clone)]
pub struct SurfaceNode {
    pub u: Vec<f64>,
    pub weight: f64,
    pub frame: SurfaceFrame,
    pub jacobian: NormalJacobian,
}

impl SurfaceNode {
    /// Perimeter weight `dP = |N_h| dS`.
    pub fn perimeter_weight(&self) -> f64 {
        self.frame.nh_norm * self.weight
    }
}

pub fn surface_nodes(surface: &LevelSurface, patch: &Patch, quad: SurfaceQuadrature) -> Result<Vec<SurfaceNode>> {
    if patch.n() != surface.n() {
        return Err(Error::DimensionMismatch {
            expected: surface.n(),
            found: patch.n(),
        });
    }
    patch
        .quadrature(quad.nodes, quad.panels)
        .into_par_iter()
        .map(|(u, w)| {
            let q = patch.point(surface, &u)?;
            let frame = frame_at(surface, &q, EPS_SING)?;
            let weight = w * patch.area_density(surface, &q, &u, frame.grad_norm);
            let jacobian = NormalJacobian::new(&frame);
            Ok(SurfaceNode {
                u,
                weight,
                frame,
                jacobian,
            })
        })
        .collect()
}

fn s_rule() -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(S_NODES).expect("nonzero"))
        .as_node_weight_pairs()
        .to_vec()
}

/// `∫₀^r −det B(s) ds` (the area of the parallel surfaces above one unit of
/// `dS`), panelled so each panel spans at most a quarter turn.
fn radial_integral<F: Fn(f64) -> f64>(rule: &[(f64, f64)], lambda: f64, r: f64, area: F) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    if lambda != 0.0 && r > 2.0 * PI / lambda.abs() {
        return Err(Error::ReachExceeded(format!(
            "r = {r} exceeds the minimality bound 2π/|λ| = {}",
            2.0 * PI / lambda.abs()
        )));
    }
    let panels = if lambda == 0.0 {
        1
    } else {
        (r / (0.5 * PI / lambda.abs())).ceil().max(1.0) as usize
    };
    let h = r / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let left = p as f64 * h;
        for &(x, w) in rule {
            let s = left + 0.5 * h * (x + 1.0);
            let a = area(s);
            if !(a > 0.0) {
                return Err(Error::ReachExceeded(format!(
                    "det B changes sign before s = {s} (r = {r}, λ = {lambda})"
                )));
            }
            total += 0.5 * h * w * a;
        }
    }
    Ok(total)
}

fn series_from_nodes(nodes: &[SurfaceNode]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for node in nodes {
        let f = &node.frame;
        c[0] += node.perimeter_weight();
        c[1] += 0.5 * f.mean_curvature * node.perimeter_weight();
        c[2] -= det_b_second_derivative(f) * node.weight / 6.0;
    }
    c
}

/// Least-squares slope of `log|y|` against `log x` over positive pairs.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && b.abs() > 0.0)
        .map(|(a, b)| (a.ln(), b.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn tube_from_nodes<F>(nodes: &[SurfaceNode], radii: &[f64], method: TubeMethod, area: F) -> Result<TubeResult>
where
    F: Fn(usize, &SurfaceNode, f64) -> f64 + Sync,
{
    if let Some(r) = radii.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius {r} must be finite and ≥ 0")));
    }
    let rule = s_rule();
    let per_node: Vec<Vec<f64>> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, node)| {
            radii
                .iter()
                .map(|&r| Ok(node.weight * radial_integral(&rule, node.frame.lambda, r, |s| area(i, node, s))?))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    // fixed summation order
    let volumes: Vec<f64> = (0..radii.len()).map(|k| per_node.iter().map(|v| v[k]).sum()).collect();
    let c = series_from_nodes(nodes);
    let mut series = Series3 {
        c,
        remainder_order: None,
    };
    let rem: Vec<f64> = radii.iter().zip(&volumes).map(|(r, v)| v - series.eval(*r)).collect();
    series.remainder_order = loglog_slope(radii, &rem);
    Ok(TubeResult {
        radii: radii.to_vec(),
        volumes,
        series3: series,
        method,
    })
}

/// ℍ¹: `|U_r| = ∫_U ∫₀^r Σ aᵢ fᵢ(λ, s) ds dS`.
pub fn tube_volume_h1(
    surface: &LevelSurface,
    patch: &Patch,
    quad: SurfaceQuadrature,
    radii: &[f64],
) -> Result<TubeResult> {
    if surface.n() != 1 {
        return Err(Error::WrongDimension {
            required: 1,
            found: surface.n(),
        });
    }
    let nodes = surface_nodes(surface, patch, quad)?;
    let coeffs: Vec<SteinerCoeffs> = nodes
        .iter()
        .map(|n| SteinerCoeffs::from_frame(&n.frame))
        .collect::<Result<_>>()?;
    tube_from_nodes(&nodes, radii, TubeMethod::H1Closed, |i, node, s| {
        coeffs[i].integrand(node.frame.lambda, s)
    })
}

/// Any n: `|U_r| = ∫_U ∫₀^r |det B(s)| ds dS`.
pub fn tube_volume_hn(
    surface: &LevelSurface,
    patch: &Patch,
    quad: SurfaceQuadrature,
    radii: &[f64],
) -> Result<TubeResult> {
    let nodes = surface_nodes(surface, patch, quad)?;
    tube_from_nodes(&nodes, radii, TubeMethod::HnDet, |_, node, s| -node.jacobian.det(s))
}

/// `det D(s)` for the umbilic reduction, `D = [[a, b], [−b, a]]`.
pub fn umbilic_block_det(lambda: f64, kappa: f64, s: f64) -> f64 {
    let w = ArcWeights::new(lambda, s);
    let (f1, f2) = (w.f[1], w.f[2]);
    let a = 1.0 - kappa * f1 - 0.5 * lambda * lambda * f2;
    let b = -0.5 * lambda * f1 + lambda * kappa * f2;
    a * a + b * b
}

/// Tolerance of the umbilic test used by [`tube_volume_umbilic`].
pub const UMBILIC_TOL: f64 = 1e-8;

/// n ≥ 2, umbilic patch: `|det B| = −½(ċ₁c₂ − c₁ċ₂) · det D^{n−1}`.
pub fn tube_volume_umbilic(
    surface: &LevelSurface,
    patch: &Patch,
    quad: SurfaceQuadrature,
    radii: &[f64],
) -> Result<TubeResult> {
    let n = surface.n();
    if n < 2 {
        return Err(Error::WrongDimension { required: 2, found: n });
    }
    let nodes = surface_nodes(surface, patch, quad)?;
    let mut kappas = Vec::with_capacity(nodes.len());
    for node in &nodes {
        let rep = umbilic_check(surface, &node.frame.q, UMBILIC_TOL)?;
        if !rep.is_umbilic {
            return Err(Error::NotUmbilic {
                residual: rep.off_diagonal.max(rep.eigen_spread),
            });
        }
        kappas.push(rep.mu.unwrap_or(0.0));
    }
    tube_from_nodes(&nodes, radii, TubeMethod::Umbilic, |i, node, s| {
        let c = node.jacobian.vertical_columns(s);
        let planar = 0.5 * (c[0].1 * c[1].0 - c[0].0 * c[1].1);
        let lam = node.frame.lambda;
        -planar * umbilic_block_det(lam, kappas[i], s).powi(n as i32 - 1)
    })
}

pub fn series3(surface: &LevelSurface, patch: &Patch, quad: SurfaceQuadrature) -> Result<[f64; 3]> {
    Ok(series_from_nodes(&surface_nodes(surface, patch, quad)?))
}

/// ℍ¹-only form of the cubic coefficient, `−(2/3)∫(e₁(μ) + μ²) dP`.
pub fn series3_h1_cubic(surface: &LevelSurface, patch: &Patch, quad: SurfaceQuadrature) -> Result<f64> {
    if surface.n() != 1 {
        return Err(Error::WrongDimension {
            required: 1,
            found: surface.n(),
        });
    }
    let nodes = surface_nodes(surface, patch, quad)?;
    Ok(nodes
        .iter()
        .map(|n| -2.0 / 3.0 * (n.frame.mu_derivs[0] + n.frame.mu * n.frame.mu) * n.perimeter_weight())
        .sum())
}

/// `∫_U |det B(r)| dS`, the area of the parallel surface piece at distance `r`.
pub fn parallel_area(nodes: &[SurfaceNode], r: f64) -> f64 {
    nodes.iter().map(|n| n.weight * (-n.jacobian.det(r))).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialWitness {
    pub is_polynomial: bool,
    pub fitted_degree: Option<usize>,
    /// Relative residual of the best fit at each degree `1..=degree_cap`.
    pub residuals: Vec<f64>,
    pub r_max: f64,
}

/// Relative residual accepted as an exact polynomial fit.
pub const POLY_FIT_TOL: f64 = 1e-10;

/// Fits `|U_r|` on `r ∈ (0, r_max]` by polynomials without constant term.
///
/// When `r_max` is not given it is half the smallest conjugate or
/// minimality bound over the quadrature nodes, capped at 1.
pub fn polynomial_witness(
    surface: &LevelSurface,
    patch: &Patch,
    quad: SurfaceQuadrature,
    degree_cap: usize,
    r_max: Option<f64>,
) -> Result<PolynomialWitness> {
    if surface.n() != 1 {
        return Err(Error::WrongDimension {
            required: 1,
            found: surface.n(),
        });
    }
    let degree_cap = degree_cap.max(1);
    let r_max = match r_max {
        Some(r) => r,
        None => {
            let nodes = surface_nodes(surface, patch, quad)?;
            let mut bound = 2.0f64;
            for node in &nodes {
                let lam = node.frame.lambda;
                if lam != 0.0 {
                    bound = bound.min(2.0 * PI / lam.abs());
                }
                let steps = 400;
                let h = bound / steps as f64;
                if let Some(k) = (1..=steps).find(|&k| node.jacobian.det(k as f64 * h) >= 0.0) {
                    bound = bound.min((k - 1) as f64 * h);
                }
            }
            0.5 * bound
        }
    };
    let samples = (2 * degree_cap + 8).max(16);
    let radii: Vec<f64> = (1..=samples).map(|k| r_max * k as f64 / samples as f64).collect();
    let tube = tube_volume_h1(surface, patch, quad, &radii)?;
    let scale = tube
        .volumes
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut residuals = Vec::with_capacity(degree_cap);
    let mut fitted = None;
    for d in 1..=degree_cap {
        let a = DMatrix::from_fn(samples, d, |i, j| (radii[i] / r_max).powi(j as i32 + 1));
        let y = DVector::from_column_slice(&tube.volumes);
        let svd = a.clone().svd(true, true);
        let coef = svd.solve(&y, 1e-14).map_err(|e| Error::NoConvergence(e.to_string()))?;
        let res = (&a * coef - &y).amax() / scale;
        residuals.push(res);
        if fitted.is_none() && res <= POLY_FIT_TOL {
            fitted = Some(d);
        }
    }
    Ok(PolynomialWitness {
        is_polynomial: fitted.is_some(),
        fitted_degree: fitted,
        residuals,
        r_max,
    })
}

/// `⟨E_i(s), e_k⟩`-type check helper: horizontal part of the Jacobi field
/// started at `eᵢ`, for comparing `B(s)` against [`crate::jacobi`].
pub fn basis_jacobi_field(f: &SurfaceFrame, i: usize, s: f64) -> FrameVector {
    let arc = crate::geodesic::GeodesicArc {
        base: f.q.clone(),
        dir: f.nu_h.clone(),
        curvature: f.lambda,
        length: s,
    };
    JacobiData {
        u0: f.basis[i].clone(),
        u0dot: f.nu_derivs[i].clone(),
        lambda_prime: f.dlam[i],
    }
    .field(&arc)
}
