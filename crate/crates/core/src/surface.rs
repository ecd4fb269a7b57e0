//! Polynomial level surfaces `S = {g = 0}` bounding `E = {g ≤ 0}` and their
//! pointwise horizontal geometry.
//!
//! With `Xᵢg = ∂_{xᵢ}g + yᵢ∂_t g`, `Yᵢg = ∂_{yᵢ}g − xᵢ∂_t g` and `∇_h g` the
//! vector of these, the outer unit normal is `N = (∇_h g, Tg)/|∇g|`,
//! `ν_h = ∇_h g/|∇_h g|` and the curvature of the normal geodesics is
//! `λ = 2⟨N,T⟩/|N_h| = 2 Tg/|∇_h g|`.
//!
//! The adapted basis is `e₁ = J(ν_h)`, `e₂ = ⟨N,T⟩ν_h − |N_h|T` and a
//! J-paired orthonormal completion `e₃, …, e₂ₙ` of `TS ∩ ℋ`. The horizontal
//! shape operator is `A(u) = −∇_uν_h − (⟨N,T⟩/|N_h|) J(u)_ht` on
//! `span(e₁, e₃, …, e₂ₙ)`; the mean curvature carried here is
//! `H = Σ_{i≠2} ⟨∇_{eᵢ}ν_h, eᵢ⟩ = −trace(A)`, the sign for which the tube
//! volume grows like `A(U) r + ½∫H dP r² + …`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{frame_to_coords, Coords, FrameVector, Point};
use crate::oracles::fd_directional;
use crate::patch::Patch;
use crate::poly::{Jet, Monomial, Polynomial};

/// Default singular threshold on `|N_h|` (already relative: `|N_h| ≤ 1`).
pub const EPS_SING: f64 = 1e-6;

/// Off-surface tolerance on `|g(q)| / max(1, |∇g|)`.
pub const OFF_SURFACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSurface {
    n: usize,
    g: Polynomial,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceFile {
    n: usize,
    monomials: Vec<Monomial>,
}

impl LevelSurface {
    pub fn new(n: usize, g: Polynomial) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        if g.nvars() != 2 * n + 1 {
            return Err(Error::InvalidInput(format!(
                "g must have {} variables for n = {n}, has {}",
                2 * n + 1,
                g.nvars()
            )));
        }
        if g.degree() == 0 {
            return Err(Error::InvalidInput("g must not be constant".into()));
        }
        Ok(LevelSurface { n, g })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SurfaceFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("surface file: {e}")))?;
        let g = Polynomial::new(2 * file.n + 1, file.monomials)?;
        LevelSurface::new(file.n, g)
    }

    pub fn to_json(&self) -> String {
        let file = SurfaceFile {
            n: self.n,
            monomials: self.g.terms().to_vec(),
        };
        serde_json::to_string(&file).expect("surface serializes")
    }

    /// `g = x₁`: the vertical half-space `E = {x₁ ≤ 0}`.
    pub fn halfspace_x1(n: usize) -> Self {
        LevelSurface::new(n, Polynomial::var(2 * n + 1, 0)).expect("valid")
    }

    /// `g = t`.
    pub fn plane_t(n: usize) -> Self {
        LevelSurface::new(n, Polynomial::var(2 * n + 1, 2 * n)).expect("valid")
    }

    /// `g = t − x₁y₁`.
    pub fn saddle_t_xy(n: usize) -> Self {
        let d = 2 * n + 1;
        let g = Polynomial::var(d, 2 * n).sub(&Polynomial::var(d, 0).mul(&Polynomial::var(d, 1)));
        LevelSurface::new(n, g).expect("valid")
    }

    /// `g = |z|² − R²`.
    pub fn cylinder(n: usize, radius: f64) -> Self {
        let d = 2 * n + 1;
        let g = (0..2 * n).fold(Polynomial::constant(d, -radius * radius), |acc, k| {
            acc.add(&Polynomial::var(d, k).pow(2))
        });
        LevelSurface::new(n, g).expect("valid")
    }

    /// `g = t − a|z|²`.
    pub fn paraboloid(n: usize, a: f64) -> Self {
        let d = 2 * n + 1;
        let g = (0..2 * n).fold(Polynomial::var(d, 2 * n), |acc, k| {
            acc.sub(&Polynomial::var(d, k).pow(2).scale(a))
        });
        LevelSurface::new(n, g).expect("valid")
    }

    /// Built-in surface by name. Accepted parameters: `radius` (cylinder),
    /// `a` (paraboloid); anything else is rejected.
    pub fn builtin(name: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "cylinder" => &["radius"],
            "paraboloid" => &["a"],
            "halfspace-x1" | "plane-t" | "saddle-t-xy" => &[],
            _ => return Err(Error::InvalidInput(format!("unknown surface '{name}'"))),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidInput(format!("surface '{name}' has no parameter '{k}'")));
        }
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        Ok(match name {
            "halfspace-x1" => LevelSurface::halfspace_x1(n),
            "plane-t" => LevelSurface::plane_t(n),
            "saddle-t-xy" => LevelSurface::saddle_t_xy(n),
            "cylinder" => LevelSurface::cylinder(n, params.get("radius").copied().unwrap_or(1.0)),
            _ => LevelSurface::paraboloid(n, params.get("a").copied().unwrap_or(1.0)),
        })
    }

    pub const BUILTIN_NAMES: [&'static str; 5] = ["halfspace-x1", "plane-t", "saddle-t-xy", "cylinder", "paraboloid"];

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn poly(&self) -> &Polynomial {
        &self.g
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.n(),
            });
        }
        Ok(())
    }

    pub fn value(&self, p: &Point) -> f64 {
        self.g.eval(&p.coords())
    }

    pub fn value_coords(&self, c: &[f64]) -> f64 {
        self.g.eval(c)
    }

    pub fn jet(&self, p: &Point) -> Jet {
        self.g.jet(&p.coords())
    }

    /// The surface `h·S`, i.e. the zero set of `g ∘ L_{h⁻¹}`.
    pub fn left_translated(&self, h: &Point) -> Result<LevelSurface> {
        self.check_point(h)?;
        let d = 2 * self.n + 1;
        // h⁻¹·x = (z − z_h, t − t_h + Σ(x_h,i yᵢ − y_h,i xᵢ))
        let mut subs = Vec::with_capacity(d);
        for k in 0..2 * self.n {
            let mut c = vec![0.0; d];
            c[k] = 1.0;
            subs.push(Polynomial::linear(-h.z[k], &c));
        }
        let mut c = vec![0.0; d];
        c[2 * self.n] = 1.0;
        for i in 0..self.n {
            c[2 * i] = -h.z[2 * i + 1];
            c[2 * i + 1] = h.z[2 * i];
        }
        subs.push(Polynomial::linear(-h.t, &c));
        LevelSurface::new(self.n, self.g.compose(&subs)?)
    }

    /// Horizontal normal data from first derivatives only.
    pub fn horizontal_normal(&self, q: &Point) -> Result<HorizontalNormal> {
        self.check_point(q)?;
        let (_, grad) = self.g.eval_grad(&q.coords());
        let (gh, gt) = frame_gradient(q, &grad);
        HorizontalNormal::from_gradient(gh, gt, EPS_SING)
    }
}

/// `(∇_h g, Tg)` from the coordinate gradient.
fn frame_gradient(q: &Point, grad: &[f64]) -> (Coords, f64) {
    let m = q.z.len();
    let gt = grad[m];
    let mut gh = Coords::with_capacity(m);
    for i in 0..m / 2 {
        gh.push(grad[2 * i] + q.z[2 * i + 1] * gt);
        gh.push(grad[2 * i + 1] - q.z[2 * i] * gt);
    }
    (gh, gt)
}

/// Derivative of `(∇_h g, Tg)` along the coordinate vector `c`.
fn frame_gradient_derivative(q: &Point, jet: &Jet, c: &[f64]) -> (Coords, f64) {
    let d = c.len();
    let m = d - 1;
    let hc = |b: usize| -> f64 { (0..d).map(|a| c[a] * jet.hess_at(a, b)).sum() };
    let dgt = hc(m);
    let gt = jet.grad[m];
    let mut dgh = Coords::with_capacity(m);
    for i in 0..m / 2 {
        let (x, y) = (q.z[2 * i], q.z[2 * i + 1]);
        dgh.push(hc(2 * i) + y * dgt + c[2 * i + 1] * gt);
        dgh.push(hc(2 * i + 1) - x * dgt - c[2 * i] * gt);
    }
    (dgh, dgt)
}

/// `ν_h`, `|N_h|` and `λ` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalNormal {
    pub nu_h: FrameVector,
    pub nh_norm: f64,
    pub lambda: f64,
}

impl HorizontalNormal {
    fn from_gradient(gh: Coords, gt: f64, eps_sing: f64) -> Result<Self> {
        let a = gh.iter().map(|v| v * v).sum::<f64>().sqrt();
        let full = (a * a + gt * gt).sqrt();
        let nh_norm = if full > 0.0 { a / full } else { 0.0 };
        if !(nh_norm > eps_sing) {
            return Err(Error::SingularPoint {
                nh_norm,
                threshold: eps_sing,
            });
        }
        Ok(HorizontalNormal {
            nu_h: FrameVector {
                h: gh.iter().map(|v| v / a).collect(),
                vert: 0.0,
            },
            nh_norm,
            lambda: 2.0 * gt / a,
        })
    }
}

/// All pointwise horizontal geometry of `S` at a regular point.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    pub q: Point,
    /// Outer unit normal `N`.
    pub normal: FrameVector,
    /// `|N_h|`.
    pub nh_norm: f64,
    /// `⟨N, T⟩`.
    pub normal_t: f64,
    pub nu_h: FrameVector,
    /// `⟨N,T⟩/|N_h| = λ/2`.
    pub mu: f64,
    pub lambda: f64,
    /// `e₁, …, e₂ₙ`.
    pub basis: Vec<FrameVector>,
    /// `∇_{eᵢ} ν_h`.
    pub nu_derivs: Vec<FrameVector>,
    /// `eᵢ(⟨N,T⟩/|N_h|)`.
    pub mu_derivs: Vec<f64>,
    /// `eᵢ(λ)`.
    pub dlam: Vec<f64>,
    /// `A` on `e₁, e₃, …, e₂ₙ`.
    pub shape: DMatrix<f64>,
    pub mean_curvature: f64,
    pub sigma2: f64,
    /// Riemannian norm `|∇g|` (frame components).
    pub grad_norm: f64,
    jet: Jet,
    grad_h_norm: f64,
}

impl SurfaceFrame {
    pub fn n(&self) -> usize {
        self.q.n()
    }

    /// `e₁, e₃, …, e₂ₙ`, an orthonormal basis of `TS ∩ ℋ`.
    pub fn horizontal_tangent_basis(&self) -> Vec<FrameVector> {
        self.basis
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 1)
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// `∇_u ν_h` and `u(⟨N,T⟩/|N_h|)` for any frame vector `u` at `q`.
    pub fn derivatives_along(&self, u: &FrameVector) -> (FrameVector, f64) {
        let c = frame_to_coords(&self.q, u);
        let (dgh, dgt) = frame_gradient_derivative(&self.q, &self.jet, &c);
        let a = self.grad_h_norm;
        let nu = &self.nu_h.h;
        let da: f64 = nu.iter().zip(&dgh).map(|(x, y)| x * y).sum();
        let dnu = FrameVector {
            h: dgh.iter().zip(nu).map(|(d, v)| (d - v * da) / a).collect(),
            vert: 0.0,
        };
        let dmu = (dgt - self.mu * da) / a;
        (dnu, dmu)
    }

    /// `A` in an arbitrary orthonormal basis of `TS ∩ ℋ`.
    pub fn shape_in_basis(&self, basis: &[FrameVector]) -> DMatrix<f64> {
        let k = basis.len();
        let derivs: Vec<FrameVector> = basis.iter().map(|b| self.derivatives_along(b).0).collect();
        DMatrix::from_fn(k, k, |r, c| {
            -derivs[c].dot(&basis[r]) - self.mu * basis[c].j().dot(&basis[r])
        })
    }

    /// `∇_S^h(⟨N,T⟩/|N_h|)`, the horizontal tangential gradient.
    pub fn horizontal_gradient_mu(&self) -> FrameVector {
        let mut out = FrameVector::zero(self.n());
        for (i, e) in self.basis.iter().enumerate() {
            if i != 1 {
                out = out.axpy(self.mu_derivs[i], e);
            }
        }
        out
    }
}

/// Mean curvature `−trace(A)` and `|σ|²` of a shape matrix.
pub fn curvature_scalars(shape: &DMatrix<f64>) -> (f64, f64) {
    let sym = (shape + shape.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let sigma2 = eig.eigenvalues.iter().map(|k| k * k).sum();
    (-shape.trace(), sigma2)
}

pub fn frame_at(surface: &LevelSurface, q: &Point, eps_sing: f64) -> Result<SurfaceFrame> {
    surface.check_point(q)?;
    let n = surface.n;
    let jet = surface.jet(q);
    let euclid = jet.grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    if jet.value.abs() > OFF_SURFACE_TOL * euclid.max(1.0) {
        return Err(Error::OffSurface {
            residual: jet.value.abs(),
        });
    }
    let (gh, gt) = frame_gradient(q, &jet.grad);
    let hn = HorizontalNormal::from_gradient(gh.clone(), gt, eps_sing)?;
    let a = gh.iter().map(|v| v * v).sum::<f64>().sqrt();
    let grad_norm = (a * a + gt * gt).sqrt();
    let normal_t = gt / grad_norm;
    let nh_norm = hn.nh_norm;
    let nu_h = hn.nu_h;
    let mu = gt / a;

    let e1 = nu_h.j();
    let mut e2 = nu_h.scale(normal_t);
    e2.vert = -nh_norm;
    let mut basis = vec![e1.clone(), e2];
    basis.extend(complete_basis(&nu_h, &e1));

    let mut frame = SurfaceFrame {
        q: q.clone(),
        normal: FrameVector {
            h: gh.iter().map(|v| v / grad_norm).collect(),
            vert: normal_t,
        },
        nh_norm,
        normal_t,
        nu_h,
        mu,
        lambda: 2.0 * mu,
        basis,
        nu_derivs: Vec::new(),
        mu_derivs: Vec::new(),
        dlam: Vec::new(),
        shape: DMatrix::zeros(0, 0),
        mean_curvature: 0.0,
        sigma2: 0.0,
        grad_norm,
        jet,
        grad_h_norm: a,
    };
    let (nu_derivs, mu_derivs): (Vec<_>, Vec<_>) = frame.basis.iter().map(|e| frame.derivatives_along(e)).unzip();
    frame.dlam = mu_derivs.iter().map(|d| 2.0 * d).collect();
    frame.nu_derivs = nu_derivs;
    frame.mu_derivs = mu_derivs;
    frame.shape = frame.shape_in_basis(&frame.horizontal_tangent_basis());
    let (h, s2) = curvature_scalars(&frame.shape);
    frame.mean_curvature = h;
    frame.sigma2 = s2;
    debug_assert_eq!(frame.basis.len(), 2 * n);
    Ok(frame)
}

/// J-paired Gram–Schmidt completion of `{ν_h, J ν_h}` in `ℋ`, seeded by the
/// frame vectors in index order.
fn complete_basis(nu: &FrameVector, e1: &FrameVector) -> Vec<FrameVector> {
    let n = nu.n();
    let mut chosen: Vec<FrameVector> = vec![nu.clone(), e1.clone()];
    let mut out = Vec::with_capacity(2 * n - 2);
    let mut remaining = 2 * n - 2;
    let mut k = 0;
    while remaining > 0 && k < 2 * n {
        let mut r = FrameVector::basis(n, k);
        for _ in 0..2 {
            for c in &chosen {
                r = r.axpy(-r.dot(c), c);
            }
        }
        // some candidate always has |P_W c|² ≥ dim W / 2n
        if r.dot(&r) >= remaining as f64 / (2 * n) as f64 * (1.0 - 1e-9) {
            let a = r.normalized();
            let b = a.j();
            chosen.push(a.clone());
            chosen.push(b.clone());
            out.push(a);
            out.push(b);
            remaining -= 2;
        }
        k += 1;
    }
    out
}

/// Shape matrix, mean curvature and `|σ|²` at `q`.
pub fn shape_operator(surface: &LevelSurface, q: &Point) -> Result<(DMatrix<f64>, f64, f64)> {
    let f = frame_at(surface, q, EPS_SING)?;
    Ok((f.shape, f.mean_curvature, f.sigma2))
}

/// Residual of `−|N_h|⁻¹∇_Eν_h = ∇_S^h μ + 2μ² J(ν_h)` with `E = e₂` and
/// `μ = ⟨N,T⟩/|N_h|`: left side by finite differences along the surface,
/// right side from exact derivatives.
pub fn nabla_e_nuh_check(surface: &LevelSurface, q: &Point) -> Result<f64> {
    let f = frame_at(surface, q, EPS_SING)?;
    let scale = f.q.z.iter().fold(1.0f64, |m, v| m.max(v.abs())).max(f.q.t.abs());
    let fd = fd_directional(surface, q, &f.basis[1], 1e-4 / scale.sqrt(), |p| {
        Ok(surface.horizontal_normal(p)?.nu_h.h.to_vec())
    })?;
    let lhs = FrameVector::horizontal(&fd).scale(-1.0 / f.nh_norm);
    let rhs = f.horizontal_gradient_mu().axpy(2.0 * f.mu * f.mu, &f.nu_h.j());
    Ok((&lhs - &rhs).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicReport {
    pub is_umbilic: bool,
    /// `⟨A Z, Z⟩`.
    pub rho: f64,
    /// Common eigenvalue on `Z^⊥ ∩ TS ∩ ℋ` (absent in ℍ¹).
    pub mu: Option<f64>,
    /// `max |⟨A Z, V⟩|` over `V ⊥ Z`.
    pub off_diagonal: f64,
    /// `max |A_V − μ I|` on `Z^⊥`.
    pub eigen_spread: f64,
    pub residuals: Option<UmbilicResiduals>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UmbilicResiduals {
    /// `Z(⟨N,T⟩/|N_h|) + (⟨N,T⟩/|N_h|)² − μ(μ − ρ)`.
    pub z_relation: f64,
    /// `max |V(⟨N,T⟩/|N_h|)|`.
    pub v_normal_ratio: f64,
    /// `max |V(μ)|` (finite differences).
    pub v_mu: f64,
    /// `max |V(ρ)|` (finite differences).
    pub v_rho: f64,
}

fn rho_and_mu(f: &SurfaceFrame) -> (f64, f64) {
    let rho = f.shape[(0, 0)];
    let k = f.shape.nrows();
    let mu = if k > 1 {
        (f.shape.trace() - rho) / (k - 1) as f64
    } else {
        0.0
    };
    (rho, mu)
}

pub fn umbilic_check(surface: &LevelSurface, q: &Point, tol: f64) -> Result<UmbilicReport> {
    let f = frame_at(surface, q, EPS_SING)?;
    let (rho, mu) = rho_and_mu(&f);
    if surface.n == 1 {
        return Ok(UmbilicReport {
            is_umbilic: true,
            rho,
            mu: None,
            off_diagonal: 0.0,
            eigen_spread: 0.0,
            residuals: None,
        });
    }
    let a = &f.shape;
    let k = a.nrows();
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let off_diagonal = (1..k).map(|r| a[(r, 0)].abs().max(a[(0, r)].abs())).fold(0.0, f64::max);
    let mut eigen_spread = 0.0f64;
    for r in 1..k {
        for c in 1..k {
            let target = if r == c { mu } else { 0.0 };
            eigen_spread = eigen_spread.max((0.5 * (a[(r, c)] + a[(c, r)]) - target).abs());
        }
    }
    let is_umbilic = off_diagonal <= tol * scale && eigen_spread <= tol * scale;

    let z_relation = f.mu_derivs[0] + f.mu * f.mu - mu * (mu - rho);
    let v_normal_ratio = f.mu_derivs[2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut v_mu = 0.0f64;
    let mut v_rho = 0.0f64;
    for e in &f.basis[2..] {
        let d = fd_directional(surface, q, e, 1e-4, |p| {
            let g = frame_at(surface, p, EPS_SING)?;
            let (r, m) = rho_and_mu(&g);
            Ok(vec![r, m])
        })?;
        v_rho = v_rho.max(d[0].abs());
        v_mu = v_mu.max(d[1].abs());
    }
    Ok(UmbilicReport {
        is_umbilic,
        rho,
        mu: Some(mu),
        off_diagonal,
        eigen_spread,
        residuals: Some(UmbilicResiduals {
            z_relation,
            v_normal_ratio,
            v_mu,
            v_rho,
        }),
    })
}

/// Points of the singular set `S₀ = {N_h = 0}` inside a patch.
///
/// The patch is sampled on a `grid`-per-axis lattice; lattice points where
/// `|N_h|` is a local minimum below `coarse` are polished by damped
/// Gauss–Newton on `∇_h g(q(u)) = 0` and kept when `|N_h| < eps`.
pub fn singular_set_scan(surface: &LevelSurface, patch: &Patch, grid: usize, eps: f64) -> Result<Vec<Point>> {
    let grid = grid.max(2);
    let lattice = patch.lattice(grid);
    let dim = patch.param_dim();
    let nh_at = |u: &[f64]| -> Option<(Point, f64, Coords)> {
        let q = patch.point(surface, u).ok()?;
        let (_, grad) = surface.poly().eval_grad(&q.coords());
        let (gh, gt) = frame_gradient(&q, &grad);
        let a = gh.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some((q, a / (a * a + gt * gt).sqrt(), gh))
    };
    let values: Vec<Option<f64>> = lattice.iter().map(|u| nh_at(u).map(|r| r.1)).collect();
    let spacing = patch.spacing(grid);
    let coarse = spacing.iter().fold(0.0f64, |m, v| m.max(*v)) * 4.0;

    let mut found: Vec<Point> = Vec::new();
    for (idx, u) in lattice.iter().enumerate() {
        let Some(v) = values[idx] else { continue };
        if v > coarse.max(eps) {
            continue;
        }
        let is_min = patch
            .lattice_neighbours(idx, grid)
            .into_iter()
            .all(|j| values[j].is_none_or(|w| v <= w));
        if !is_min {
            continue;
        }
        let mut u = u.clone();
        let mut mu_damp = 1e-6;
        for _ in 0..60 {
            let Some((_, nh, gh)) = nh_at(&u) else { break };
            if nh < eps * 1e-3 {
                break;
            }
            let h = 1e-7;
            let mut jac = DMatrix::zeros(gh.len(), dim);
            for c in 0..dim {
                let mut up = u.clone();
                up[c] += h;
                let mut um = u.clone();
                um[c] -= h;
                if let (Some(a), Some(b)) = (nh_at(&up), nh_at(&um)) {
                    for r in 0..gh.len() {
                        jac[(r, c)] = (a.2[r] - b.2[r]) / (2.0 * h);
                    }
                }
            }
            let rhs = nalgebra::DVector::from_iterator(gh.len(), gh.iter().map(|v| -v));
            let jt = jac.transpose();
            let normal = &jt * &jac + DMatrix::identity(dim, dim) * mu_damp;
            let Some(step) = normal.lu().solve(&(&jt * rhs)) else {
                break;
            };
            let cand: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match nh_at(&cand) {
                Some((_, nh_new, _)) if nh_new < nh => {
                    u = cand;
                    mu_damp = (mu_damp * 0.3).max(1e-12);
                }
                _ => mu_damp *= 10.0,
            }
        }
        if let Some((q, nh, _)) = nh_at(&u) {
            if nh < eps && !found.iter().any(|p| p.coord_distance(&q) < 1e-6) {
                found.push(q);
            }
        }
    }
    Ok(found)
}

/// ℍ¹ only: `λ = −[X,Y](g)/|∇_h g|`, with the bracket evaluated as
/// `X(Yg) − Y(Xg)` from second derivatives.
pub fn lambda_from_commutator(surface: &LevelSurface, q: &Point) -> Result<f64> {
    if surface.n != 1 {
        return Err(Error::WrongDimension {
            required: 1,
            found: surface.n,
        });
    }
    let jet = surface.jet(q);
    let (gh, _) = frame_gradient(q, &jet.grad);
    // [X,Y]g = X(Yg) − Y(Xg), computed from second derivatives.
    let xv = frame_to_coords(q, &FrameVector::x(1, 0));
    let yv = frame_to_coords(q, &FrameVector::y(1, 0));
    let (dx, _) = frame_gradient_derivative(q, &jet, &xv);
    let (dy, _) = frame_gradient_derivative(q, &jet, &yv);
    let bracket = dx[1] - dy[0];
    let a = gh.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(-bracket / a)
}
