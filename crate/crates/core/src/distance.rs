//! Carnot–Carathéodory distance and the normal exponential map of a surface.
//!
//! After translating `p` to the origin, `q = (z, t)` is reached by the unit
//! geodesic with `φ = λs` solving
//!
//! ```text
//! t / |z|² = sin_defect2(φ) / sinc(φ/2)²        φ ∈ (−2π, 2π)
//! ```
//!
//! (the right side is odd and increasing), and then `s = |z| / sinc(φ/2)`.
//! Points on the vertical axis are reached with `φ = ±2π`, `s = √(2π|t|)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::GeodesicArc;
use crate::group::{FrameVector, Point};
use crate::patch::Patch;
use crate::projection::{project_to_surface, ProjectionOptions, SeedGrid};
use crate::roots::newton_bisect;
use crate::special::{sin_defect2, sin_defect2_prime, sinc, sinc_prime, versin_ratio};
use crate::steiner::NormalJacobian;
use crate::surface::{frame_at, LevelSurface, EPS_SING};

/// Minimizing unit-speed geodesic from `p` to `q`.
///
/// On the vertical axis through `p` the direction is not unique; `X₁` is
/// returned.
///
/// # Panics
/// If `p` and `q` live in different dimensions.
pub fn cc_geodesic(p: &Point, q: &Point) -> GeodesicArc {
    assert_eq!(p.n(), q.n(), "points of different dimension");
    let n = p.n();
    let rel = p.inv().compose(q);
    let r = rel.z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let t = rel.t;
    let x1 = FrameVector::x(n, 0);
    if r == 0.0 {
        if t == 0.0 {
            return GeodesicArc::new(p.clone(), x1, 0.0, 0.0).expect("valid arc");
        }
        let s = (2.0 * PI * t.abs()).sqrt();
        let lambda = (2.0 * PI).copysign(t) / s;
        return GeodesicArc::new(p.clone(), x1, lambda, s).expect("valid arc");
    }
    let ratio = t / (r * r);
    let phi = solve_phase(ratio.abs()).copysign(ratio);
    let s = if phi.abs() > PI {
        (t / sin_defect2(phi)).sqrt()
    } else {
        r / sinc(0.5 * phi)
    };
    // z = s (sinc φ − versin_ratio φ · J) w  ⇒  w ∝ (sinc φ + versin_ratio φ · J) z
    let (f, g) = (sinc(phi), versin_ratio(phi));
    let jz = FrameVector::horizontal(&rel.z).j();
    let w = FrameVector::horizontal(&rel.z).scale(f).axpy(g, &jz).normalized();
    GeodesicArc::new(p.clone(), w, phi / s, s).expect("valid arc")
}

/// Root in `[0, 2π]` of `sin_defect2(φ) − ratio·sinc(φ/2)²` for `ratio ≥ 0`.
fn solve_phase(ratio: f64) -> f64 {
    if ratio == 0.0 {
        return 0.0;
    }
    let fdf = |phi: f64| {
        let h = 0.5 * phi;
        let sh = sinc(h);
        (
            sin_defect2(phi) - ratio * sh * sh,
            sin_defect2_prime(phi) - ratio * sh * sinc_prime(h),
        )
    };
    newton_bisect(fdf, 0.0, 2.0 * PI, 1e-15).unwrap_or(2.0 * PI)
}

/// Carnot–Carathéodory distance.
///
/// # Panics
/// If `p` and `q` live in different dimensions.
pub fn cc_distance(p: &Point, q: &Point) -> f64 {
    cc_geodesic(p, q).length
}

/// `exp_S(q, s)`: the point reached after length `s` along the normal
/// geodesic leaving `q` with velocity `ν_h(q)` and curvature `λ(q)`.
pub fn exp_s(surface: &LevelSurface, q: &Point, s: f64) -> Result<Point> {
    Ok(normal_geodesic(surface, q, s)?.endpoint())
}

pub fn normal_geodesic(surface: &LevelSurface, q: &Point, s: f64) -> Result<GeodesicArc> {
    let hn = surface.horizontal_normal(q)?;
    GeodesicArc::new(q.clone(), hn.nu_h, hn.lambda, s)
}

/// Parallel surface at distance `r` over the lattice points of a patch.
///
/// Each image point is projected back; a foot farther than one lattice step
/// from its source signals that `r` exceeds the reach.
pub fn parallel_surface_sample(surface: &LevelSurface, patch: &Patch, grid: usize, r: f64) -> Result<Vec<Point>> {
    let step = patch.spacing(grid).into_iter().fold(0.0f64, f64::max);
    let seeds = SeedGrid::new(surface, patch, grid)?;
    let mut out = Vec::new();
    for u in patch.lattice(grid) {
        let q = patch.point(surface, &u)?;
        let image = exp_s(surface, &q, r)?;
        if r == 0.0 {
            out.push(image);
            continue;
        }
        let back = project_to_surface(surface, &image, &seeds, &ProjectionOptions::default())
            .map_err(|e| Error::ReachExceeded(format!("round trip from {:?} failed: {e}", q.coords())))?;
        if back.foot.coord_distance(&q) > step {
            return Err(Error::ReachExceeded(format!(
                "foot of exp_S(q, {r}) moved {} from q = {:?}",
                back.foot.coord_distance(&q),
                q.coords()
            )));
        }
        out.push(image);
    }
    Ok(out)
}

/// Lower estimate of the reach over a set of surface points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reach {
    Bounded(f64),
    Unbounded,
}

impl Reach {
    pub fn value(self) -> f64 {
        match self {
            Reach::Bounded(v) => v,
            Reach::Unbounded => f64::INFINITY,
        }
    }
}

/// Options for [`reach_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachOptions {
    /// Search horizon for conjugate points and collisions; beyond it the
    /// reach is reported as unbounded.
    pub horizon: f64,
    /// Pairs closer than `collision_tol × (initial gap)` count as colliding.
    pub collision_tol: f64,
    /// Scan steps per unit `|λ| s` (at least 64 over the horizon).
    pub steps_per_radian: usize,
}

impl Default for ReachOptions {
    fn default() -> Self {
        ReachOptions {
            horizon: 1e3,
            collision_tol: 1e-6,
            steps_per_radian: 16,
        }
    }
}

/// Minimum over the points of: the first conjugate point (root of det B),
/// the minimality bound `2π/|λ|`, and the first near-collision of normal
/// geodesics from distinct points at equal length.
pub fn reach_estimate(surface: &LevelSurface, points: &[Point], opts: &ReachOptions) -> Result<Reach> {
    let mut best = opts.horizon;
    let mut arcs = Vec::with_capacity(points.len());
    for q in points {
        let f = frame_at(surface, q, EPS_SING)?;
        if f.lambda != 0.0 {
            best = best.min(2.0 * PI / f.lambda.abs());
        }
        let jac = NormalJacobian::new(&f);
        if let Some(root) = first_root(|s| jac.det(s), best, f.lambda, opts) {
            best = best.min(root);
        }
        arcs.push(GeodesicArc::new(q.clone(), f.nu_h.clone(), f.lambda, 0.0)?);
    }
    for i in 0..arcs.len() {
        for j in (i + 1)..arcs.len() {
            if let Some(s) = first_collision(&arcs[i], &arcs[j], best, opts) {
                best = best.min(s);
            }
        }
    }
    if best >= opts.horizon {
        Ok(Reach::Unbounded)
    } else {
        Ok(Reach::Bounded(best))
    }
}

fn scan_steps(limit: f64, lambda: f64, opts: &ReachOptions) -> usize {
    ((limit * lambda.abs()) * opts.steps_per_radian as f64).ceil().max(64.0) as usize
}

fn bisect_sign<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let keep = f(lo).signum();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == keep {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First sign change of `f` on `(0, limit]`, refined by bisection.
fn first_root<F: Fn(f64) -> f64>(f: F, limit: f64, lambda: f64, opts: &ReachOptions) -> Option<f64> {
    let steps = scan_steps(limit, lambda, opts);
    let h = limit / steps as f64;
    let sign0 = f(0.0).signum();
    (1..=steps).find_map(|k| {
        let s = k as f64 * h;
        let v = f(s);
        (v == 0.0 || v.signum() != sign0).then(|| bisect_sign(&f, s - h, s))
    })
}

/// First `s` at which the two geodesics come within `collision_tol` times
/// their initial gap. Local minima of the gap are located by golden section.
fn first_collision(a: &GeodesicArc, b: &GeodesicArc, limit: f64, opts: &ReachOptions) -> Option<f64> {
    let gap0 = a.base.coord_distance(&b.base);
    if gap0 == 0.0 {
        return None;
    }
    let thresh = opts.collision_tol * gap0;
    let gap = |s: f64| a.point_at(s).coord_distance(&b.point_at(s)) - thresh;
    let lam = a.curvature.abs().max(b.curvature.abs());
    let steps = scan_steps(limit, lam, opts);
    let h = limit / steps as f64;
    let mut vals = [gap(0.0), gap(h)];
    for k in 2..=steps {
        let s = k as f64 * h;
        let v = gap(s);
        if v <= 0.0 {
            return Some(bisect_sign(&gap, s - h, s));
        }
        if vals[1] <= vals[0] && vals[1] <= v {
            let (m, vm) = golden_min(&gap, s - 2.0 * h, s);
            if vm <= 0.0 {
                return Some(bisect_sign(&gap, s - 2.0 * h, m));
            }
        }
        vals = [vals[1], v];
    }
    None
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..120 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
        if f1.min(f2) <= 0.0 {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
