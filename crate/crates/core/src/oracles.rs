//! Brute-force cross-checks: finite differences along the surface, Monte
//! Carlo tube volumes and distance by shooting over all geodesic families.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::exp_s;
use crate::error::{Error, Result};
use crate::geodesic::point_with_velocity;
use crate::group::{frame_to_coords, j_horizontal, FrameVector, Point};
use crate::patch::Patch;
use crate::projection::{shoot, ProjectionOptions};
use crate::special::{sin_defect2, sinc, versin_ratio};
use crate::surface::LevelSurface;

/// Directional derivative of `field` at `q ∈ S` along `direction ∈ T_qS`.
///
/// The curve is `q + ε·direction` (in coordinates) pulled back to `S` by one
/// Newton step on `g`; central differences at `h` and `h/2` are combined by
/// Richardson extrapolation.
pub fn fd_directional<F>(
    surface: &LevelSurface,
    q: &Point,
    direction: &FrameVector,
    h: f64,
    field: F,
) -> Result<Vec<f64>>
where
    F: Fn(&Point) -> Result<Vec<f64>>,
{
    if q.n() != surface.n() || direction.n() != surface.n() {
        return Err(Error::DimensionMismatch {
            expected: surface.n(),
            found: if q.n() != surface.n() { q.n() } else { direction.n() },
        });
    }
    let base = q.coords();
    let c = frame_to_coords(q, direction);
    let on_curve = |eps: f64| -> Result<Point> {
        let x: Vec<f64> = base.iter().zip(&c).map(|(b, d)| b + eps * d).collect();
        let (g, grad) = surface.poly().eval_grad(&x);
        let n2: f64 = grad.iter().map(|v| v * v).sum();
        if n2 == 0.0 {
            return Err(Error::SingularPoint {
                nh_norm: 0.0,
                threshold: 0.0,
            });
        }
        let y: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi - g * gi / n2).collect();
        Point::from_coords(&y)
    };
    let central = |step: f64| -> Result<Vec<f64>> {
        let fp = field(&on_curve(step)?)?;
        let fm = field(&on_curve(-step)?)?;
        Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
    };
    let d1 = central(h)?;
    let d2 = central(0.5 * h)?;
    Ok(d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
    /// Samples per PRNG stream.
    pub batch: u64,
    /// Relative margin added to the bounding box on each side.
    pub margin: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            samples: 100_000,
            seed: 0,
            batch: 1 << 14,
            margin: 0.05,
        }
    }
}

/// Why samples were rejected, and how many accepted ones sat near the box wall.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct McDiagnostics {
    pub inside_e: u64,
    pub beyond_r: u64,
    pub foot_outside_patch: u64,
    pub projection_failed: u64,
    pub table_seed_used: u64,
    pub near_box_boundary: u64,
}

impl McDiagnostics {
    fn merge(&mut self, o: &McDiagnostics) {
        self.inside_e += o.inside_e;
        self.beyond_r += o.beyond_r;
        self.foot_outside_patch += o.foot_outside_patch;
        self.projection_failed += o.projection_failed;
        self.table_seed_used += o.table_seed_used;
        self.near_box_boundary += o.near_box_boundary;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub accepted: u64,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub diagnostics: McDiagnostics,
}

/// Lattice points per axis for the bounding box and the seed table.
fn table_grid(dim: usize, points: usize) -> usize {
    ((points as f64).powf(1.0 / dim as f64).floor() as usize).clamp(4, 64)
}

struct SeedTable {
    /// `(coords of exp_S(q(u), s), u, s)`.
    entries: Vec<(Vec<f64>, Vec<f64>, f64)>,
}

impl SeedTable {
    fn nearest(&self, x: &[f64]) -> Option<&(Vec<f64>, Vec<f64>, f64)> {
        self.entries.iter().min_by(|a, b| {
            let da: f64 = a.0.iter().zip(x).map(|(p, q)| (p - q).powi(2)).sum();
            let db: f64 = b.0.iter().zip(x).map(|(p, q)| (p - q).powi(2)).sum();
            da.total_cmp(&db)
        })
    }
}

/// `|U_r|` by rejection sampling.
///
/// `p` is accepted when `g(p) > 0` and shooting `exp_S(q(u), s) = p` converges
/// with `0 < s < r` and `u ∈ U`. Shooting starts from the graph drop of `p`
/// (its free coordinates) and falls back to the nearest point of a table of
/// `exp_S` images.
pub fn mc_tube_volume(surface: &LevelSurface, patch: &Patch, r: f64, opts: &McOptions) -> Result<MCEstimate> {
    if patch.n() != surface.n() {
        return Err(Error::DimensionMismatch {
            expected: surface.n(),
            found: patch.n(),
        });
    }
    if !(r > 0.0) || opts.samples < 2 {
        return Err(Error::InvalidInput("need r > 0 and at least two samples".into()));
    }
    let dim = 2 * surface.n() + 1;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    let levels = 8;
    for u in patch.lattice(table_grid(patch.param_dim(), 4000)) {
        let q = patch.point(surface, &u)?;
        for k in 0..=levels {
            let c = exp_s(surface, &q, r * k as f64 / levels as f64)?.coords();
            for d in 0..dim {
                lo[d] = lo[d].min(c[d]);
                hi[d] = hi[d].max(c[d]);
            }
        }
    }
    for d in 0..dim {
        let pad = opts.margin * (hi[d] - lo[d]).max(r);
        lo[d] -= pad;
        hi[d] += pad;
    }
    let mut entries = Vec::new();
    for u in patch.lattice(table_grid(patch.param_dim(), 400)) {
        let q = patch.point(surface, &u)?;
        for k in 0..=4 {
            let s = r * k as f64 / 4.0;
            entries.push((exp_s(surface, &q, s)?.coords(), u.clone(), s));
        }
    }
    let table = SeedTable { entries };
    // |g(p)| ≤ sup|∇_H g| · δ(p) along the minimizing segment, which stays in the box
    let bounds = surface.poly().grad_abs_bound(&lo, &hi);
    let m = dim - 1;
    let lipschitz = (0..m / 2)
        .map(|i| {
            let ymax = lo[2 * i + 1].abs().max(hi[2 * i + 1].abs());
            let xmax = lo[2 * i].abs().max(hi[2 * i].abs());
            (bounds[2 * i] + ymax * bounds[m]).powi(2) + (bounds[2 * i + 1] + xmax * bounds[m]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let ctx = Classifier {
        surface,
        patch,
        table,
        r,
        g_cutoff: lipschitz * r,
        popts: ProjectionOptions {
            residual_tol: 1e-11,
            max_iter: 60,
            central_jacobian: false,
            ..ProjectionOptions::default()
        },
    };
    let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let wall: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.25 * opts.margin * (b - a)).collect();

    let batch = opts.batch.max(1);
    let batches = opts.samples.div_ceil(batch);
    let per_batch: Vec<(u64, McDiagnostics)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b);
            let count = batch.min(opts.samples - b * batch);
            let mut accepted = 0u64;
            let mut diag = McDiagnostics::default();
            let mut x = vec![0.0; dim];
            for _ in 0..count {
                for d in 0..dim {
                    x[d] = lo[d] + (hi[d] - lo[d]) * rng.random::<f64>();
                }
                if ctx.classify(&x, &mut diag) {
                    accepted += 1;
                    if (0..dim).any(|d| x[d] - lo[d] < wall[d] || hi[d] - x[d] < wall[d]) {
                        diag.near_box_boundary += 1;
                    }
                }
            }
            (accepted, diag)
        })
        .collect();
    let mut accepted = 0;
    let mut diagnostics = McDiagnostics::default();
    for (a, d) in &per_batch {
        accepted += a;
        diagnostics.merge(d);
    }
    let n = opts.samples as f64;
    let p = accepted as f64 / n;
    Ok(MCEstimate {
        value: volume * p,
        std_error: volume * (p * (1.0 - p) / (n - 1.0)).sqrt(),
        samples: opts.samples,
        seed: opts.seed,
        accepted,
        box_lo: lo,
        box_hi: hi,
        diagnostics,
    })
}

struct Classifier<'a> {
    surface: &'a LevelSurface,
    patch: &'a Patch,
    table: SeedTable,
    r: f64,
    /// Samples with `g(p)` at least this large are farther than `r`.
    g_cutoff: f64,
    popts: ProjectionOptions,
}

impl Classifier<'_> {
    fn classify(&self, x: &[f64], diag: &mut McDiagnostics) -> bool {
        let (surface, patch, r) = (self.surface, self.patch, self.r);
        let gp = surface.value_coords(x);
        if !(gp > 0.0) {
            diag.inside_e += 1;
            return false;
        }
        if gp >= self.g_cutoff {
            diag.beyond_r += 1;
            return false;
        }
        let p = Point::from_coords(x).expect("sample has odd dimension");
        let free: Vec<f64> = (0..x.len()).filter(|&k| k != patch.axis).map(|k| x[k]).collect();
        let u0 = patch.params_of_free(&free);
        let mut shot = patch.point_from(surface, &u0, x[patch.axis]).ok().and_then(|q0| {
            let s0 = (gp / horizontal_gradient_norm(surface, &q0)).clamp(1e-3 * r, 2.0 * r);
            shoot(surface, patch, &p, &u0, s0, &self.popts)
        });
        if shot.is_none() {
            diag.table_seed_used += 1;
            if let Some((_, u, s)) = self.table.nearest(x) {
                shot = shoot(surface, patch, &p, u, s.max(1e-3 * r), &self.popts);
            }
        }
        let Some(shot) = shot else {
            diag.projection_failed += 1;
            return false;
        };
        if !(shot.s < r) {
            diag.beyond_r += 1;
            return false;
        }
        if !patch.contains(&patch.params_of(&shot.foot)) {
            diag.foot_outside_patch += 1;
            return false;
        }
        true
    }
}

fn horizontal_gradient_norm(surface: &LevelSurface, q: &Point) -> f64 {
    let (_, grad) = surface.poly().eval_grad(&q.coords());
    let m = q.z.len();
    (0..m / 2)
        .map(|i| {
            let (x, y) = (q.z[2 * i], q.z[2 * i + 1]);
            (grad[2 * i] + y * grad[m]).powi(2) + (grad[2 * i + 1] - x * grad[m]).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Unit vector on `S^{m−1}` from `m − 1` hyperspherical angles.
fn sphere_point(angles: &[f64]) -> Vec<f64> {
    let m = angles.len() + 1;
    let mut v = vec![0.0; m];
    let mut prod = 1.0;
    for (k, a) in angles.iter().enumerate() {
        v[k] = prod * a.cos();
        prod *= a.sin();
    }
    v[m - 1] = prod;
    v
}

/// Endpoint (relative to the start at the origin) of the geodesic with unit
/// direction `v`, phase `φ = λs` and length `s`.
fn shot_endpoint(v: &[f64], phi: f64, s: f64) -> Vec<f64> {
    let lambda = if s > 0.0 { phi / s } else { 0.0 };
    point_with_velocity(&Point::origin(v.len() / 2), v, lambda, s).coords()
}

/// Damped Gauss–Newton with a central-difference Jacobian.
fn lm_solve<F>(f: F, mut x: Vec<f64>, tol: f64, max_iter: usize) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let norm2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut r = f(&x);
    let mut cost = norm2(&r);
    let mut damping = 1e-3;
    for _ in 0..max_iter {
        if cost.sqrt() <= tol {
            break;
        }
        let m = r.len();
        let d = x.len();
        let mut jac = DMatrix::zeros(m, d);
        for c in 0..d {
            let h = 1e-7 * x[c].abs().max(1.0);
            let mut xp = x.clone();
            xp[c] += h;
            let mut xm = x.clone();
            xm[c] -= h;
            let (rp, rm) = (f(&xp), f(&xm));
            for k in 0..m {
                jac[(k, c)] = (rp[k] - rm[k]) / (2.0 * h);
            }
        }
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        while damping < 1e14 {
            let mut a = normal.clone();
            for k in 0..d {
                a[(k, k)] += damping * (normal[(k, k)] + 1e-12);
            }
            if let Some(step) = a.lu().solve(&(-&grad)) {
                let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                let rc = f(&cand);
                let c = norm2(&rc);
                if c < cost {
                    x = cand;
                    r = rc;
                    cost = c;
                    damping = (damping / 3.0).max(1e-15);
                    improved = true;
                    break;
                }
            }
            damping *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some((x, cost.sqrt()))
}

/// Distance by brute force over the family of unit geodesics from `p`.
///
/// A `grid`-per-angle lattice of directions and `2·grid` phases
/// `φ ∈ [−2π, 2π]` is scanned; for each, the length `s` best matching `q` is
/// picked, and the best starts are refined by damped Gauss–Newton in
/// (angles, φ, s). Returns the shortest length that hits `q`, or infinity.
pub fn brute_distance(p: &Point, q: &Point, grid: usize) -> f64 {
    assert_eq!(p.n(), q.n(), "points of different dimension");
    let n = p.n();
    let m = 2 * n;
    let target = p.inv().compose(q).coords();
    let scale = 1.0 + target.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if target.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let grid = grid.max(4);
    let angle_axes: Vec<Vec<f64>> = (0..m - 1)
        .map(|k| {
            let top = if k == m - 2 { 2.0 * PI } else { PI };
            (0..grid).map(|i| top * (i as f64 + 0.5) / grid as f64).collect()
        })
        .collect();
    let phases: Vec<f64> = (0..=2 * grid)
        .map(|i| -2.0 * PI + 4.0 * PI * i as f64 / (2 * grid) as f64)
        .collect();
    let zq = &target[..m];
    let tq = target[m];

    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; m - 1];
    loop {
        let angles: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| angle_axes[k][i]).collect();
        let v = sphere_point(&angles);
        let jv = j_horizontal(&v);
        for &phi in &phases {
            // unit-length endpoint: z = w, t = sin_defect2(φ)
            let (f, g) = (sinc(phi), versin_ratio(phi));
            let w: Vec<f64> = v.iter().zip(&jv).map(|(a, b)| f * a - g * b).collect();
            let h = sin_defect2(phi);
            let ww: f64 = w.iter().map(|a| a * a).sum();
            let mut cands = Vec::new();
            if ww > 0.0 {
                cands.push(w.iter().zip(zq).map(|(a, b)| a * b).sum::<f64>() / ww);
            }
            if h != 0.0 && tq / h > 0.0 {
                cands.push((tq / h).sqrt());
            }
            for s in cands.into_iter().filter(|s| *s > 0.0) {
                let res: f64 =
                    w.iter().zip(zq).map(|(a, b)| (s * a - b).powi(2)).sum::<f64>() + (s * s * h - tq).powi(2);
                let mut x = angles.clone();
                x.push(phi);
                x.push(s);
                starts.push((res, x));
            }
        }
        let mut k = 0;
        loop {
            if k == m - 1 {
                break;
            }
            idx[k] += 1;
            if idx[k] < grid {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == m - 1 {
            break;
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let residual = |x: &[f64]| -> Vec<f64> {
        let v = sphere_point(&x[..m - 1]);
        let phi = x[m - 1].clamp(-2.0 * PI, 2.0 * PI);
        let e = shot_endpoint(&v, phi, x[m].abs());
        e.iter().zip(&target).map(|(a, b)| a - b).collect()
    };
    let mut best = f64::INFINITY;
    for (_, x0) in starts.into_iter().take(24) {
        if let Some((x, res)) = lm_solve(residual, x0, 1e-13 * scale, 200) {
            if res <= 1e-10 * scale {
                best = best.min(x[m].abs());
            }
        }
    }
    best
}
