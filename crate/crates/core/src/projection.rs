//! Metric projection onto a level surface by geodesic shooting.
//!
//! A foot `q ∈ S` of `p` with `δ(p) = s` satisfies `exp_S(q, s) = p`. Writing
//! `q = q(u)` through a graph patch turns this into `2n + 1` equations in the
//! `2n + 1` unknowns `(u, s)`, solved by damped Gauss–Newton
//! (Levenberg–Marquardt) from the best lattice seeds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distance::{cc_distance, normal_geodesic};
use crate::error::{Error, Result};
use crate::geodesic::{coordinate_velocity, GeodesicArc};
use crate::group::Point;
use crate::patch::Patch;
use crate::surface::LevelSurface;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub foot: Point,
    pub dist: f64,
    /// Minimizing geodesic from `foot` to the projected point.
    pub arc: GeodesicArc,
    /// Distinct numerical solutions tied at the minimal distance.
    pub multiplicity_hint: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOptions {
    /// Seeds refined per query.
    pub max_seeds: usize,
    /// Extra seeds tried when the cross-check against the lattice fails.
    pub extra_seeds: usize,
    /// Relative tie tolerance on the distance.
    pub tie_rel: f64,
    /// Absolute residual accepted as converged, scaled by `1 + |p|∞`.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Central (rather than forward) differences for the Jacobian.
    pub central_jacobian: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            max_seeds: 5,
            extra_seeds: 15,
            tie_rel: 1e-6,
            residual_tol: 1e-12,
            max_iter: 100,
            central_jacobian: true,
        }
    }
}

/// Lattice of surface points used to seed projections.
#[derive(Debug, Clone)]
pub struct SeedGrid {
    patch: Patch,
    grid: usize,
    /// One entry per lattice index; `None` where the lift failed or the point is singular.
    points: Vec<Option<(Vec<f64>, Point)>>,
}

impl SeedGrid {
    pub fn new(surface: &LevelSurface, patch: &Patch, grid: usize) -> Result<Self> {
        if patch.n() != surface.n() {
            return Err(Error::DimensionMismatch {
                expected: surface.n(),
                found: patch.n(),
            });
        }
        let grid = grid.max(2);
        let points = patch
            .lattice(grid)
            .into_iter()
            .map(|u| {
                let q = patch.point(surface, &u).ok()?;
                surface.horizontal_normal(&q).ok()?;
                Some((u, q))
            })
            .collect();
        Ok(SeedGrid {
            patch: patch.clone(),
            grid,
            points,
        })
    }

    pub fn patch(&self) -> &Patch {
        &self.patch
    }

    pub fn len(&self) -> usize {
        self.points.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Seeds ordered by preference: lattice-local minima of the distance to
    /// `p` first (nearest first), then the remaining points by distance.
    /// Also returns the smallest lattice distance.
    fn ranked(&self, p: &Point) -> (Vec<(Vec<f64>, f64)>, f64) {
        let dists: Vec<Option<f64>> = self
            .points
            .iter()
            .map(|e| e.as_ref().map(|(_, q)| cc_distance(q, p)))
            .collect();
        let mut minima = Vec::new();
        let mut others = Vec::new();
        for (idx, entry) in self.points.iter().enumerate() {
            let (Some((u, _)), Some(d)) = (entry, dists[idx]) else {
                continue;
            };
            let local = self
                .patch
                .lattice_neighbours(idx, self.grid)
                .into_iter()
                .all(|j| dists[j].is_none_or(|e| d <= e));
            if local {
                minima.push((u.clone(), d));
            } else {
                others.push((u.clone(), d));
            }
        }
        let by_dist = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.total_cmp(&b.1);
        minima.sort_by(by_dist);
        others.sort_by(by_dist);
        let best = minima.first().map_or(f64::INFINITY, |m| m.1);
        minima.extend(others);
        (minima, best)
    }
}

/// A converged shooting solution.
#[derive(Debug, Clone)]
pub struct Shot {
    pub u: Vec<f64>,
    pub s: f64,
    pub foot: Point,
    pub arc: GeodesicArc,
}

/// Solves `exp_S(q(u), s) = p` from `(u0, s0)`.
pub fn shoot(
    surface: &LevelSurface,
    patch: &Patch,
    p: &Point,
    u0: &[f64],
    s0: f64,
    opts: &ProjectionOptions,
) -> Option<Shot> {
    let dim = u0.len();
    let pc = p.coords();
    let scale = 1.0 + pc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = opts.residual_tol * scale;
    let mut w_hint = patch.guess;

    let eval = |x: &[f64], w_hint: &mut f64| -> Option<(Vec<f64>, GeodesicArc)> {
        let q = patch.point_from(surface, &x[..dim], *w_hint).ok()?;
        *w_hint = q.coord(patch.axis);
        let arc = normal_geodesic(surface, &q, x[dim]).ok()?;
        let e = arc.endpoint().coords();
        Some((e.iter().zip(&pc).map(|(a, b)| a - b).collect(), arc))
    };
    let norm2 = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut x: Vec<f64> = u0.iter().copied().chain([s0]).collect();
    let (mut r, mut arc) = eval(&x, &mut w_hint)?;
    let mut cost = norm2(&r);
    let mut damping = 1e-3;
    for _ in 0..opts.max_iter {
        if cost.sqrt() <= tol {
            break;
        }
        let m = r.len();
        let mut jac = DMatrix::zeros(m, dim + 1);
        for c in 0..dim {
            let mut xp = x.clone();
            let mut wp = w_hint;
            if opts.central_jacobian {
                let h = 1e-7 * x[c].abs().max(1.0);
                xp[c] += h;
                let mut xm = x.clone();
                xm[c] -= h;
                let mut wm = w_hint;
                let (rp, _) = eval(&xp, &mut wp)?;
                let (rm, _) = eval(&xm, &mut wm)?;
                for k in 0..m {
                    jac[(k, c)] = (rp[k] - rm[k]) / (2.0 * h);
                }
            } else {
                let h = 1.5e-8 * x[c].abs().max(1.0);
                xp[c] += h;
                let (rp, _) = eval(&xp, &mut wp)?;
                for k in 0..m {
                    jac[(k, c)] = (rp[k] - r[k]) / h;
                }
            }
        }
        let vel = coordinate_velocity(&arc, x[dim]);
        for k in 0..m {
            jac[(k, dim)] = vel[k];
        }
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..24 {
            let mut a = normal.clone();
            for k in 0..=dim {
                a[(k, k)] += damping * (normal[(k, k)] + 1e-12);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                damping *= 10.0;
                continue;
            };
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let mut w = w_hint;
            if let Some((rc, ac)) = eval(&cand, &mut w) {
                let c = norm2(&rc);
                if c < cost {
                    x = cand;
                    r = rc;
                    arc = ac;
                    cost = c;
                    w_hint = w;
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
    if cost.sqrt() > tol || !(x[dim] > 0.0) {
        return None;
    }
    Some(Shot {
        u: x[..dim].to_vec(),
        s: x[dim],
        foot: arc.base.clone(),
        arc,
    })
}

/// Nearest point of `S` to `p` (with `g(p) > 0`) within the seeded patch.
pub fn project_to_surface(
    surface: &LevelSurface,
    p: &Point,
    seeds: &SeedGrid,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    if p.n() != surface.n() {
        return Err(Error::DimensionMismatch {
            expected: surface.n(),
            found: p.n(),
        });
    }
    let gp = surface.value(p);
    if !(gp > 0.0) {
        return Err(Error::InvalidInput(format!(
            "point must lie outside E (g(p) = {gp} ≤ 0)"
        )));
    }
    let (ranked, lattice_best) = seeds.ranked(p);
    if ranked.is_empty() {
        return Err(Error::NoConvergence("seed lattice has no regular points".into()));
    }
    let patch = seeds.patch();
    let mut shots: Vec<Shot> = Vec::new();
    let mut tried = 0;
    let budget = opts.max_seeds + opts.extra_seeds;
    for (u0, d0) in &ranked {
        if tried >= budget {
            break;
        }
        // the first batch always runs; extra seeds only if the cross-check fails
        if tried >= opts.max_seeds {
            let best = shots.iter().map(|s| s.s).fold(f64::INFINITY, f64::min);
            if best <= lattice_best * (1.0 + 1e-9) + 1e-12 {
                break;
            }
        }
        tried += 1;
        if let Some(shot) = shoot(surface, patch, p, u0, *d0, opts) {
            let minimizing_range = shot.arc.within_minimizing_range()
                || (shot.arc.curvature * shot.s).abs() <= 2.0 * std::f64::consts::PI * (1.0 + 1e-9);
            if minimizing_range {
                shots.push(shot);
            }
        }
    }
    if shots.is_empty() {
        return Err(Error::NoConvergence(format!("none of {tried} seeds converged")));
    }
    shots.sort_by(|a, b| a.s.total_cmp(&b.s));
    let best = shots[0].s;
    if best > lattice_best * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::NoConvergence(format!(
            "best shooting solution {best} exceeds lattice distance {lattice_best}"
        )));
    }
    let mut tied: Vec<Shot> = Vec::new();
    for shot in shots.into_iter().filter(|s| s.s - best <= opts.tie_rel * best) {
        let sep = 1e-6 * (1.0 + shot.foot.coords().iter().fold(0.0f64, |m, v| m.max(v.abs())));
        if !tied.iter().any(|t| t.foot.coord_distance(&shot.foot) <= sep) {
            tied.push(shot);
        }
    }
    let count = tied.len();
    let results: Vec<ProjectionResult> = tied
        .into_iter()
        .map(|s| ProjectionResult {
            foot: s.foot,
            dist: s.s,
            arc: s.arc,
            multiplicity_hint: count,
        })
        .collect();
    if count > 1 {
        return Err(Error::AmbiguousProjection { solutions: results });
    }
    Ok(results.into_iter().next().expect("one solution"))
}

/// `δ(p)` even when the projection is ambiguous.
pub fn distance_to_surface(
    surface: &LevelSurface,
    p: &Point,
    seeds: &SeedGrid,
    opts: &ProjectionOptions,
) -> Result<f64> {
    match project_to_surface(surface, p, seeds, opts) {
        Ok(r) => Ok(r.dist),
        Err(Error::AmbiguousProjection { solutions }) => Ok(solutions[0].dist),
        Err(e) => Err(e),
    }
}
