//! Coordinate patches of a level surface written as a graph.
//!
//! One coordinate (`axis`) is solved for from `g = 0`; the other `2n` "free"
//! coordinates range over a box, or over an annulus in the first two free
//! coordinates times a box in the rest. Parameters `u` are the free coordinates
//! themselves (box) or `(ρ, θ, rest…)` (annulus).

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::Point;
use crate::surface::LevelSurface;

const LIFT_MAX_ITER: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Domain {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `inner ≤ ρ ≤ outer` in the first two free coordinates, box `lo..hi` in the rest.
    Annulus {
        inner: f64,
        outer: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Patch {
    /// Coordinate index solved from `g = 0` (`2n` is `t`).
    pub axis: usize,
    pub domain: Domain,
    /// Starting value for the Newton solve of the `axis` coordinate.
    pub guess: f64,
}

impl Patch {
    pub fn new(axis: usize, domain: Domain, guess: f64) -> Result<Self> {
        let p = Patch { axis, domain, guess };
        p.validate()?;
        Ok(p)
    }

    pub fn graph_box(axis: usize, lo: &[f64], hi: &[f64], guess: f64) -> Result<Self> {
        Patch::new(
            axis,
            Domain::Box {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
            guess,
        )
    }

    pub fn annulus(axis: usize, inner: f64, outer: f64, lo: &[f64], hi: &[f64], guess: f64) -> Result<Self> {
        Patch::new(
            axis,
            Domain::Annulus {
                inner,
                outer,
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
            guess,
        )
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.param_bounds();
        if lo.len() % 2 != 0 || lo.is_empty() {
            return Err(Error::InvalidInput(format!(
                "patch needs 2n free coordinates, got {}",
                lo.len()
            )));
        }
        if self.axis > lo.len() {
            return Err(Error::InvalidInput(format!(
                "graph axis {} out of range for n = {}",
                self.axis,
                lo.len() / 2
            )));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidInput("patch bounds must satisfy lo < hi".into()));
        }
        if let Domain::Annulus { inner, .. } = self.domain {
            if inner < 0.0 {
                return Err(Error::InvalidInput("annulus radii must be ≥ 0".into()));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.param_dim() / 2
    }

    pub fn param_dim(&self) -> usize {
        match &self.domain {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Annulus { lo, .. } => lo.len() + 2,
        }
    }

    /// Parameter ranges; θ runs over `[0, 2π]` for annuli.
    pub fn param_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.domain {
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Annulus { inner, outer, lo, hi } => {
                let mut l = vec![*inner, 0.0];
                let mut h = vec![*outer, 2.0 * PI];
                l.extend_from_slice(lo);
                h.extend_from_slice(hi);
                (l, h)
            }
        }
    }

    fn is_periodic(&self, k: usize) -> bool {
        matches!(self.domain, Domain::Annulus { .. }) && k == 1
    }

    /// Free coordinates of the parameter `u`.
    pub fn free_coords(&self, u: &[f64]) -> Vec<f64> {
        match self.domain {
            Domain::Box { .. } => u.to_vec(),
            Domain::Annulus { .. } => {
                let (s, c) = u[1].sin_cos();
                let mut f = vec![u[0] * c, u[0] * s];
                f.extend_from_slice(&u[2..]);
                f
            }
        }
    }

    /// `|∂(free coords)/∂u|`.
    pub fn param_jacobian(&self, u: &[f64]) -> f64 {
        match self.domain {
            Domain::Box { .. } => 1.0,
            Domain::Annulus { .. } => u[0],
        }
    }

    /// Parameters of a point (drops the `axis` coordinate).
    pub fn params_of(&self, p: &Point) -> Vec<f64> {
        let free: Vec<f64> = (0..p.dim()).filter(|&k| k != self.axis).map(|k| p.coord(k)).collect();
        self.params_of_free(&free)
    }

    pub fn params_of_free(&self, free: &[f64]) -> Vec<f64> {
        match self.domain {
            Domain::Box { .. } => free.to_vec(),
            Domain::Annulus { .. } => {
                let mut u = vec![free[0].hypot(free[1]), free[1].atan2(free[0]).rem_euclid(2.0 * PI)];
                u.extend_from_slice(&free[2..]);
                u
            }
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        let (lo, hi) = self.param_bounds();
        (0..u.len()).all(|k| self.is_periodic(k) || (u[k] >= lo[k] && u[k] <= hi[k]))
    }

    fn assemble(&self, free: &[f64], w: f64) -> Vec<f64> {
        let mut c = Vec::with_capacity(free.len() + 1);
        c.extend_from_slice(&free[..self.axis]);
        c.push(w);
        c.extend_from_slice(&free[self.axis..]);
        c
    }

    /// Surface point with parameters `u`.
    pub fn point(&self, surface: &LevelSurface, u: &[f64]) -> Result<Point> {
        self.point_from(surface, u, self.guess)
    }

    /// As [`Patch::point`], with Newton started from `w0`.
    pub fn point_from(&self, surface: &LevelSurface, u: &[f64], w0: f64) -> Result<Point> {
        if u.len() != 2 * surface.n() {
            return Err(Error::DimensionMismatch {
                expected: surface.n(),
                found: u.len() / 2,
            });
        }
        let free = self.free_coords(u);
        let g = surface.poly();
        let mut w = w0;
        for _ in 0..LIFT_MAX_ITER {
            let c = self.assemble(&free, w);
            let (v, grad) = g.eval_grad(&c);
            let dw = grad[self.axis];
            if v == 0.0 {
                return Point::from_coords(&c);
            }
            if dw == 0.0 || !dw.is_finite() {
                break;
            }
            let step = v / dw;
            w -= step;
            if step.abs() <= 4e-16 * w.abs().max(1.0) {
                return Point::from_coords(&self.assemble(&free, w));
            }
        }
        Err(Error::NoConvergence(format!(
            "could not solve g = 0 along coordinate {} at u = {u:?}",
            self.axis
        )))
    }

    /// Area density `dS/du = |∇g| / |∂_axis g| · |∂free/∂u|`.
    pub fn area_density(&self, surface: &LevelSurface, q: &Point, u: &[f64], grad_norm: f64) -> f64 {
        let (_, grad) = surface.poly().eval_grad(&q.coords());
        grad_norm / grad[self.axis].abs() * self.param_jacobian(u)
    }

    /// Tensor Gauss–Legendre rule over the parameter domain: `nodes` points per
    /// panel, `panels` panels per axis. Returns `(u, weight)`.
    pub fn quadrature(&self, nodes: usize, panels: usize) -> Vec<(Vec<f64>, f64)> {
        let rule = GaussLegendre::new(NonZeroUsize::new(nodes.max(1)).expect("nonzero"));
        let pairs = rule.as_node_weight_pairs();
        let panels = panels.max(1);
        let (lo, hi) = self.param_bounds();
        let axes: Vec<Vec<(f64, f64)>> = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| {
                let h = (b - a) / panels as f64;
                (0..panels)
                    .flat_map(|p| {
                        let left = a + p as f64 * h;
                        pairs
                            .iter()
                            .map(move |(x, w)| (left + 0.5 * h * (x + 1.0), 0.5 * h * w))
                    })
                    .collect()
            })
            .collect();
        tensor(&axes)
    }

    /// Regular lattice with `grid` points per axis (θ excludes the duplicate 2π).
    pub fn lattice(&self, grid: usize) -> Vec<Vec<f64>> {
        let grid = grid.max(2);
        let (lo, hi) = self.param_bounds();
        let axes: Vec<Vec<(f64, f64)>> = (0..lo.len())
            .map(|k| {
                let (a, b) = (lo[k], hi[k]);
                let steps = if self.is_periodic(k) { grid } else { grid - 1 };
                (0..grid)
                    .map(|i| (a + (b - a) * i as f64 / steps as f64, 1.0))
                    .collect()
            })
            .collect();
        tensor(&axes).into_iter().map(|(u, _)| u).collect()
    }

    /// Lattice step per axis, in free-coordinate length (θ measured at the outer radius).
    pub fn spacing(&self, grid: usize) -> Vec<f64> {
        let grid = grid.max(2);
        let (lo, hi) = self.param_bounds();
        (0..lo.len())
            .map(|k| {
                if self.is_periodic(k) {
                    hi[0] * 2.0 * PI / grid as f64
                } else {
                    (hi[k] - lo[k]) / (grid - 1) as f64
                }
            })
            .collect()
    }

    /// Lattice indices adjacent to `idx` along one axis.
    pub fn lattice_neighbours(&self, idx: usize, grid: usize) -> Vec<usize> {
        let grid = grid.max(2);
        let dim = self.param_dim();
        let mut digits = vec![0usize; dim];
        let mut rest = idx;
        for k in (0..dim).rev() {
            digits[k] = rest % grid;
            rest /= grid;
        }
        let index = |d: &[usize]| d.iter().fold(0, |acc, &v| acc * grid + v);
        let mut out = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            for delta in [-1isize, 1] {
                let v = digits[k] as isize + delta;
                let v = if self.is_periodic(k) {
                    v.rem_euclid(grid as isize)
                } else if v < 0 || v >= grid as isize {
                    continue;
                } else {
                    v
                };
                let mut d = digits.clone();
                d[k] = v as usize;
                out.push(index(&d));
            }
        }
        out
    }
}

fn tensor(axes: &[Vec<(f64, f64)>]) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|(u, w)| {
                axis.iter().map(move |&(x, wx)| {
                    let mut v = u.clone();
                    v.push(x);
                    (v, w * wx)
                })
            })
            .collect();
    }
    out
}
