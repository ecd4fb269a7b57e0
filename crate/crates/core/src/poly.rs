//! Sparse multivariate polynomials with exact derivatives up to order two.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Monomial>,
    /// Nonzero `(variable, exponent)` factors of each term.
    factors: Vec<SmallVec<[(usize, i32); 4]>>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

/// Value, gradient and row-major Hessian at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn hess_at(&self, a: usize, b: usize) -> f64 {
        self.hess[a * self.grad.len() + b]
    }
}

impl Polynomial {
    /// Merges repeated exponent tuples and drops zero coefficients.
    pub fn new(nvars: usize, terms: Vec<Monomial>) -> Result<Self> {
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for m in terms {
            if m.exps.len() != nvars {
                return Err(Error::InvalidInput(format!(
                    "monomial has {} exponents, expected {nvars}",
                    m.exps.len()
                )));
            }
            if !m.coef.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            *map.entry(m.exps).or_insert(0.0) += m.coef;
        }
        Ok(Self::from_map(nvars, map))
    }

    fn from_map(nvars: usize, map: BTreeMap<Vec<u32>, f64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(exps, coef)| Monomial { exps, coef })
            .collect();
        Self::with_terms(nvars, terms)
    }

    fn with_terms(nvars: usize, terms: Vec<Monomial>) -> Self {
        let factors = terms
            .iter()
            .map(|m: &Monomial| {
                m.exps
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| **e > 0)
                    .map(|(k, e)| (k, *e as i32))
                    .collect()
            })
            .collect();
        Polynomial { nvars, terms, factors }
    }

    fn to_map(&self) -> BTreeMap<Vec<u32>, f64> {
        self.terms.iter().map(|m| (m.exps.clone(), m.coef)).collect()
    }

    pub fn zero(nvars: usize) -> Self {
        Self::with_terms(nvars, Vec::new())
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::from_map(nvars, BTreeMap::from([(vec![0; nvars], c)]))
    }

    /// The coordinate function `x_k`.
    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Self::from_map(nvars, BTreeMap::from([(e, 1.0)]))
    }

    /// `offset + Σ coeffs[k] x_k`.
    pub fn linear(offset: f64, coeffs: &[f64]) -> Self {
        let nvars = coeffs.len();
        let mut p = Polynomial::constant(nvars, offset);
        for (k, &c) in coeffs.iter().enumerate() {
            p = p.add(&Polynomial::var(nvars, k).scale(c));
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|m| m.exps.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut map = self.to_map();
        for m in &other.terms {
            *map.entry(m.exps.clone()).or_insert(0.0) += m.coef;
        }
        Self::from_map(self.nvars, map)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        let map = self.terms.iter().map(|m| (m.exps.clone(), c * m.coef)).collect();
        Self::from_map(self.nvars, map)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let e: Vec<u32> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
                *map.entry(e).or_insert(0.0) += a.coef * b.coef;
            }
        }
        Self::from_map(self.nvars, map)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        (0..e).fold(Polynomial::constant(self.nvars, 1.0), |acc, _| acc.mul(self))
    }

    /// `p(L₁(x), …, L_d(x))` where each `L_k` is a polynomial in the new variables.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Polynomial> {
        if subs.len() != self.nvars {
            return Err(Error::InvalidInput(format!(
                "need {} substitutions, got {}",
                self.nvars,
                subs.len()
            )));
        }
        let out_vars = subs.first().map_or(0, |p| p.nvars);
        let mut out = Polynomial::zero(out_vars);
        for m in &self.terms {
            let mut term = Polynomial::constant(out_vars, m.coef);
            for (k, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&subs[k].pow(e));
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .zip(&self.factors)
            .map(|(m, f)| f.iter().fold(m.coef, |acc, &(k, e)| acc * x[k].powi(e)))
            .sum()
    }

    /// Value and gradient.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut value = 0.0;
        let mut grad = vec![0.0; self.nvars];
        for (m, f) in self.terms.iter().zip(&self.factors) {
            let pows: SmallVec<[f64; 4]> = f.iter().map(|&(k, e)| x[k].powi(e)).collect();
            value += pows.iter().fold(m.coef, |a, b| a * b);
            for (a, &(k, e)) in f.iter().enumerate() {
                let rest = pows
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .fold(m.coef, |acc, (_, p)| acc * p);
                grad[k] += rest * e as f64 * x[k].powi(e - 1);
            }
        }
        (value, grad)
    }

    /// Upper bounds of `|∂ₖp|` over the box `lo..hi`.
    pub fn grad_abs_bound(&self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        let big: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| a.abs().max(b.abs())).collect();
        let mut out = vec![0.0; self.nvars];
        for (m, f) in self.terms.iter().zip(&self.factors) {
            for &(k, e) in f {
                let rest = f
                    .iter()
                    .filter(|(j, _)| *j != k)
                    .fold(m.coef.abs(), |acc, &(j, ej)| acc * big[j].powi(ej));
                out[k] += rest * e as f64 * big[k].powi(e - 1);
            }
        }
        out
    }

    /// Value, gradient and Hessian, all exact.
    pub fn jet(&self, x: &[f64]) -> Jet {
        let d = self.nvars;
        let mut value = 0.0;
        let mut grad = vec![0.0; d];
        let mut hess = vec![0.0; d * d];
        let mut p = vec![[0.0f64; 3]; d];
        for m in &self.terms {
            for k in 0..d {
                let e = m.exps[k] as i32;
                let v = x[k];
                p[k] = [
                    if e == 0 { 1.0 } else { v.powi(e) },
                    if e < 1 { 0.0 } else { e as f64 * v.powi(e - 1) },
                    if e < 2 {
                        0.0
                    } else {
                        (e * (e - 1)) as f64 * v.powi(e - 2)
                    },
                ];
            }
            let prod_except =
                |skip: &[usize]| -> f64 { (0..d).filter(|k| !skip.contains(k)).map(|k| p[k][0]).product() };
            value += m.coef * prod_except(&[]);
            for a in 0..d {
                if m.exps[a] == 0 {
                    continue;
                }
                grad[a] += m.coef * p[a][1] * prod_except(&[a]);
                hess[a * d + a] += m.coef * p[a][2] * prod_except(&[a]);
                for b in (a + 1)..d {
                    if m.exps[b] == 0 {
                        continue;
                    }
                    let h = m.coef * p[a][1] * p[b][1] * prod_except(&[a, b]);
                    hess[a * d + b] += h;
                    hess[b * d + a] += h;
                }
            }
        }
        Jet { value, grad, hess }
    }
}
