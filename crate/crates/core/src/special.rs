//! Trigonometric ratios that appear in the geodesic and Jacobi-field formulas.
//!
//! | function | closed form |
//! |---|---|
//! | [`sinc`] | `sin x / x` |
//! | [`versin_ratio`] | `(1 − cos x) / x` |
//! | [`sin_defect2`] | `(x − sin x) / x²` |
//! | [`versin_ratio2`] | `(1 − cos x) / x²` |
//! | [`tan_defect3`] | `(sin x − x cos x) / x³` |
//! | [`quartic_defect`] | `(2 − 2cos x − x sin x) / x⁴` |
//! | [`sin_defect3`] | `(x − sin x) / x³` |
//!
//! All are entire. For `|x| < SERIES_SWITCH` they are evaluated from their
//! Taylor series (Horner in `x²`), otherwise from the closed form with
//! `1 − cos x` rewritten as `2 sin²(x/2)`.

/// Branch switch between the Taylor and closed-form evaluations.
pub const SERIES_SWITCH: f64 = 1.0;

/// Taylor terms kept; the first neglected term is below 1e-30 at the switch.
pub const SERIES_TERMS: usize = 16;

const FACT_LEN: usize = 2 * SERIES_TERMS + 6;

const fn inv_factorials() -> [f64; FACT_LEN] {
    let mut out = [1.0; FACT_LEN];
    let mut k = 1;
    while k < FACT_LEN {
        out[k] = out[k - 1] / k as f64;
        k += 1;
    }
    out
}

const INV_FACT: [f64; FACT_LEN] = inv_factorials();

const fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

// Coefficients c_k of Σ c_k x^{2k}.
const fn series(kind: u8) -> [f64; SERIES_TERMS] {
    let mut c = [0.0; SERIES_TERMS];
    let mut k = 0;
    while k < SERIES_TERMS {
        let s = sign(k);
        c[k] = match kind {
            0 => s * INV_FACT[2 * k + 1],
            1 => s * INV_FACT[2 * k + 2],
            2 => s * INV_FACT[2 * k + 3],
            3 => s * (2 * k + 2) as f64 * INV_FACT[2 * k + 3],
            _ => s * (2 * k + 2) as f64 * INV_FACT[2 * k + 4],
        };
        k += 1;
    }
    c
}

const SINC: [f64; SERIES_TERMS] = series(0);
const VERSIN2: [f64; SERIES_TERMS] = series(1);
const SIN_DEFECT3: [f64; SERIES_TERMS] = series(2);
const TAN_DEFECT3: [f64; SERIES_TERMS] = series(3);
const QUARTIC: [f64; SERIES_TERMS] = series(4);

#[inline]
fn horner(c: &[f64; SERIES_TERMS], x: f64) -> f64 {
    let y = x * x;
    c.iter().rev().fold(0.0, |acc, &ck| acc * y + ck)
}

#[inline]
fn half_versin(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `sin x / x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        horner(&SINC, x)
    } else {
        x.sin() / x
    }
}

/// `(1 − cos x) / x²`.
pub fn versin_ratio2(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        horner(&VERSIN2, x)
    } else {
        half_versin(x) / (x * x)
    }
}

/// `(1 − cos x) / x`.
pub fn versin_ratio(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        x * horner(&VERSIN2, x)
    } else {
        half_versin(x) / x
    }
}

/// `(x − sin x) / x³`.
pub fn sin_defect3(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        horner(&SIN_DEFECT3, x)
    } else {
        (x - x.sin()) / (x * x * x)
    }
}

/// `(x − sin x) / x²`.
pub fn sin_defect2(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        x * horner(&SIN_DEFECT3, x)
    } else {
        (x - x.sin()) / (x * x)
    }
}

/// `(sin x − x cos x) / x³`.
pub fn tan_defect3(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        horner(&TAN_DEFECT3, x)
    } else {
        (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// `(2 − 2cos x − x sin x) / x⁴`.
pub fn quartic_defect(x: f64) -> f64 {
    if x.abs() < SERIES_SWITCH {
        horner(&QUARTIC, x)
    } else {
        (2.0 * half_versin(x) - x * x.sin()) / (x * x * x * x)
    }
}

/// Derivative of [`sinc`]: `(x cos x − sin x)/x² = −x·tan_defect3(x)`.
pub fn sinc_prime(x: f64) -> f64 {
    -x * tan_defect3(x)
}

/// Derivative of [`sin_defect2`]: `versin_ratio2(x) − 2·sin_defect3(x)`.
pub fn sin_defect2_prime(x: f64) -> f64 {
    versin_ratio2(x) - 2.0 * sin_defect3(x)
}

/// Named access for the CLI and tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ratio {
    Sinc,
    VersinRatio,
    SinDefect2,
    VersinRatio2,
    TanDefect3,
    QuarticDefect,
    SinDefect3,
}

impl Ratio {
    pub const ALL: [Ratio; 7] = [
        Ratio::Sinc,
        Ratio::VersinRatio,
        Ratio::SinDefect2,
        Ratio::VersinRatio2,
        Ratio::TanDefect3,
        Ratio::QuarticDefect,
        Ratio::SinDefect3,
    ];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Ratio::Sinc => sinc(x),
            Ratio::VersinRatio => versin_ratio(x),
            Ratio::SinDefect2 => sin_defect2(x),
            Ratio::VersinRatio2 => versin_ratio2(x),
            Ratio::TanDefect3 => tan_defect3(x),
            Ratio::QuarticDefect => quartic_defect(x),
            Ratio::SinDefect3 => sin_defect3(x),
        }
    }

    /// Both branches at `x`, ignoring the switch: `(series, closed)`.
    pub fn branches(self, x: f64) -> (f64, f64) {
        let hv = half_versin(x);
        let (c, s) = (x.cos(), x.sin());
        match self {
            Ratio::Sinc => (horner(&SINC, x), s / x),
            Ratio::VersinRatio => (x * horner(&VERSIN2, x), hv / x),
            Ratio::SinDefect2 => (x * horner(&SIN_DEFECT3, x), (x - s) / (x * x)),
            Ratio::VersinRatio2 => (horner(&VERSIN2, x), hv / (x * x)),
            Ratio::TanDefect3 => (horner(&TAN_DEFECT3, x), (s - x * c) / x.powi(3)),
            Ratio::QuarticDefect => (horner(&QUARTIC, x), (2.0 * hv - x * s) / x.powi(4)),
            Ratio::SinDefect3 => (horner(&SIN_DEFECT3, x), (x - s) / x.powi(3)),
        }
    }
}

/// The weights `cos(λs)`, `sF₁`, `s²F₂`, `s³F₃`, `s⁴F₄` and the cubic weight
/// `s³K`, all evaluated at `x = λs`. Smooth in `λ` through `λ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcWeights {
    pub f: [f64; 5],
    pub k: f64,
}

impl ArcWeights {
    pub fn new(lambda: f64, s: f64) -> Self {
        let x = lambda * s;
        let s2 = s * s;
        let s3 = s2 * s;
        ArcWeights {
            f: [
                x.cos(),
                sinc(x) * s,
                versin_ratio2(x) * s2,
                tan_defect3(x) * s3,
                quartic_defect(x) * s2 * s2,
            ],
            k: sin_defect3(x) * s3,
        }
    }
}

/// `(λs cos λs − sin λs)/λ²`, written as `−λ s³ tan_defect3(λs)`.
pub fn jacobi_h(lambda: f64, s: f64) -> f64 {
    -lambda * s.powi(3) * tan_defect3(lambda * s)
}

/// `(cos λs − 1 + λs sin λs)/λ²`, written as `s²(sinc − versin_ratio2)(λs)`.
pub fn jacobi_j(lambda: f64, s: f64) -> f64 {
    let x = lambda * s;
    s * s * (sinc(x) - versin_ratio2(x))
}
