//! Safeguarded Newton iteration on a sign-changing bracket.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Finds a root of `f` in `[lo, hi]` where `f(lo) ≤ 0 ≤ f(hi)`.
///
/// `fdf` returns `(f(x), f'(x))`. A Newton step is taken when it stays inside
/// the current bracket and shrinks it fast enough, otherwise the bracket is
/// bisected. Stops when the bracket is below `xtol` or `f` is exactly zero.
pub fn newton_bisect<F>(mut fdf: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = fdf(lo);
    let (fhi, _) = fdf(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::InvalidInput(format!(
            "root not bracketed: f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }

    let mut x = 0.5 * (lo + hi);
    let mut step_prev = hi - lo;
    let mut step = step_prev;
    let (mut fx, mut dfx) = fdf(x);
    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton_ok = dfx != 0.0 && {
            let xn = x - fx / dfx;
            xn > lo && xn < hi && (fx / dfx).abs() * 2.0 < step_prev.abs()
        };
        step_prev = step;
        if newton_ok {
            step = fx / dfx;
            x -= step;
        } else {
            step = 0.5 * (hi - lo);
            x = lo + step;
        }
        if step.abs() <= xtol || hi - lo <= xtol {
            return Ok(x);
        }
        (fx, dfx) = fdf(x);
    }
    Err(Error::NoConvergence(format!("root finder stalled in [{lo}, {hi}]")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r = newton_bisect(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn flat_start_falls_back_to_bisection() {
        let r = newton_bisect(|x| (x.powi(3), 3.0 * x * x), -1.0, 3.0, 1e-14).unwrap();
        assert!(r.abs() < 1e-4);
    }

    #[test]
    fn unbracketed_is_an_error() {
        assert!(newton_bisect(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12).is_err());
    }
}
