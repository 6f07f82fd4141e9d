//! Bracketed root finding for monotone scalar maps.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Accept `x` once `|f(x)| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { tol: 1e-12, max_iter: 200 }
    }
}

/// Grows `[lo, hi]` geometrically until `f` changes sign across it.
///
/// `floor`, when given, is an exclusive lower limit on the domain: the
/// lower end approaches it geometrically instead of crossing it.
/// Returns the bracket together with the function values at its ends.
pub fn expand_bracket<F>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    floor: Option<f64>,
    factor: f64,
    max_expansions: usize,
) -> Result<Option<(f64, f64, f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(factor > 1.0) || !(hi > lo) {
        return Err(Error::Invalid(format!(
            "bracket expansion needs lo < hi and factor > 1 (got [{lo}, {hi}], {factor})"
        )));
    }
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    for _ in 0..=max_expansions {
        if flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0) {
            return Ok(Some((lo, hi, flo, fhi)));
        }
        let width = hi - lo;
        if flo.abs() < fhi.abs() {
            let mut next = lo - width * (factor - 1.0);
            if let Some(limit) = floor {
                if next <= limit {
                    next = limit + (lo - limit) / factor;
                }
            }
            lo = next;
            flo = f(lo)?;
        } else {
            hi += width * (factor - 1.0);
            fhi = f(hi)?;
        }
    }
    Ok(None)
}

/// Root of `f` inside a sign-changing bracket: bisection until the
/// bracket is narrow, then bracketed secant steps.
pub fn solve_bracketed<F>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64, mut fhi: f64, opts: RootOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo < 0.0) == (fhi < 0.0) {
        return Err(Error::Invalid(format!("no sign change on [{lo}, {hi}]")));
    }
    let mut iter = 0;
    while hi - lo > 1e-3 * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() <= opts.tol {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        iter += 1;
        if iter >= opts.max_iter {
            return Err(Error::Invalid("root finding exceeded the iteration limit".into()));
        }
    }
    // secant refinement; falls back to bisection when the step leaves the bracket
    let (mut a, mut fa, mut b, mut fb) = (lo, flo, hi, fhi);
    while iter < opts.max_iter {
        let mut x = b - fb * (b - a) / (fb - fa);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx.abs() <= opts.tol || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
        if (fx < 0.0) == (flo < 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        a = b;
        fa = fb;
        b = x;
        fb = fx;
        iter += 1;
    }
    Err(Error::Invalid("root finding exceeded the iteration limit".into()))
}
