//! Adaptive Simpson quadrature for vector-valued integrands.
//!
//! Several integrals over the same interval (the antiderivative family of a
//! solution spec) share one subdivision, so the refinement test uses the
//! largest component error.

use crate::{Error, Result};

/// Deepest bisection level; at most 2^20 subintervals.
pub const MAX_DEPTH: u32 = 20;

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    fa: [f64; N],
    fm: [f64; N],
    fb: [f64; N],
    whole: [f64; N],
}

fn simpson<const N: usize>(h: f64, fa: &[f64; N], fm: &[f64; N], fb: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|k| h / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]))
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` in every
/// component. `a > b` is allowed and flips the sign.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, tol: f64) -> Result<[f64; N]>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok([0.0; N]);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = simpson(b - a, &fa, &fm, &fb);
    refine(&f, Panel { a, b, fa, fm, fb, whole }, tol, 0)
}

fn refine<const N: usize, F>(f: &F, p: Panel<N>, tol: f64, depth: u32) -> Result<[f64; N]>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let m = 0.5 * (p.a + p.b);
    let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = simpson(m - p.a, &p.fa, &flm, &p.fm);
    let right = simpson(p.b - m, &p.fm, &frm, &p.fb);

    let mut converged = true;
    let mut out = [0.0; N];
    for k in 0..N {
        let both = left[k] + right[k];
        let diff = both - p.whole[k];
        // below this the estimate is dominated by rounding
        let floor = 64.0 * f64::EPSILON * both.abs();
        if !(diff.abs() <= 15.0 * tol.max(floor)) {
            converged = false;
        }
        out[k] = both + diff / 15.0;
    }
    if converged {
        return Ok(out);
    }
    if depth + 1 >= MAX_DEPTH || !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Quadrature { a: p.a, b: p.b });
    }
    let l = refine(f, Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left }, 0.5 * tol, depth + 1)?;
    let r = refine(f, Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right }, 0.5 * tol, depth + 1)?;
    Ok(std::array::from_fn(|k| l[k] + r[k]))
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    integrate(|x| f(x).map(|v| [v]), a, b, tol).map(|[v]| v)
}
