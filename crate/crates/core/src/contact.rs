//! The contact map between the Euler-Poisson equation and the
//! generalized Hunter-Saxton equation.
//!
//! With `s = t + x`, the map `Ψ: (t, x, u, u_t, u_x) ↦ (t̃, x̃, ũ, ũ_t̃, ũ_x̃)` is
//!
//! ```text
//! ũ   = s^{−1/κ} (κ s u_x + (κ−1) u)
//! t̃   = t/κ
//! x̃   = −s^{(κ−1)/κ} (κ s u_x − u)
//! ũ_t̃ = κ² s^{−1/κ} (u_t − u_x)
//! ũ_x̃ = −1/s
//! ```
//!
//! It pulls the contact form `dũ − ũ_t̃ dt̃ − ũ_x̃ dx̃` back to
//! `κ s^{−1/κ} (du − u_t dt − u_x dx)`.

use serde::Serialize;

use crate::fields::{Point, ScalarField};
use crate::laplace::{parametric_hs_solution, AntiderivativeMode, SolutionSpec};
use crate::roots::{expand_bracket, solve_bracketed, RootOptions};
use crate::{Error, Result};

pub use crate::fields::Jet1;

/// Step of the finite-difference cross-check of the Jacobian.
pub const JACOBIAN_FD_STEP: f64 = 1e-6;

const POLISH_STEPS: usize = 2;

/// Point `(t̃, x̃, ũ, ũ_t̃, ũ_x̃)` of the Hunter-Saxton 1-jet space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TildedJet1 {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
}

impl TildedJet1 {
    pub fn new(t: f64, x: f64, u: f64, u_t: f64, u_x: f64) -> Self {
        TildedJet1 { t, x, u, u_t, u_x }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.t, self.x, self.u, self.u_t, self.u_x]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        TildedJet1::new(a[0], a[1], a[2], a[3], a[4])
    }
}

fn check(kappa: f64, j: &Jet1) -> Result<f64> {
    if kappa == 0.0 {
        return Err(Error::ZeroKappa);
    }
    j.point().require_positive_sum()
}

/// Applies Ψ.
pub fn psi_forward(j: &Jet1, kappa: f64) -> Result<TildedJet1> {
    let s = check(kappa, j)?;
    let inv_pow = s.powf(-1.0 / kappa);
    Ok(TildedJet1 {
        t: j.t / kappa,
        x: -s.powf((kappa - 1.0) / kappa) * (kappa * s * j.u_x - j.u),
        u: inv_pow * (kappa * s * j.u_x + (kappa - 1.0) * j.u),
        u_t: kappa * kappa * inv_pow * (j.u_t - j.u_x),
        u_x: -1.0 / s,
    })
}

/// Inverse of Ψ, defined where `ũ_x̃ < 0`:
///
/// ```text
/// s = −1/ũ_x̃,  t = κt̃,  x = s − t
/// u   = (ũ s^{1/κ} + x̃ s^{(1−κ)/κ}) / κ
/// u_x = (u − x̃ s^{(1−κ)/κ}) / (κ s)
/// u_t = u_x + ũ_t̃ s^{1/κ} / κ²
/// ```
pub fn psi_inverse(j: &TildedJet1, kappa: f64) -> Result<Jet1> {
    if kappa == 0.0 {
        return Err(Error::ZeroKappa);
    }
    if !(j.u_x < 0.0) {
        return Err(Error::OutsideImage(format!("ũ_x̃ = {} must be negative", j.u_x)));
    }
    let s = -1.0 / j.u_x;
    let t = kappa * j.t;
    let pow = s.powf(1.0 / kappa);
    let pow_minus = pow / s;
    let u = (j.u * pow + j.x * pow_minus) / kappa;
    let u_x = (u - j.x * pow_minus) / (kappa * s);
    let u_t = u_x + j.u_t * pow / (kappa * kappa);
    Ok(Jet1 { t, x: s - t, u, u_t, u_x })
}

/// Jacobian of Ψ: row `i` holds the partials of the `i`-th output
/// `(t̃, x̃, ũ, ũ_t̃, ũ_x̃)` with respect to `(t, x, u, u_t, u_x)`.
pub type Jacobian = [[f64; 5]; 5];

/// How [`pullback_check`] obtains the partials of Ψ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Partials {
    Exact,
    /// Central differences with the given step.
    FiniteDifference(f64),
}

pub fn psi_jacobian(j: &Jet1, kappa: f64) -> Result<Jacobian> {
    let s = check(kappa, j)?;
    let p = 1.0 / kappa;
    let sp = s.powf(-p);
    let (u, u_t, u_x) = (j.u, j.u_t, j.u_x);
    // ũ = κ u_x s^{1−p} + (κ−1) u s^{−p}
    let du_ds = kappa * u_x * (1.0 - p) * sp - (kappa - 1.0) * u * p * sp / s;
    // x̃ = −κ u_x s^{2−p} + u s^{1−p}
    let dx_ds = -kappa * u_x * (2.0 - p) * s * sp + u * (1.0 - p) * sp;
    let dut_ds = -kappa * kappa * p * sp / s * (u_t - u_x);
    let dux_ds = 1.0 / (s * s);
    Ok([
        [p, 0.0, 0.0, 0.0, 0.0],
        [dx_ds, dx_ds, s * sp, 0.0, -kappa * s * s * sp],
        [du_ds, du_ds, (kappa - 1.0) * sp, 0.0, kappa * s * sp],
        [dut_ds, dut_ds, 0.0, kappa * kappa * sp, -kappa * kappa * sp],
        [dux_ds, dux_ds, 0.0, 0.0, 0.0],
    ])
}

/// Jacobian of Ψ by central differences with step `h`.
pub fn psi_jacobian_fd(j: &Jet1, kappa: f64, h: f64) -> Result<Jacobian> {
    check(kappa, j)?;
    let base = j.to_array();
    let mut jac = [[0.0; 5]; 5];
    for col in 0..5 {
        let mut plus = base;
        let mut minus = base;
        plus[col] += h;
        minus[col] -= h;
        let fp = psi_forward(&Jet1::from_array(plus), kappa)?.to_array();
        let fm = psi_forward(&Jet1::from_array(minus), kappa)?.to_array();
        for row in 0..5 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Result of pulling the contact form back along Ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackCheck {
    /// Coefficients of the pulled-back form on `(dt, dx, du, du_t, du_x)`.
    pub coefficients: [f64; 5],
    /// The `du` coefficient, the conformal factor of the contact form.
    pub lambda: f64,
    /// Largest deviation of `coefficients` from `λ·(−u_t, −u_x, 1, 0, 0)`.
    pub max_coeff_residual: f64,
}

/// Pulls `dũ − ũ_t̃ dt̃ − ũ_x̃ dx̃` back along Ψ and compares the result
/// with a multiple of `du − u_t dt − u_x dx`.
pub fn pullback_check(j: &Jet1, kappa: f64, partials: Partials) -> Result<PullbackCheck> {
    let image = psi_forward(j, kappa)?;
    let jac = match partials {
        Partials::Exact => psi_jacobian(j, kappa)?,
        Partials::FiniteDifference(h) => psi_jacobian_fd(j, kappa, h)?,
    };
    let coefficients: [f64; 5] =
        std::array::from_fn(|c| jac[2][c] - image.u_t * jac[0][c] - image.u_x * jac[1][c]);
    let lambda = coefficients[2];
    let expected = [-lambda * j.u_t, -lambda * j.u_x, lambda, 0.0, 0.0];
    let max_coeff_residual = coefficients
        .iter()
        .zip(expected)
        .map(|(c, e)| (c - e).abs())
        .fold(0.0, f64::max);
    Ok(PullbackCheck { coefficients, lambda, max_coeff_residual })
}

/// Controls for turning the parametric Hunter-Saxton solution into an
/// explicit function `ũ(t̃, x̃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionControls {
    /// Initial bracket in `x` for the root search.
    pub x_range: (f64, f64),
    pub bracket_factor: f64,
    pub max_expansions: usize,
    pub root_tol: f64,
    pub max_iter: usize,
    /// Samples of `R` used to check it keeps one sign on `x_range`.
    pub sign_samples: usize,
}

impl Default for InversionControls {
    fn default() -> Self {
        InversionControls {
            x_range: (0.5, 2.0),
            bracket_factor: 1.6,
            max_expansions: 60,
            root_tol: 1e-12,
            max_iter: 200,
            sign_samples: 64,
        }
    }
}

/// Explicit Hunter-Saxton solution obtained by inverting
/// `x ↦ x̃(t, x) = −κ(S(t) + A₁(t, x))` at fixed `t = κt̃`.
#[derive(Debug, Clone)]
pub struct PushforwardSolution {
    spec: SolutionSpec,
    controls: InversionControls,
}

impl PushforwardSolution {
    /// Rejects specs whose `R` vanishes or changes sign on the working
    /// interval, since then `∂x̃/∂x = −κR(x)(t+x)^{1/κ}` does too.
    pub fn new(spec: SolutionSpec, controls: InversionControls) -> Result<Self> {
        let (lo, hi) = controls.x_range;
        if !(lo < hi) || controls.sign_samples < 2 {
            return Err(Error::Invalid(format!("bad inversion interval [{lo}, {hi}]")));
        }
        if !(controls.bracket_factor > 1.0) || !(controls.root_tol > 0.0) {
            return Err(Error::Invalid("bracket factor must exceed 1 and root tolerance be positive".into()));
        }
        let n = controls.sign_samples;
        let mut sign = 0.0;
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let r = spec.r_value(x)?;
            if r == 0.0 || (sign != 0.0 && r.signum() != sign) {
                return Err(Error::Degenerate(format!(
                    "R must keep one sign on [{lo}, {hi}]; R({x}) = {r}"
                )));
            }
            sign = r.signum();
        }
        Ok(PushforwardSolution { spec, controls })
    }

    pub fn spec(&self) -> &SolutionSpec {
        &self.spec
    }

    pub fn controls(&self) -> &InversionControls {
        &self.controls
    }

    /// Recovers the parameter `x` with `x̃(κt̃, x) = x̃`.
    pub fn recover_x(&self, t_tilde: f64, x_tilde: f64) -> Result<f64> {
        let t = self.spec.kappa() * t_tilde;
        let floor = -t;
        if let AntiderivativeMode::BasePoint(x0) = self.spec.mode() {
            Point::new(t, x0).require_positive_sum()?;
        }
        let (mut lo, hi) = self.controls.x_range;
        if lo <= floor {
            lo = floor + 0.5 * (hi - floor).min(1.0);
        }
        if !(hi > lo) {
            return Err(Error::OutOfRange {
                target: x_tilde,
                reason: format!("working interval lies beyond t + x > 0 at t = {t}"),
            });
        }
        let mismatch = |x: f64| -> Result<f64> {
            Ok(parametric_hs_solution(&self.spec, Point::new(t, x))?.x_tilde - x_tilde)
        };
        let bracket = expand_bracket(
            &mismatch,
            lo,
            hi,
            Some(floor),
            self.controls.bracket_factor,
            self.controls.max_expansions,
        )?;
        let Some((a, b, fa, fb)) = bracket else {
            return Err(Error::OutOfRange {
                target: x_tilde,
                reason: format!("no x with x̃(t = {t}, x) = {x_tilde} found by bracket expansion"),
            });
        };
        let opts = RootOptions { tol: self.controls.root_tol, max_iter: self.controls.max_iter };
        let mut x = solve_bracketed(&mismatch, a, b, fa, fb, opts)?;
        // Newton polish with ∂x̃/∂x = −κR(x)(t+x)^{1/κ}, kept inside the bracket
        let kappa = self.spec.kappa();
        for _ in 0..POLISH_STEPS {
            let slope = -kappa * self.spec.r_value(x)? * (t + x).powf(1.0 / kappa);
            let next = x - mismatch(x)? / slope;
            if !(next >= a && next <= b) || next == x {
                break;
            }
            x = next;
        }
        Ok(x)
    }

    /// `ũ(t̃, x̃)`.
    pub fn evaluate(&self, t_tilde: f64, x_tilde: f64) -> Result<f64> {
        let x = self.recover_x(t_tilde, x_tilde)?;
        let t = self.spec.kappa() * t_tilde;
        Ok(parametric_hs_solution(&self.spec, Point::new(t, x))?.u_tilde)
    }
}

pub fn pushforward_evaluate(ps: &PushforwardSolution, t_tilde: f64, x_tilde: f64) -> Result<f64> {
    ps.evaluate(t_tilde, x_tilde)
}

/// The explicit solution as a field on the `(t̃, x̃)` plane. Its points
/// carry `t̃` in `t` and `x̃` in `x`.
pub fn pushforward_field(ps: &PushforwardSolution) -> ScalarField {
    let ps = ps.clone();
    ScalarField::new(move |p| ps.evaluate(p.t, p.x))
}
