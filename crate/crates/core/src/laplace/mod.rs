//! Linear hyperbolic equations `u_tx = T u_t + X u_x + U u`: Laplace
//! semi-invariants, Ovsiannikov invariants, the Laplace cascade of the
//! Euler-Poisson family and its closed-form general solutions.

mod cascade;
mod solution;

use std::sync::Arc;

use crate::exprlang::{Env, Expr};
use crate::fields::{Grid, Jet2, Point, Residual};
use crate::{Error, Result};

pub use cascade::{cascade_v_field, cascade_w_field, u_to_v, v_to_u, v_to_w, w_ode_residual, DEFAULT_STEP};
pub use solution::{
    antiderivative_pair, general_solution_u, general_solution_v, parametric_hs_solution, AntiderivativeMode,
    HsPoint, SolutionSpec, DEFAULT_QUAD_TOL,
};

type CoeffFn = Arc<dyn Fn(Point) -> Result<f64> + Send + Sync>;

/// Base step of the nested central difference for `(ln|H|)_tx` when no
/// closed form is available. It is scaled by the local length `|H|^{-1/2}`.
pub const LOG_H_STEP: f64 = 1e-4;

/// Coefficients `(T, X, U)` with exact `T_t` and `X_x`, and optionally
/// the exact mixed partial `(ln|H|)_tx`.
#[derive(Clone)]
pub struct HyperbolicCoeffs {
    label: String,
    kappa: f64,
    c_t: CoeffFn,
    c_x: CoeffFn,
    c_u: CoeffFn,
    c_t_t: CoeffFn,
    c_x_x: CoeffFn,
    log_h_tx: Option<CoeffFn>,
    positive_sum: bool,
}

impl std::fmt::Debug for HyperbolicCoeffs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HyperbolicCoeffs")
            .field("label", &self.label)
            .field("kappa", &self.kappa)
            .field("exact_log_h_tx", &self.log_h_tx.is_some())
            .finish()
    }
}

/// Pointwise Laplace semi-invariants `H = −T_t + TX + U`, `K = −X_x + TX + U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiInvariants {
    pub h: f64,
    pub k: f64,
}

/// `P = K/H`, `Q = (ln|H|)_tx / H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvsiannikovInvariants {
    pub p: f64,
    pub q: f64,
}

fn require_kappa(kappa: f64) -> Result<()> {
    if kappa == 0.0 {
        Err(Error::ZeroKappa)
    } else if !kappa.is_finite() {
        Err(Error::Invalid(format!("kappa must be finite, got {kappa}")))
    } else {
        Ok(())
    }
}

/// `c / (κ s)^power`-type coefficient on the half-plane `t + x > 0`.
fn sum_coeff(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> CoeffFn {
    Arc::new(move |p: Point| p.require_positive_sum().map(&f))
}

impl HyperbolicCoeffs {
    /// Generic coefficients from closures: `T`, `X`, `U`, `∂T/∂t`, `∂X/∂x`.
    pub fn new(
        label: &str,
        c_t: impl Fn(Point) -> Result<f64> + Send + Sync + 'static,
        c_x: impl Fn(Point) -> Result<f64> + Send + Sync + 'static,
        c_u: impl Fn(Point) -> Result<f64> + Send + Sync + 'static,
        c_t_t: impl Fn(Point) -> Result<f64> + Send + Sync + 'static,
        c_x_x: impl Fn(Point) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        HyperbolicCoeffs {
            label: label.to_string(),
            kappa: f64::NAN,
            c_t: Arc::new(c_t),
            c_x: Arc::new(c_x),
            c_u: Arc::new(c_u),
            c_t_t: Arc::new(c_t_t),
            c_x_x: Arc::new(c_x_x),
            log_h_tx: None,
            positive_sum: false,
        }
    }

    /// Coefficients given as expressions in `t` and `x`; the partials
    /// `T_t`, `X_x` come from symbolic differentiation.
    pub fn from_exprs(label: &str, t: &Expr, x: &Expr, u: &Expr) -> Self {
        let eval = |e: Expr| {
            move |p: Point| {
                let env = Env::new().with("t", p.t).with("x", p.x);
                e.eval(&env).map_err(|err| Error::eval(p.t, p.x, err))
            }
        };
        Self::new(
            label,
            eval(t.clone()),
            eval(x.clone()),
            eval(u.clone()),
            eval(t.differentiate("t")),
            eval(x.differentiate("x")),
        )
    }

    pub fn with_log_h_tx(mut self, f: impl Fn(Point) -> Result<f64> + Send + Sync + 'static) -> Self {
        self.log_h_tx = Some(Arc::new(f));
        self
    }

    /// Forces `(ln|H|)_tx` onto the finite-difference path.
    pub fn without_exact_log_h_tx(mut self) -> Self {
        self.log_h_tx = None;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn t_coeff(&self, p: Point) -> Result<f64> {
        (self.c_t)(p)
    }

    pub fn x_coeff(&self, p: Point) -> Result<f64> {
        (self.c_x)(p)
    }

    pub fn u_coeff(&self, p: Point) -> Result<f64> {
        (self.c_u)(p)
    }

    pub fn t_coeff_dt(&self, p: Point) -> Result<f64> {
        (self.c_t_t)(p)
    }

    pub fn x_coeff_dx(&self, p: Point) -> Result<f64> {
        (self.c_x_x)(p)
    }

    pub fn has_exact_log_h_tx(&self) -> bool {
        self.log_h_tx.is_some()
    }

    /// `H` together with the magnitude of its largest term, which sets the
    /// scale for deciding that `H` vanishes.
    fn h_with_scale(&self, p: Point) -> Result<(f64, f64)> {
        let (t, x, u, t_t) = (self.t_coeff(p)?, self.x_coeff(p)?, self.u_coeff(p)?, self.t_coeff_dt(p)?);
        let h = -t_t + t * x + u;
        Ok((h, t_t.abs().max((t * x).abs()).max(u.abs())))
    }
}

/// Coefficients of the Euler-Poisson equation:
/// `T = 1/(κs)`, `X = 2(1−κ)/(κs)`, `U = −2(1−κ)/(κs)²` with `s = t + x`.
pub fn ep_coeffs(kappa: f64) -> Result<HyperbolicCoeffs> {
    require_kappa(kappa)?;
    let k = kappa;
    Ok(HyperbolicCoeffs {
        label: "euler-poisson".into(),
        kappa,
        c_t: sum_coeff(move |s| 1.0 / (k * s)),
        c_x: sum_coeff(move |s| 2.0 * (1.0 - k) / (k * s)),
        c_u: sum_coeff(move |s| -2.0 * (1.0 - k) / ((k * s) * (k * s))),
        c_t_t: sum_coeff(move |s| -1.0 / (k * s * s)),
        c_x_x: sum_coeff(move |s| -2.0 * (1.0 - k) / (k * s * s)),
        log_h_tx: Some(sum_coeff(|s| 2.0 / (s * s))),
        positive_sum: true,
    })
}

/// Coefficients of the equation satisfied by `v = u_x − u/(κs)`:
/// `T = (1−2κ)/(κs)`, `X = 2(1−κ)/(κs)`, `U = −(2κ−1)(κ−2)/(κs)²`.
/// Its semi-invariant `H` vanishes identically.
pub fn ep_trans_coeffs(kappa: f64) -> Result<HyperbolicCoeffs> {
    require_kappa(kappa)?;
    let k = kappa;
    Ok(HyperbolicCoeffs {
        label: "euler-poisson-transformed".into(),
        kappa,
        c_t: sum_coeff(move |s| (1.0 - 2.0 * k) / (k * s)),
        c_x: sum_coeff(move |s| 2.0 * (1.0 - k) / (k * s)),
        c_u: sum_coeff(move |s| -(2.0 * k - 1.0) * (k - 2.0) / ((k * s) * (k * s))),
        c_t_t: sum_coeff(move |s| -(1.0 - 2.0 * k) / (k * s * s)),
        c_x_x: sum_coeff(move |s| -2.0 * (1.0 - k) / (k * s * s)),
        log_h_tx: None,
        positive_sum: true,
    })
}

pub fn semi_invariants(c: &HyperbolicCoeffs, p: Point) -> Result<SemiInvariants> {
    let (t, x, u) = (c.t_coeff(p)?, c.x_coeff(p)?, c.u_coeff(p)?);
    let (t_t, x_x) = (c.t_coeff_dt(p)?, c.x_coeff_dx(p)?);
    Ok(SemiInvariants { h: -t_t + t * x + u, k: -x_x + t * x + u })
}

fn vanishes(h: f64, scale: f64) -> bool {
    h.abs() <= 64.0 * f64::EPSILON * scale
}

/// `(ln|H|)_tx` by the four-corner central difference, written as the
/// log of a ratio so that rounding does not scale with `|ln|H||`.
fn log_h_tx_numeric(c: &HyperbolicCoeffs, p: Point, h_at_p: f64) -> Result<f64> {
    let step = LOG_H_STEP / h_at_p.abs().sqrt();
    let h_at = |dt: f64, dx: f64| -> Result<f64> {
        let q = Point::new(p.t + dt * step, p.x + dx * step);
        let (h, scale) = c.h_with_scale(q)?;
        if vanishes(h, scale) {
            Err(Error::VanishingH { t: q.t, x: q.x })
        } else {
            Ok(h.abs())
        }
    };
    let ratio = (h_at(1.0, 1.0)? * h_at(-1.0, -1.0)?) / (h_at(1.0, -1.0)? * h_at(-1.0, 1.0)?);
    Ok(ratio.ln() / (4.0 * step * step))
}

/// Ovsiannikov invariants at `p`. Fails with [`Error::VanishingH`] where
/// `H = 0`.
pub fn ovsiannikov(c: &HyperbolicCoeffs, p: Point) -> Result<OvsiannikovInvariants> {
    let SemiInvariants { h, k } = semi_invariants(c, p)?;
    let (_, scale) = c.h_with_scale(p)?;
    if vanishes(h, scale) {
        return Err(Error::VanishingH { t: p.t, x: p.x });
    }
    let log_h_tx = match &c.log_h_tx {
        Some(f) => f(p)?,
        None => log_h_tx_numeric(c, p, h)?,
    };
    Ok(OvsiannikovInvariants { p: k / h, q: log_h_tx / h })
}

impl Residual for HyperbolicCoeffs {
    fn equation(&self) -> String {
        self.label.clone()
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn check_domain(&self, grid: &Grid, h: f64) -> Result<()> {
        if self.positive_sum {
            grid.require_positive_sum(h)
        } else {
            Ok(())
        }
    }

    fn residual(&self, j: &Jet2) -> Result<f64> {
        let p = j.point();
        Ok(j.u_tx - self.t_coeff(p)? * j.u_t - self.x_coeff(p)? * j.u_x - self.u_coeff(p)? * j.u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;

    const KAPPAS: [f64; 5] = [-1.0, 0.5, 1.0, 2.0, 5.0];

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ep_coefficient_values() {
        let p = Point::new(1.0, 1.0);
        let c = ep_coeffs(0.5).unwrap();
        assert_eq!((c.t_coeff(p).unwrap(), c.x_coeff(p).unwrap(), c.u_coeff(p).unwrap()), (1.0, 1.0, -1.0));
        let c = ep_coeffs(1.0).unwrap();
        assert_eq!((c.t_coeff(p).unwrap(), c.x_coeff(p).unwrap(), c.u_coeff(p).unwrap()), (0.5, 0.0, 0.0));
        assert!(matches!(ep_coeffs(0.0), Err(Error::ZeroKappa)));
        assert!(matches!(ep_trans_coeffs(0.0), Err(Error::ZeroKappa)));
        assert!(matches!(c.t_coeff(Point::new(1.0, -2.0)), Err(Error::Singular { .. })));
    }

    #[test]
    fn exact_partials_match_differences() {
        let h = 1e-5;
        for kappa in KAPPAS {
            for c in [ep_coeffs(kappa).unwrap(), ep_trans_coeffs(kappa).unwrap()] {
                let p = Point::new(0.7, 1.6);
                let fd_t = (c.t_coeff(Point::new(p.t + h, p.x)).unwrap() - c.t_coeff(Point::new(p.t - h, p.x)).unwrap()) / (2.0 * h);
                let fd_x = (c.x_coeff(Point::new(p.t, p.x + h)).unwrap() - c.x_coeff(Point::new(p.t, p.x - h)).unwrap()) / (2.0 * h);
                assert!(close(fd_t, c.t_coeff_dt(p).unwrap(), 1e-8));
                assert!(close(fd_x, c.x_coeff_dx(p).unwrap(), 1e-8));
            }
        }
    }

    #[test]
    fn semi_invariant_values() {
        let p = Point::new(1.0, 1.0);
        let si = semi_invariants(&ep_coeffs(0.5).unwrap(), p).unwrap();
        assert!(close(si.h, 0.5, 1e-15) && close(si.k, 0.5, 1e-15));
        let si = semi_invariants(&ep_coeffs(2.0).unwrap(), p).unwrap();
        assert!(close(si.h, 0.125, 1e-15) && close(si.k, -0.25, 1e-15));
        let zero = parse("0").unwrap();
        let wave = HyperbolicCoeffs::from_exprs("wave", &zero, &zero, &zero);
        assert_eq!(semi_invariants(&wave, p).unwrap(), SemiInvariants { h: 0.0, k: 0.0 });
    }

    #[test]
    fn closed_form_semi_invariants() {
        // H = 1/(κs²), K = 2(1−κ)/(κs²)
        for kappa in KAPPAS {
            for &(t, x) in &[(0.2, 0.3), (1.0, 4.0), (-2.0, 9.5)] {
                let s: f64 = t + x;
                let si = semi_invariants(&ep_coeffs(kappa).unwrap(), Point::new(t, x)).unwrap();
                assert!(close(si.h, 1.0 / (kappa * s * s), 1e-13 * si.h.abs().max(1.0)));
                assert!(close(si.k, 2.0 * (1.0 - kappa) / (kappa * s * s), 1e-13 * si.h.abs().max(1.0)));
            }
        }
    }

    #[test]
    fn invariants_of_the_family() {
        let p = Point::new(0.4, 1.9);
        for (kappa, want_p, want_q) in [(0.5, 1.0, 1.0), (2.0, -2.0, 4.0), (1.0, 0.0, 2.0)] {
            let inv = ovsiannikov(&ep_coeffs(kappa).unwrap(), p).unwrap();
            assert!(close(inv.p, want_p, 1e-12), "{kappa}: {inv:?}");
            assert!(close(inv.q, want_q, 1e-12), "{kappa}: {inv:?}");
        }
    }

    #[test]
    fn numeric_q_agrees_with_closed_form() {
        for kappa in KAPPAS {
            let c = ep_coeffs(kappa).unwrap().without_exact_log_h_tx();
            for &(t, x) in &[(0.05, 0.05), (1.0, 1.0), (3.0, 7.0), (-4.0, 4.2)] {
                let inv = ovsiannikov(&c, Point::new(t, x)).unwrap();
                assert!(close(inv.q, 2.0 * kappa, 1e-5), "κ={kappa} ({t},{x}) q={}", inv.q);
            }
        }
    }

    #[test]
    fn vanishing_h_is_a_distinct_error() {
        let zero = parse("0").unwrap();
        let wave = HyperbolicCoeffs::from_exprs("wave", &zero, &zero, &zero);
        assert!(matches!(ovsiannikov(&wave, Point::new(1.0, 1.0)), Err(Error::VanishingH { .. })));
        for kappa in [-1.0, 0.5, 2.0] {
            let c = ep_trans_coeffs(kappa).unwrap();
            assert!(matches!(ovsiannikov(&c, Point::new(0.3, 0.9)), Err(Error::VanishingH { .. })));
        }
    }

    #[test]
    fn transformed_equation_exchanges_invariants() {
        for kappa in [-1.0, 0.5, 2.0] {
            for &(t, x) in &[(1.0, 1.0), (0.1, 0.3), (2.0, 5.0)] {
                let p = Point::new(t, x);
                let tr = semi_invariants(&ep_trans_coeffs(kappa).unwrap(), p).unwrap();
                let ep = semi_invariants(&ep_coeffs(kappa).unwrap(), p).unwrap();
                assert!(tr.h.abs() <= 1e-12);
                assert!(close(tr.k, ep.h, 1e-10));
            }
        }
        let p = Point::new(1.0, 1.0);
        let c = ep_trans_coeffs(0.5).unwrap();
        assert_eq!(c.t_coeff(p).unwrap(), 0.0);
        assert_eq!(c.u_coeff(p).unwrap(), 0.0);
        assert!(close(semi_invariants(&c, p).unwrap().k, 0.5, 1e-15));
    }

    #[test]
    fn generic_coefficients_use_symbolic_partials() {
        let c = HyperbolicCoeffs::from_exprs(
            "generic",
            &parse("t^2*x").unwrap(),
            &parse("sin(x) + t").unwrap(),
            &parse("1").unwrap(),
        );
        let p = Point::new(0.5, 2.0);
        assert_eq!(c.t_coeff_dt(p).unwrap(), 2.0 * 0.5 * 2.0);
        assert_eq!(c.x_coeff_dx(p).unwrap(), 2f64.cos());
        let si = semi_invariants(&c, p).unwrap();
        let tx = 0.25 * 2.0 * (2f64.sin() + 0.5);
        assert!(close(si.h, -2.0 + tx + 1.0, 1e-15));
        assert!(close(si.k, -(2f64.cos()) + tx + 1.0, 1e-15));
    }
}
