//! Scalar fields on the `(t, x)` plane, jets, finite-difference jet
//! extraction and the residual operators of the two equations.
//!
//! Residuals follow one sign convention: left-hand side minus right-hand
//! side of the equation as usually displayed.

mod verify;

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::Serialize;

use crate::exprlang::{Env, Expr};
use crate::{Error, Result};

pub use verify::{grid_verify, Grid, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub t: f64,
    pub x: f64,
}

impl Point {
    pub fn new(t: f64, x: f64) -> Self {
        Point { t, x }
    }

    /// `t + x`, the variable all coefficients of the Euler-Poisson family
    /// depend on.
    pub fn sum(self) -> f64 {
        self.t + self.x
    }

    /// Rejects points off the half-plane `t + x > 0`.
    pub fn require_positive_sum(self) -> Result<f64> {
        let s = self.sum();
        if s > 0.0 {
            Ok(s)
        } else {
            Err(Error::Singular { t: self.t, x: self.x })
        }
    }
}

/// Point of 1-jet space: `(t, x, u, u_t, u_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet1 {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
}

impl Jet1 {
    pub fn new(t: f64, x: f64, u: f64, u_t: f64, u_x: f64) -> Self {
        Jet1 { t, x, u, u_t, u_x }
    }

    pub fn point(&self) -> Point {
        Point::new(self.t, self.x)
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.t, self.x, self.u, self.u_t, self.u_x]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Jet1::new(a[0], a[1], a[2], a[3], a[4])
    }
}

/// Second-order jet of a scalar field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet2 {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub u_tt: f64,
    pub u_tx: f64,
    pub u_xx: f64,
}

impl Jet2 {
    pub fn point(&self) -> Point {
        Point::new(self.t, self.x)
    }

    pub fn first(&self) -> Jet1 {
        Jet1::new(self.t, self.x, self.u, self.u_t, self.u_x)
    }

    fn entries(&self) -> [f64; 6] {
        [self.u, self.u_t, self.u_x, self.u_tt, self.u_tx, self.u_xx]
    }
}

/// Truncated second-order Taylor data of a function of `(t, x)`: value,
/// gradient and Hessian. Closed under the ring operations, which is all
/// the exact-partial assembly of the solution formulas needs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Taylor2 {
    pub v: f64,
    pub t: f64,
    pub x: f64,
    pub tt: f64,
    pub tx: f64,
    pub xx: f64,
}

impl Taylor2 {
    pub fn constant(c: f64) -> Self {
        Taylor2 { v: c, ..Default::default() }
    }

    /// A function of `t` alone with derivatives `d1`, `d2`.
    pub fn of_t(v: f64, d1: f64, d2: f64) -> Self {
        Taylor2 { v, t: d1, tt: d2, ..Default::default() }
    }

    /// `g(t + x)` with `g' = d1`, `g'' = d2`.
    pub fn of_sum(v: f64, d1: f64, d2: f64) -> Self {
        Taylor2 { v, t: d1, x: d1, tt: d2, tx: d2, xx: d2 }
    }

    /// `(t + x)^alpha` at `t + x = s`.
    pub fn sum_power(s: f64, alpha: f64) -> Self {
        Self::of_sum(
            s.powf(alpha),
            alpha * s.powf(alpha - 1.0),
            alpha * (alpha - 1.0) * s.powf(alpha - 2.0),
        )
    }

    pub fn scale(self, c: f64) -> Self {
        Taylor2 {
            v: c * self.v,
            t: c * self.t,
            x: c * self.x,
            tt: c * self.tt,
            tx: c * self.tx,
            xx: c * self.xx,
        }
    }

    pub fn at(self, p: Point) -> Jet2 {
        Jet2 {
            t: p.t,
            x: p.x,
            u: self.v,
            u_t: self.t,
            u_x: self.x,
            u_tt: self.tt,
            u_tx: self.tx,
            u_xx: self.xx,
        }
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;

    fn add(self, o: Taylor2) -> Taylor2 {
        Taylor2 {
            v: self.v + o.v,
            t: self.t + o.t,
            x: self.x + o.x,
            tt: self.tt + o.tt,
            tx: self.tx + o.tx,
            xx: self.xx + o.xx,
        }
    }
}

impl Neg for Taylor2 {
    type Output = Taylor2;

    fn neg(self) -> Taylor2 {
        self.scale(-1.0)
    }
}

impl Sub for Taylor2 {
    type Output = Taylor2;

    fn sub(self, o: Taylor2) -> Taylor2 {
        self + (-o)
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;

    fn mul(self, o: Taylor2) -> Taylor2 {
        Taylor2 {
            v: self.v * o.v,
            t: self.t * o.v + self.v * o.t,
            x: self.x * o.v + self.v * o.x,
            tt: self.tt * o.v + 2.0 * self.t * o.t + self.v * o.tt,
            tx: self.tx * o.v + self.t * o.x + self.x * o.t + self.v * o.tx,
            xx: self.xx * o.v + 2.0 * self.x * o.x + self.v * o.xx,
        }
    }
}

pub type ValueFn = Arc<dyn Fn(Point) -> Result<f64> + Send + Sync>;
pub type Jet1Fn = Arc<dyn Fn(Point) -> Result<Jet1> + Send + Sync>;
pub type Jet2Fn = Arc<dyn Fn(Point) -> Result<Jet2> + Send + Sync>;

/// Exact partial derivatives a field may carry.
#[derive(Clone)]
pub enum ExactPartials {
    First(Jet1Fn),
    Second(Jet2Fn),
}

/// A scalar field `u(t, x)`, optionally with exact partials.
#[derive(Clone)]
pub struct ScalarField {
    value: ValueFn,
    exact: Option<ExactPartials>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let exact = match self.exact {
            None => "none",
            Some(ExactPartials::First(_)) => "first",
            Some(ExactPartials::Second(_)) => "second",
        };
        f.debug_struct("ScalarField").field("exact", &exact).finish()
    }
}

impl ScalarField {
    pub fn new(value: impl Fn(Point) -> Result<f64> + Send + Sync + 'static) -> Self {
        ScalarField { value: Arc::new(value), exact: None }
    }

    pub fn with_exact_first(mut self, jet: impl Fn(Point) -> Result<Jet1> + Send + Sync + 'static) -> Self {
        self.exact = Some(ExactPartials::First(Arc::new(jet)));
        self
    }

    pub fn with_exact_second(mut self, jet: impl Fn(Point) -> Result<Jet2> + Send + Sync + 'static) -> Self {
        self.exact = Some(ExactPartials::Second(Arc::new(jet)));
        self
    }

    /// Field whose value and second-order partials all come from one
    /// closure. Values are taken from the jet.
    pub fn from_jet_fn(jet: impl Fn(Point) -> Result<Jet2> + Send + Sync + 'static) -> Self {
        let jet: Jet2Fn = Arc::new(jet);
        let value_jet = jet.clone();
        ScalarField {
            value: Arc::new(move |p| value_jet(p).map(|j| j.u)),
            exact: Some(ExactPartials::Second(jet)),
        }
    }

    /// Field given by an expression in the variables `t_var`, `x_var`,
    /// with exact partials by symbolic differentiation.
    pub fn from_expr(e: &Expr, t_var: &str, x_var: &str) -> Self {
        let d_t = e.differentiate(t_var);
        let d_x = e.differentiate(x_var);
        let parts = Arc::new([
            e.clone(),
            d_t.clone(),
            d_x.clone(),
            d_t.differentiate(t_var),
            d_t.differentiate(x_var),
            d_x.differentiate(x_var),
        ]);
        let (tv, xv) = (t_var.to_string(), x_var.to_string());
        Self::from_jet_fn(move |p| {
            let env = Env::new().with(&tv, p.t).with(&xv, p.x);
            let mut vals = [0.0; 6];
            for (slot, part) in vals.iter_mut().zip(parts.iter()) {
                *slot = part.eval(&env).map_err(|e| Error::eval(p.t, p.x, e))?;
            }
            Ok(Jet2 {
                t: p.t,
                x: p.x,
                u: vals[0],
                u_t: vals[1],
                u_x: vals[2],
                u_tt: vals[3],
                u_tx: vals[4],
                u_xx: vals[5],
            })
        })
    }

    pub fn eval(&self, p: Point) -> Result<f64> {
        let v = (self.value)(p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { t: p.t, x: p.x, value: v })
        }
    }

    pub fn exact(&self) -> Option<&ExactPartials> {
        self.exact.as_ref()
    }

    /// The same field with its exact partials dropped, so that every
    /// derivative is taken by finite differences.
    pub fn without_exact(&self) -> Self {
        ScalarField { value: self.value.clone(), exact: None }
    }

    /// First-order jet: exact when available, central differences otherwise.
    pub fn jet1(&self, p: Point, h: f64) -> Result<Jet1> {
        match &self.exact {
            Some(ExactPartials::First(f)) => f(p),
            Some(ExactPartials::Second(f)) => f(p).map(|j| j.first()),
            None => {
                check_step(h)?;
                let u = self.eval(p)?;
                let u_t = (self.eval(Point::new(p.t + h, p.x))? - self.eval(Point::new(p.t - h, p.x))?) / (2.0 * h);
                let u_x = (self.eval(Point::new(p.t, p.x + h))? - self.eval(Point::new(p.t, p.x - h))?) / (2.0 * h);
                Ok(Jet1::new(p.t, p.x, u, u_t, u_x))
            }
        }
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("finite-difference step must be positive, got {h}")))
    }
}

/// Second-order central differences on the 9-point stencil around `p`.
/// Ignores any exact partials the field carries.
pub fn fd_jet_numeric(f: &ScalarField, p: Point, h: f64) -> Result<Jet2> {
    check_step(h)?;
    let at = |dt: f64, dx: f64| f.eval(Point::new(p.t + dt * h, p.x + dx * h));
    let c = at(0.0, 0.0)?;
    let (tp, tm) = (at(1.0, 0.0)?, at(-1.0, 0.0)?);
    let (xp, xm) = (at(0.0, 1.0)?, at(0.0, -1.0)?);
    let (pp, pm, mp, mm) = (at(1.0, 1.0)?, at(1.0, -1.0)?, at(-1.0, 1.0)?, at(-1.0, -1.0)?);
    let h2 = h * h;
    Ok(Jet2 {
        t: p.t,
        x: p.x,
        u: c,
        u_t: (tp - tm) / (2.0 * h),
        u_x: (xp - xm) / (2.0 * h),
        u_tt: (tp - 2.0 * c + tm) / h2,
        u_tx: (pp - pm - mp + mm) / (4.0 * h2),
        u_xx: (xp - 2.0 * c + xm) / h2,
    })
}

/// Jet of `f` at `p`: exact partials where the field provides them,
/// central differences with step `h` for the rest.
pub fn fd_jet(f: &ScalarField, p: Point, h: f64) -> Result<Jet2> {
    let jet = match &f.exact {
        Some(ExactPartials::Second(exact)) => exact(p)?,
        Some(ExactPartials::First(exact)) => {
            let first = exact(p)?;
            let numeric = fd_jet_numeric(f, p, h)?;
            Jet2 { u: first.u, u_t: first.u_t, u_x: first.u_x, ..numeric }
        }
        None => fd_jet_numeric(f, p, h)?,
    };
    match jet.entries().into_iter().find(|v| !v.is_finite()) {
        Some(value) => Err(Error::NonFinite { t: p.t, x: p.x, value }),
        None => Ok(jet),
    }
}

/// A residual operator of a second-order scalar equation.
pub trait Residual: Sync {
    /// Short label used in reports.
    fn equation(&self) -> String;
    fn kappa(&self) -> f64;
    /// Rejects grids whose stencils (step `h`) would touch a singular set.
    fn check_domain(&self, grid: &Grid, h: f64) -> Result<()>;
    fn residual(&self, j: &Jet2) -> Result<f64>;
}

/// `u_tx − u·u_xx − κ·u_x²`.
pub fn residual_hs(j: &Jet2, kappa: f64) -> f64 {
    j.u_tx - j.u * j.u_xx - kappa * j.u_x * j.u_x
}

/// The coefficient triple `(T, X, U)` of the Euler-Poisson equation at
/// `t + x = s`.
pub(crate) fn ep_coefficients(kappa: f64, s: f64) -> (f64, f64, f64) {
    let ks = kappa * s;
    (1.0 / ks, 2.0 * (1.0 - kappa) / ks, -2.0 * (1.0 - kappa) / (ks * ks))
}

/// `u_tx − T u_t − X u_x − U u` with the Euler-Poisson coefficients.
pub fn residual_ep(j: &Jet2, kappa: f64) -> Result<f64> {
    if kappa == 0.0 {
        return Err(Error::ZeroKappa);
    }
    let s = j.point().require_positive_sum()?;
    let (c_t, c_x, c_u) = ep_coefficients(kappa, s);
    Ok(j.u_tx - c_t * j.u_t - c_x * j.u_x - c_u * j.u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HunterSaxton {
    pub kappa: f64,
}

impl Residual for HunterSaxton {
    fn equation(&self) -> String {
        "hunter-saxton".into()
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn check_domain(&self, _grid: &Grid, _h: f64) -> Result<()> {
        Ok(())
    }

    fn residual(&self, j: &Jet2) -> Result<f64> {
        Ok(residual_hs(j, self.kappa))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerPoisson {
    pub kappa: f64,
}

impl Residual for EulerPoisson {
    fn equation(&self) -> String {
        "euler-poisson".into()
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }

    fn check_domain(&self, grid: &Grid, h: f64) -> Result<()> {
        if self.kappa == 0.0 {
            return Err(Error::ZeroKappa);
        }
        grid.require_positive_sum(h)
    }

    fn residual(&self, j: &Jet2) -> Result<f64> {
        residual_ep(j, self.kappa)
    }
}
