//! General solutions of the Euler-Poisson family in terms of two
//! arbitrary functions `S(t)` and `R(x)`.
//!
//! With `s = t + x` and `a = 1/κ`, write `A_k(t, x) = ∫ R(ξ)(t+ξ)^{a−k} dξ`.
//! Then
//!
//! ```text
//! v = s^{a−2} (S + A_0)
//! u = s^{a} (κS' + A_1) − s^{a−1} (S + A_0)
//! ```
//!
//! and the Hunter-Saxton solution in parametric form is
//! `t̃ = t/κ`, `x̃ = −κ(S + A_0)`, `ũ = κ²S' + κA_1`.
//!
//! In base-point mode every `A_k` is integrated from the same `x₀`, so
//! `∂_t A_k = (a−k) A_{k+1}` holds exactly and the exact partials of `u`
//! and `v` only need the first four members of the family.

use std::sync::Arc;

use rayon::prelude::*;

use crate::exprlang::{parse, Expr};
use crate::fields::{Grid, Jet2, Point, ScalarField, Taylor2};
use crate::quad;
use crate::{Error, Result};

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Convention for the indefinite integrals `A_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AntiderivativeMode {
    /// Closed-form power antiderivative; requires a constant `R`.
    Natural,
    /// `∫ from x₀ to x`, shared by every member of the family.
    BasePoint(f64),
}

#[derive(Debug)]
struct Parts {
    kappa: f64,
    s: [Expr; 4],
    r: Expr,
    r_prime: Expr,
    mode: AntiderivativeMode,
    natural_r: f64,
    quad_tol: f64,
}

/// Recipe for one member of the general solution family.
#[derive(Debug, Clone)]
pub struct SolutionSpec {
    inner: Arc<Parts>,
}

/// A point `(t̃, x̃, ũ)` of a parametric Hunter-Saxton solution surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsPoint {
    pub t_tilde: f64,
    pub x_tilde: f64,
    pub u_tilde: f64,
}

fn check_vars(e: &Expr, allowed: &str, what: &str) -> Result<()> {
    match e.variables().into_iter().find(|v| v != allowed) {
        Some(v) => Err(Error::Invalid(format!("{what} may only depend on `{allowed}`, found `{v}`"))),
        None => Ok(()),
    }
}

impl SolutionSpec {
    pub fn new(kappa: f64, s: Expr, r: Expr, mode: AntiderivativeMode, quad_tol: f64) -> Result<Self> {
        if kappa == 0.0 {
            return Err(Error::ZeroKappa);
        }
        if !kappa.is_finite() {
            return Err(Error::Invalid(format!("kappa must be finite, got {kappa}")));
        }
        if !(quad_tol > 0.0) {
            return Err(Error::Invalid(format!("quadrature tolerance must be positive, got {quad_tol}")));
        }
        check_vars(&s, "t", "S")?;
        check_vars(&r, "x", "R")?;
        let natural_r = match mode {
            AntiderivativeMode::Natural => {
                if !r.variables().is_empty() {
                    return Err(Error::Invalid(
                        "natural antiderivatives need a constant R; use a base point".into(),
                    ));
                }
                r.eval_with(&|_| None).map_err(|e| Error::Invalid(format!("R: {e}")))?
            }
            AntiderivativeMode::BasePoint(x0) if !x0.is_finite() => {
                return Err(Error::Invalid(format!("base point must be finite, got {x0}")));
            }
            AntiderivativeMode::BasePoint(_) => f64::NAN,
        };
        let s1 = s.differentiate("t");
        let s2 = s1.differentiate("t");
        let s3 = s2.differentiate("t");
        let r_prime = r.differentiate("x");
        Ok(SolutionSpec {
            inner: Arc::new(Parts { kappa, s: [s, s1, s2, s3], r, r_prime, mode, natural_r, quad_tol }),
        })
    }

    /// Builds a spec from expression text.
    pub fn parse(kappa: f64, s: &str, r: &str, mode: AntiderivativeMode, quad_tol: f64) -> Result<Self> {
        Self::new(kappa, parse(s)?, parse(r)?, mode, quad_tol)
    }

    pub fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    pub fn s_expr(&self) -> &Expr {
        &self.inner.s[0]
    }

    pub fn r_expr(&self) -> &Expr {
        &self.inner.r
    }

    pub fn mode(&self) -> AntiderivativeMode {
        self.inner.mode
    }

    pub fn quad_tol(&self) -> f64 {
        self.inner.quad_tol
    }

    /// `S^{(order)}(t)` for `order ≤ 3`.
    pub fn s_derivative(&self, order: usize, t: f64) -> Result<f64> {
        self.inner.s[order].eval_at("t", t).map_err(|e| Error::eval(t, f64::NAN, e))
    }

    pub fn r_value(&self, x: f64) -> Result<f64> {
        self.inner.r.eval_at("x", x).map_err(|e| Error::eval(f64::NAN, x, e))
    }

    pub fn r_derivative(&self, x: f64) -> Result<f64> {
        self.inner.r_prime.eval_at("x", x).map_err(|e| Error::eval(f64::NAN, x, e))
    }

    /// Exponent `1/κ − k` of the family member `A_k`.
    fn alpha(&self, k: usize) -> f64 {
        1.0 / self.inner.kappa - k as f64
    }

    /// Checks `t + x > 0` at `p` and along the integration path.
    fn domain(&self, p: Point) -> Result<f64> {
        let s = p.require_positive_sum()?;
        if let AntiderivativeMode::BasePoint(x0) = self.inner.mode {
            Point::new(p.t, x0).require_positive_sum()?;
        }
        Ok(s)
    }

    /// `R(ξ)(t+ξ)^{α_k}` for `k < N`.
    fn integrand<const N: usize>(&self, t: f64, xi: f64) -> Result<[f64; N]> {
        let s = t + xi;
        if !(s > 0.0) {
            return Err(Error::Singular { t, x: xi });
        }
        let r = self.inner.r.eval_at("x", xi).map_err(|e| Error::eval(t, xi, e))?;
        let mut power = s.powf(self.alpha(0));
        let mut out = [0.0; N];
        for slot in out.iter_mut() {
            *slot = r * power;
            power /= s;
        }
        Ok(out)
    }

    fn integrate<const N: usize>(&self, t: f64, from: f64, to: f64, tol: f64) -> Result<[f64; N]> {
        quad::integrate(|xi| self.integrand::<N>(t, xi), from, to, tol)
    }

    /// Closed-form `A_k` for constant `R = c`: `c s^{α+1}/(α+1)`, or
    /// `c ln s` when `α = −1`.
    fn natural_value(&self, k: usize, s: f64) -> f64 {
        let alpha = self.alpha(k);
        let c = self.inner.natural_r;
        if alpha == -1.0 {
            c * s.ln()
        } else {
            c * s.powf(alpha + 1.0) / (alpha + 1.0)
        }
    }

    /// `A_0, …, A_{N−1}` at `p`.
    pub(crate) fn antiderivatives<const N: usize>(&self, p: Point) -> Result<[f64; N]> {
        let s = self.domain(p)?;
        match self.inner.mode {
            AntiderivativeMode::Natural => Ok(std::array::from_fn(|k| self.natural_value(k, s))),
            AntiderivativeMode::BasePoint(x0) => self.integrate::<N>(p.t, x0, p.x, self.inner.quad_tol),
        }
    }

    /// Second-order Taylor data of `A_0` and `A_1`.
    fn antiderivative_jets(&self, p: Point) -> Result<[Taylor2; 2]> {
        let s = self.domain(p)?;
        match self.inner.mode {
            AntiderivativeMode::Natural => {
                let c = self.inner.natural_r;
                Ok(std::array::from_fn(|k| {
                    let alpha = self.alpha(k);
                    Taylor2::of_sum(
                        self.natural_value(k, s),
                        c * s.powf(alpha),
                        c * alpha * s.powf(alpha - 1.0),
                    )
                }))
            }
            AntiderivativeMode::BasePoint(_) => {
                let a = self.antiderivatives::<4>(p)?;
                let r = self.inner.r.eval_at("x", p.x).map_err(|e| Error::eval(p.t, p.x, e))?;
                let r1 = self.inner.r_prime.eval_at("x", p.x).map_err(|e| Error::eval(p.t, p.x, e))?;
                Ok(std::array::from_fn(|k| {
                    let (alpha, beta) = (self.alpha(k), self.alpha(k + 1));
                    let pow = s.powf(alpha);
                    Taylor2 {
                        v: a[k],
                        t: alpha * a[k + 1],
                        x: r * pow,
                        tt: alpha * beta * a[k + 2],
                        tx: alpha * r * pow / s,
                        xx: r1 * pow + alpha * r * pow / s,
                    }
                }))
            }
        }
    }

    fn s_jets(&self, t: f64) -> Result<(Taylor2, Taylor2)> {
        let mut d = [0.0; 4];
        for (order, slot) in d.iter_mut().enumerate() {
            *slot = self.s_derivative(order, t)?;
        }
        Ok((Taylor2::of_t(d[0], d[1], d[2]), Taylor2::of_t(d[1], d[2], d[3])))
    }

    fn u_value(&self, p: Point) -> Result<f64> {
        let [a0, a1] = self.antiderivatives::<2>(p)?;
        self.u_from(p, a0, a1)
    }

    fn u_from(&self, p: Point, a0: f64, a1: f64) -> Result<f64> {
        let (kappa, a) = (self.inner.kappa, self.alpha(0));
        let s = p.sum();
        let (s0, s1) = (self.s_derivative(0, p.t)?, self.s_derivative(1, p.t)?);
        Ok(s.powf(a) * (kappa * s1 + a1) - s.powf(a - 1.0) * (s0 + a0))
    }

    fn u_jet(&self, p: Point) -> Result<Jet2> {
        let [a0, a1] = self.antiderivative_jets(p)?;
        let (s_jet, s1_jet) = self.s_jets(p.t)?;
        let (kappa, a, s) = (self.inner.kappa, self.alpha(0), p.sum());
        let u = Taylor2::sum_power(s, a) * (s1_jet.scale(kappa) + a1)
            - Taylor2::sum_power(s, a - 1.0) * (s_jet + a0);
        Ok(u.at(p))
    }

    fn v_value(&self, p: Point) -> Result<f64> {
        let [a0] = self.antiderivatives::<1>(p)?;
        let s = p.sum();
        Ok(s.powf(self.alpha(2)) * (self.s_derivative(0, p.t)? + a0))
    }

    fn v_jet(&self, p: Point) -> Result<Jet2> {
        let [a0, _] = self.antiderivative_jets(p)?;
        let (s_jet, _) = self.s_jets(p.t)?;
        Ok((Taylor2::sum_power(p.sum(), self.alpha(2)) * (s_jet + a0)).at(p))
    }

    /// Values of the `u` solution on a grid in row-major order. Along each
    /// row the integrals are accumulated node to node instead of being
    /// restarted from the base point.
    pub fn u_on_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        let xs = grid.x_nodes();
        let rows: Vec<Result<Vec<f64>>> = grid
            .t_nodes()
            .into_par_iter()
            .map(|t| self.u_row(t, &xs))
            .collect();
        let mut out = Vec::with_capacity(grid.n_t * grid.n_x);
        for row in rows {
            out.extend(row?);
        }
        Ok(out)
    }

    fn u_row(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        let AntiderivativeMode::BasePoint(x0) = self.inner.mode else {
            return xs.iter().map(|&x| self.u_value(Point::new(t, x))).collect();
        };
        let tol = self.inner.quad_tol / xs.len() as f64;
        let mut acc = [0.0; 2];
        let mut prev = x0;
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            let p = Point::new(t, x);
            self.domain(p)?;
            let step = self.integrate::<2>(t, prev, x, tol)?;
            acc = [acc[0] + step[0], acc[1] + step[1]];
            prev = x;
            out.push(self.u_from(p, acc[0], acc[1])?);
        }
        Ok(out)
    }
}

/// `(A₁, A₂) = (∫R(x)(t+x)^{1/κ}dx, ∫R(x)(t+x)^{(1−κ)/κ}dx)` at `p`.
pub fn antiderivative_pair(spec: &SolutionSpec, p: Point) -> Result<(f64, f64)> {
    let [a0, a1] = spec.antiderivatives::<2>(p)?;
    Ok((a0, a1))
}

/// `v = (t+x)^{(1−2κ)/κ} (S(t) + A₁)`, the general solution of the
/// transformed equation, with exact second-order partials.
pub fn general_solution_v(spec: &SolutionSpec) -> ScalarField {
    let (value_spec, jet_spec) = (spec.clone(), spec.clone());
    ScalarField::new(move |p| value_spec.v_value(p)).with_exact_second(move |p| jet_spec.v_jet(p))
}

/// `u = (t+x)^{1/κ}(κS'(t) + A₂) − (t+x)^{(1−κ)/κ}(S(t) + A₁)`, the
/// general solution of the Euler-Poisson equation, with exact
/// second-order partials.
pub fn general_solution_u(spec: &SolutionSpec) -> ScalarField {
    let (value_spec, jet_spec) = (spec.clone(), spec.clone());
    ScalarField::new(move |p| value_spec.u_value(p)).with_exact_second(move |p| jet_spec.u_jet(p))
}

/// The parametric Hunter-Saxton solution at parameter point `p = (t, x)`.
pub fn parametric_hs_solution(spec: &SolutionSpec, p: Point) -> Result<HsPoint> {
    let [a0, a1] = spec.antiderivatives::<2>(p)?;
    let kappa = spec.kappa();
    Ok(HsPoint {
        t_tilde: p.t / kappa,
        x_tilde: -kappa * (spec.s_derivative(0, p.t)? + a0),
        u_tilde: kappa * kappa * spec.s_derivative(1, p.t)? + kappa * a1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{fd_jet, fd_jet_numeric, grid_verify, EulerPoisson};
    use crate::laplace::ep_trans_coeffs;

    const NAT: AntiderivativeMode = AntiderivativeMode::Natural;

    fn spec(kappa: f64, s: &str, r: &str, mode: AntiderivativeMode) -> SolutionSpec {
        SolutionSpec::parse(kappa, s, r, mode, DEFAULT_QUAD_TOL).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(SolutionSpec::parse(0.0, "0", "1", NAT, 1e-10), Err(Error::ZeroKappa)));
        assert!(SolutionSpec::parse(0.5, "x", "1", NAT, 1e-10).is_err());
        assert!(SolutionSpec::parse(0.5, "t", "t", AntiderivativeMode::BasePoint(0.0), 1e-10).is_err());
        assert!(SolutionSpec::parse(0.5, "t", "x", NAT, 1e-10).is_err());
        assert!(SolutionSpec::parse(0.5, "t", "1", NAT, 0.0).is_err());
        assert!(SolutionSpec::parse(0.5, "t +", "1", NAT, 1e-10).is_err());
    }

    #[test]
    fn antiderivative_examples() {
        let p = Point::new(1.0, 1.0);
        // ∫_0^1 (1+ξ)^2 dξ = 7/3
        let (a1, _) = antiderivative_pair(&spec(0.5, "0", "1", AntiderivativeMode::BasePoint(0.0)), p).unwrap();
        assert!((a1 - 7.0 / 3.0).abs() < 1e-12);
        assert_eq!(antiderivative_pair(&spec(0.5, "0", "0", AntiderivativeMode::BasePoint(0.0)), p).unwrap(), (0.0, 0.0));
        let (a1, a2) = antiderivative_pair(&spec(0.5, "0", "1", NAT), p).unwrap();
        assert!((a1 - 8.0 / 3.0).abs() < 1e-15 && (a2 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_domain() {
        let s = spec(0.5, "0", "1", AntiderivativeMode::BasePoint(-2.0));
        assert!(matches!(antiderivative_pair(&s, Point::new(1.0, 1.0)), Err(Error::Singular { .. })));
        assert!(matches!(antiderivative_pair(&spec(0.5, "0", "1", NAT), Point::new(1.0, -1.0)), Err(Error::Singular { .. })));
    }

    #[test]
    fn natural_mode_logarithmic_member() {
        // κ = −1: A_0 = ∫ (t+x)^{-1} dx = ln s
        let s = spec(-1.0, "0", "2", NAT);
        let (a1, a2) = antiderivative_pair(&s, Point::new(1.0, 2.0)).unwrap();
        assert!((a1 - 2.0 * 3f64.ln()).abs() < 1e-15);
        assert!((a2 + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn v_examples() {
        let v = general_solution_v(&spec(0.5, "0", "1", NAT));
        assert!((v.eval(Point::new(1.0, 1.0)).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        let v = general_solution_v(&spec(0.5, "t", "0", NAT));
        assert_eq!(v.eval(Point::new(1.0, 2.0)).unwrap(), 1.0);
    }

    #[test]
    fn u_examples() {
        let u = general_solution_u(&spec(0.5, "0", "1", NAT));
        for &(t, x) in &[(1.0, 1.0), (0.2, 1.7)] {
            let s: f64 = t + x;
            assert!((u.eval(Point::new(t, x)).unwrap() - s.powi(4) / 6.0).abs() < 1e-13);
        }
        let u = general_solution_u(&spec(0.5, "t", "0", NAT));
        assert!((u.eval(Point::new(1.0, 2.0)).unwrap() - 1.5).abs() < 1e-15);
        let u = general_solution_u(&spec(2.0, "0", "0", AntiderivativeMode::BasePoint(0.0)));
        assert_eq!(u.eval(Point::new(0.3, 0.8)).unwrap(), 0.0);
    }

    #[test]
    fn exact_partials_match_differences() {
        for (kappa, s_src, r_src, mode) in [
            (0.5, "sin(t)", "1 + x^2/10", AntiderivativeMode::BasePoint(0.25)),
            (2.0, "t^3", "exp(-x)", AntiderivativeMode::BasePoint(0.0)),
            (-1.0, "cos(2*t)", "3", NAT),
            (0.5, "0", "1", NAT),
        ] {
            let sp = SolutionSpec::parse(kappa, s_src, r_src, mode, 1e-13).unwrap();
            for field in [general_solution_u(&sp), general_solution_v(&sp)] {
                let p = Point::new(0.9, 1.2);
                let exact = fd_jet(&field, p, 1e-3).unwrap();
                let numeric = fd_jet_numeric(&field.without_exact(), p, 1e-3).unwrap();
                assert!((exact.u - numeric.u).abs() < 1e-12);
                for (e, n) in [
                    (exact.u_t, numeric.u_t),
                    (exact.u_x, numeric.u_x),
                    (exact.u_tt, numeric.u_tt),
                    (exact.u_tx, numeric.u_tx),
                    (exact.u_xx, numeric.u_xx),
                ] {
                    assert!((e - n).abs() < 1e-4 * (1.0 + e.abs()), "{s_src} {r_src}: {e} vs {n}");
                }
            }
        }
    }

    #[test]
    fn solutions_satisfy_their_equations() {
        let g = Grid::new(0.5, 1.5, 0.5, 1.5, 5, 5).unwrap();
        for kappa in [0.5, 2.0, -1.0, 5.0] {
            let sp = spec(kappa, "sin(t) + t^2", "1 + x/3", AntiderivativeMode::BasePoint(0.5));
            let r = grid_verify(&general_solution_u(&sp), &EulerPoisson { kappa }, &g, 1e-3, 1e-10).unwrap();
            assert!(r.pass, "u, κ={kappa}: {r:?}");
            let r = grid_verify(&general_solution_v(&sp), &ep_trans_coeffs(kappa).unwrap(), &g, 1e-3, 1e-8).unwrap();
            assert!(r.pass, "v, κ={kappa}: {r:?}");
        }
    }

    #[test]
    fn cumulative_rows_match_pointwise_values() {
        let sp = spec(2.0, "t", "exp(-x)", AntiderivativeMode::BasePoint(0.0));
        let g = Grid::new(0.5, 1.5, 0.25, 2.0, 3, 8).unwrap();
        let rows = sp.u_on_grid(&g).unwrap();
        let u = general_solution_u(&sp);
        for (p, v) in g.points().into_iter().zip(rows) {
            assert!((u.eval(p).unwrap() - v).abs() < 1e-9);
        }
    }

    #[test]
    fn parametric_examples() {
        let hs = parametric_hs_solution(&spec(0.5, "0", "1", NAT), Point::new(1.0, 1.0)).unwrap();
        assert_eq!(hs.t_tilde, 2.0);
        assert!((hs.x_tilde + 4.0 / 3.0).abs() < 1e-15);
        assert!((hs.u_tilde - 1.0).abs() < 1e-15);
        let hs = parametric_hs_solution(&spec(0.5, "0", "0", NAT), Point::new(1.0, 1.0)).unwrap();
        assert_eq!((hs.x_tilde, hs.u_tilde), (0.0, 0.0));
    }
}
