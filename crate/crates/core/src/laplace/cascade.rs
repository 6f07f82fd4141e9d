//! The Laplace t-transformation of the Euler-Poisson equation and the
//! factorization of the transformed equation:
//!
//! ```text
//! v = u_x − u/(κs)                         u = κs²(v_t − 2(1−κ)v/(κs))
//! w = v_x + (2κ−1)v/(κs)                   w_t = −2(κ−1)w/(κs)
//! ```

use crate::fields::{Jet1, Point, ScalarField};
use crate::{Error, Result};

/// Finite-difference step used when a field lacks exact partials.
pub const DEFAULT_STEP: f64 = 1e-3;

fn setup(kappa: f64, p: Point) -> Result<f64> {
    if kappa == 0.0 {
        return Err(Error::ZeroKappa);
    }
    p.require_positive_sum()
}

/// `v = u_x − u/(κ(t+x))`.
pub fn u_to_v(u: &Jet1, kappa: f64) -> Result<f64> {
    let s = setup(kappa, u.point())?;
    Ok(u.u_x - u.u / (kappa * s))
}

/// `u = κ(t+x)²(v_t − 2(1−κ)v/(κ(t+x)))`, the inverse of [`u_to_v`] on
/// solutions.
pub fn v_to_u(v: &ScalarField, kappa: f64, p: Point) -> Result<f64> {
    let s = setup(kappa, p)?;
    let j = v.jet1(p, DEFAULT_STEP)?;
    Ok(kappa * s * s * (j.u_t - 2.0 * (1.0 - kappa) / (kappa * s) * j.u))
}

/// `w = v_x + (2κ−1)v/(κ(t+x))`; the jet's `u` entries hold `v`.
pub fn v_to_w(v: &Jet1, kappa: f64) -> Result<f64> {
    let s = setup(kappa, v.point())?;
    Ok(v.u_x + (2.0 * kappa - 1.0) * v.u / (kappa * s))
}

/// `w_t + 2(κ−1)w/(κ(t+x))`, zero on every `w` produced by the cascade.
pub fn w_ode_residual(w: &ScalarField, kappa: f64, p: Point) -> Result<f64> {
    let s = setup(kappa, p)?;
    let j = w.jet1(p, DEFAULT_STEP)?;
    Ok(j.u_t + 2.0 * (kappa - 1.0) / (kappa * s) * j.u)
}

/// First-order operator `f ↦ f_x + c·f/(κs)` applied to a field. Exact
/// first partials are carried over when `f` has exact second partials.
fn first_order_image(f: &ScalarField, kappa: f64, c: f64) -> ScalarField {
    let value_src = f.clone();
    let image = ScalarField::new(move |p| {
        let s = setup(kappa, p)?;
        let j = value_src.jet1(p, DEFAULT_STEP)?;
        Ok(j.u_x + c * j.u / (kappa * s))
    });
    match f.exact() {
        Some(crate::fields::ExactPartials::Second(jet)) => {
            let jet = jet.clone();
            image.with_exact_first(move |p| {
                let s = setup(kappa, p)?;
                let j = jet(p)?;
                let ks = kappa * s;
                Ok(Jet1::new(
                    p.t,
                    p.x,
                    j.u_x + c * j.u / ks,
                    j.u_tx + c * (j.u_t / ks - j.u / (ks * s)),
                    j.u_xx + c * (j.u_x / ks - j.u / (ks * s)),
                ))
            })
        }
        _ => image,
    }
}

/// The field `v = u_x − u/(κs)` built from a field `u`.
pub fn cascade_v_field(u: &ScalarField, kappa: f64) -> ScalarField {
    first_order_image(u, kappa, -1.0)
}

/// The field `w = v_x + (2κ−1)v/(κs)` built from a field `v`.
pub fn cascade_w_field(v: &ScalarField, kappa: f64) -> ScalarField {
    first_order_image(v, kappa, 2.0 * kappa - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use crate::fields::fd_jet;
    use crate::laplace::{general_solution_u, general_solution_v, AntiderivativeMode, SolutionSpec};

    fn field(src: &str) -> ScalarField {
        ScalarField::from_expr(&parse(src).unwrap(), "t", "x")
    }

    fn jet1(src: &str, p: Point) -> Jet1 {
        fd_jet(&field(src), p, 1e-3).unwrap().first()
    }

    #[test]
    fn u_to_v_examples() {
        let p = Point::new(1.0, 1.0);
        // v = (t+x)^3/3 for u = (t+x)^4/6
        assert!((u_to_v(&jet1("(t + x)^4/6", p), 0.5).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(u_to_v(&Jet1::new(1.0, 1.0, 0.0, 0.3, 0.7), 0.5).unwrap(), 0.7);
        // (t+x)^{1/κ} spans the kernel
        for kappa in [0.5, 2.0, -1.0] {
            let src = format!("3*(t + x)^{}", 1.0 / kappa);
            let v = u_to_v(&jet1(&src, Point::new(0.4, 1.3)), kappa).unwrap();
            assert!(v.abs() < 1e-13, "κ={kappa}: {v}");
        }
        assert!(matches!(u_to_v(&Jet1::new(1.0, -1.0, 0.0, 0.0, 0.0), 0.5), Err(Error::Singular { .. })));
        assert!(matches!(u_to_v(&Jet1::new(1.0, 1.0, 0.0, 0.0, 0.0), 0.0), Err(Error::ZeroKappa)));
    }

    #[test]
    fn v_to_u_examples() {
        let p = Point::new(1.0, 1.0);
        assert!((v_to_u(&field("(t + x)^3/3"), 0.5, p).unwrap() - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!(v_to_u(&field("0"), 0.5, p).unwrap(), 0.0);
        // round trip through the v field
        let u = field("(t + x)^4/6");
        for &(t, x) in &[(1.0, 1.0), (0.3, 0.6), (2.0, 3.5)] {
            let q = Point::new(t, x);
            let back = v_to_u(&cascade_v_field(&u, 0.5), 0.5, q).unwrap();
            assert!((back - u.eval(q).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn v_to_w_examples() {
        let p = Point::new(1.0, 1.0);
        assert!((v_to_w(&jet1("(t + x)^3/3", p), 0.5).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(v_to_w(&Jet1::new(1.0, 1.0, 0.0, 0.0, 0.0), 0.5).unwrap(), 0.0);
        // S = 0, R = 1 gives w = (t+x)^{2(1−κ)/κ}
        let spec = SolutionSpec::parse(2.0, "0", "1", AntiderivativeMode::Natural, 1e-10).unwrap();
        let v = fd_jet(&general_solution_v(&spec), p, 1e-3).unwrap().first();
        assert!((v_to_w(&v, 2.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn w_ode_examples() {
        for kappa in [0.5, 2.0, -1.0] {
            let w = field(&format!("(t + x)^{}", 2.0 * (1.0 - kappa) / kappa));
            for &(t, x) in &[(1.0, 1.0), (0.2, 0.5), (3.0, -1.0)] {
                assert!(w_ode_residual(&w, kappa, Point::new(t, x)).unwrap().abs() < 1e-10);
            }
        }
        assert_eq!(w_ode_residual(&field("0"), 0.5, Point::new(1.0, 1.0)).unwrap(), 0.0);
        assert!((w_ode_residual(&field("1"), 2.0, Point::new(1.0, 1.0)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cascade_chain_on_general_solutions() {
        let spec = SolutionSpec::parse(
            2.0,
            "sin(t)",
            "1 + x^2/10",
            AntiderivativeMode::BasePoint(0.25),
            1e-12,
        )
        .unwrap();
        let (u, v) = (general_solution_u(&spec), general_solution_v(&spec));
        let w = cascade_w_field(&v, 2.0);
        for &(t, x) in &[(0.5, 0.5), (1.0, 1.3), (1.4, 0.6)] {
            let p = Point::new(t, x);
            assert!((v_to_u(&v, 2.0, p).unwrap() - u.eval(p).unwrap()).abs() < 1e-8);
            assert!(w_ode_residual(&w, 2.0, p).unwrap().abs() < 1e-8);
            // and u → v lands back on the general v
            let v_back = u_to_v(&fd_jet(&u, p, 1e-3).unwrap().first(), 2.0).unwrap();
            assert!((v_back - v.eval(p).unwrap()).abs() < 1e-9);
        }
    }
}
