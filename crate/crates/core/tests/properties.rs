mod common;

use cascade_lab::contact::{psi_forward, psi_inverse, pullback_check, Jet1, Partials, TildedJet1};
use cascade_lab::exprlang::{parse, Env, Expr};
use cascade_lab::fields::{fd_jet, grid_verify, residual_ep, residual_hs, Grid, Jet2, Point};
use cascade_lab::laplace::{ep_coeffs, general_solution_u, semi_invariants, AntiderivativeMode, SolutionSpec};
use cascade_lab::quad::integrate_scalar;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

fn env(t: f64, x: f64) -> Env {
    Env::new().with("t", t).with("x", x)
}

fn value(e: &Expr, t: f64, x: f64) -> Option<f64> {
    e.eval(&env(t, x)).ok().filter(|v| v.is_finite() && v.abs() < 1e6)
}

#[test]
fn print_parse_round_trip() {
    let mut runner = common::runner(512);
    runner
        .run(&common::expr(&["t", "x"], 5), |e| {
            let printed = e.to_string();
            let back = parse(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
            prop_assert_eq!(&back, &e, "printed as {}", printed);
            prop_assert_eq!(back.to_string(), printed);
            Ok(())
        })
        .unwrap();
}

#[test]
fn simplify_preserves_value() {
    let mut runner = common::runner(512);
    let strategy = (common::expr(&["t", "x"], 5), -2.0..2.0f64, -2.0..2.0f64);
    runner
        .run(&strategy, |(e, t, x)| {
            if let Some(v) = value(&e, t, x) {
                let s = e.simplify();
                let w = s.eval(&env(t, x)).map_err(|err| TestCaseError::fail(format!("{s}: {err}")))?;
                prop_assert!((v - w).abs() <= 1e-12 * (1.0 + v.abs()), "{} = {} but {} = {}", e, v, s, w);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn derivative_matches_central_difference() {
    let mut runner = common::runner(512);
    let strategy = (common::expr(&["t", "x"], 4), 0.2..2.0f64, 0.2..2.0f64);
    runner
        .run(&strategy, |(e, t, x)| {
            let h = 1e-5;
            let samples = [value(&e, t, x), value(&e, t + h, x), value(&e, t - h, x), value(&e, t + 2.0 * h, x), value(&e, t - 2.0 * h, x)];
            let [Some(_), Some(p1), Some(m1), Some(p2), Some(m2)] = samples else {
                return Ok(());
            };
            let d = e.differentiate("t");
            // intermediate overflow can leave 0·∞ in the derivative of a finite value
            let Some(exact) = d.eval(&env(t, x)).ok().filter(|v| v.is_finite()) else {
                return Ok(());
            };
            // five-point stencil; skip points where the curvature makes it unreliable
            let fd = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
            let fd_coarse = (p1 - m1) / (2.0 * h);
            if (fd - fd_coarse).abs() > 1e-3 * (1.0 + fd.abs()) {
                return Ok(());
            }
            prop_assert!((exact - fd).abs() <= 1e-5 * exact.abs().max(1.0), "d/dt {} = {} vs {}", e, exact, fd);
            Ok(())
        })
        .unwrap();
}

#[test]
fn derivative_of_var_free_expression_is_zero() {
    let mut runner = common::runner(256);
    runner
        .run(&common::expr(&["x"], 4), |e| {
            prop_assert_eq!(e.differentiate("t"), Expr::num(0.0));
            Ok(())
        })
        .unwrap();
}

fn jet_strategy() -> impl Strategy<Value = Jet1> {
    (0.1..5.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
        .prop_map(|(s, t, u, ut, ux)| Jet1::new(t, s - t, u, ut, ux))
}

#[test]
fn psi_inverse_undoes_psi() {
    let mut runner = common::runner(1000);
    let strategy = (jet_strategy(), prop::sample::select(vec![-1.0, 0.5, 2.0, 3.0]));
    runner
        .run(&strategy, |(j, kappa)| {
            let back = psi_inverse(&psi_forward(&j, kappa).unwrap(), kappa).unwrap();
            for (a, b) in back.to_array().iter().zip(j.to_array()) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{:?} -> {:?}", j, back);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn psi_undoes_psi_inverse() {
    let mut runner = common::runner(1000);
    let strategy = (
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -5.0..-0.2f64),
        prop::sample::select(vec![-1.0, 0.5, 2.0]),
    );
    runner
        .run(&strategy, |((t, x, u, ut, ux), kappa)| {
            let j = TildedJet1::new(t, x, u, ut, ux);
            let back = psi_forward(&psi_inverse(&j, kappa).unwrap(), kappa).unwrap();
            for (a, b) in back.to_array().iter().zip(j.to_array()) {
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{:?} -> {:?}", j, back);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn pullback_is_conformal_to_the_contact_form() {
    let mut runner = common::runner(300);
    let strategy = (jet_strategy(), prop::sample::select(vec![-1.0, 0.5, 2.0]));
    runner
        .run(&strategy, |(j, kappa)| {
            let chk = pullback_check(&j, kappa, Partials::Exact).unwrap();
            let s = j.t + j.x;
            prop_assert!(chk.max_coeff_residual <= 1e-9, "{:?}", chk);
            prop_assert!((chk.lambda - kappa * s.powf(-1.0 / kappa)).abs() <= 1e-9);
            prop_assert_eq!(chk.coefficients[3], 0.0);
            Ok(())
        })
        .unwrap();
}

#[test]
fn residuals_are_affine_in_second_derivatives() {
    let mut runner = common::runner(256);
    let e = || -5.0..5.0f64;
    let strategy = ((0.2..3.0f64, e(), e(), e(), e()), (e(), e(), e()), (e(), e(), e()), 0.1..3.0f64);
    runner
        .run(&strategy, |((s, t, u, ut, ux), a, b, kappa)| {
            let jet = |(tt, tx, xx): (f64, f64, f64)| Jet2 { t, x: s - t, u, u_t: ut, u_x: ux, u_tt: tt, u_tx: tx, u_xx: xx };
            let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1), 0.5 * (a.2 + b.2));
            let hs = |p| residual_hs(&jet(p), kappa);
            let ep = |p| residual_ep(&jet(p), kappa).unwrap();
            prop_assert!((hs(mid) - 0.5 * (hs(a) + hs(b))).abs() <= 1e-11);
            prop_assert!((ep(mid) - 0.5 * (ep(a) + ep(b))).abs() <= 1e-11);
            Ok(())
        })
        .unwrap();
}

#[test]
fn semi_invariants_of_euler_poisson_have_closed_forms() {
    let mut runner = common::runner(256);
    let strategy = (0.1..10.0f64, -5.0..5.0f64, prop::sample::select(vec![-1.0, 0.5, 1.0, 2.0, 5.0]));
    runner
        .run(&strategy, |(s, t, kappa)| {
            let si = semi_invariants(&ep_coeffs(kappa).unwrap(), Point::new(t, s - t)).unwrap();
            let h = 1.0 / (kappa * s * s);
            prop_assert!((si.h - h).abs() <= 1e-12 * h.abs().max(1.0));
            prop_assert!((si.k - 2.0 * (1.0 - kappa) * h).abs() <= 1e-12 * h.abs().max(1.0));
            Ok(())
        })
        .unwrap();
}

#[test]
fn quadrature_is_additive() {
    let mut runner = common::runner(128);
    let strategy = (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64);
    runner
        .run(&strategy, |(a, b, c)| {
            let f = |x: f64| Ok((3.0 * x).sin() + x * x);
            let whole = integrate_scalar(f, a, c, 1e-12).unwrap();
            let parts = integrate_scalar(f, a, b, 1e-12).unwrap() + integrate_scalar(f, b, c, 1e-12).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-9);
            Ok(())
        })
        .unwrap();
}

#[test]
fn random_general_solutions_pass_verification() {
    let mut runner = common::runner(1);
    let pts_t: Vec<Vec<f64>> = common::linspace(0.4, 1.6, 7).into_iter().map(|t| vec![t]).collect();
    let pts_x: Vec<Vec<f64>> = common::linspace(0.45, 1.55, 23).into_iter().map(|x| vec![x]).collect();
    let s_exprs = common::sample(&common::expr(&["t"], 3), &mut runner, 4, |e| {
        (0..4).all(|k| common::moderate(&derivative(e, k), &["t"], &pts_t, 50.0))
    });
    let r_exprs = common::sample(&common::expr(&["x"], 3), &mut runner, 4, |e| {
        (0..2).all(|k| common::moderate(&derivative(e, k), &["x"], &pts_x, 50.0))
    });
    let grid = Grid::new(0.5, 1.5, 0.5, 1.5, 5, 5).unwrap();
    for (s, r) in s_exprs.iter().zip(&r_exprs) {
        for kappa in [0.5, 2.0, -1.0] {
            let spec = SolutionSpec::new(kappa, s.clone(), r.clone(), AntiderivativeMode::BasePoint(0.5), 1e-10).unwrap();
            let u = general_solution_u(&spec);
            let report = grid_verify(&u, &cascade_lab::fields::EulerPoisson { kappa }, &grid, 1e-3, 1e-10);
            let report = report.unwrap_or_else(|e| panic!("S = {s}, R = {r}, κ = {kappa}: {e}"));
            let scale = grid.points().iter().map(|&p| fd_jet(&u, p, 1e-3).unwrap().u_tx.abs()).fold(1.0, f64::max);
            assert!(report.max_abs_residual <= 1e-10 * scale, "S = {s}, R = {r}, κ = {kappa}: {report:?}");
        }
    }
}

fn derivative(e: &Expr, k: usize) -> Expr {
    let var = e.variables().into_iter().next().unwrap_or_else(|| "t".into());
    (0..k).fold(e.clone(), |d, _| d.differentiate(&var))
}
