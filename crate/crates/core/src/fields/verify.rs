use rayon::prelude::*;
use serde_json::{json, Value};

use super::{fd_jet, Point, Residual, ScalarField};
use crate::{Error, Result};

/// Both residuals below this count as exact and the order estimate is
/// reported as `+inf`.
const EXACT_RESIDUAL: f64 = 1e-12;

/// Rectangle `[t_min, t_max] × [x_min, x_max]` sampled with `n_t × n_x`
/// nodes including the edges. The same type serves the tilded plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_t: usize,
    pub n_x: usize,
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, x_min: f64, x_max: f64, n_t: usize, n_x: usize) -> Result<Self> {
        let finite = [t_min, t_max, x_min, x_max].iter().all(|v| v.is_finite());
        if !finite || t_min >= t_max || x_min >= x_max {
            return Err(Error::Invalid(format!(
                "grid needs finite bounds with min < max, got t [{t_min}, {t_max}], x [{x_min}, {x_max}]"
            )));
        }
        if n_t < 2 || n_x < 2 {
            return Err(Error::Invalid(format!("grid counts must be at least 2, got {n_t} x {n_x}")));
        }
        Ok(Grid { t_min, t_max, x_min, x_max, n_t, n_x })
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        nodes(self.t_min, self.t_max, self.n_t)
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        nodes(self.x_min, self.x_max, self.n_x)
    }

    /// Nodes in row-major order: `t` outer, `x` inner.
    pub fn points(&self) -> Vec<Point> {
        let xs = self.x_nodes();
        self.t_nodes()
            .into_iter()
            .flat_map(|t| xs.iter().map(move |&x| Point::new(t, x)))
            .collect()
    }

    /// Requires `t + x > 0` on the rectangle grown by `margin` on every side.
    pub fn require_positive_sum(&self, margin: f64) -> Result<()> {
        let (t, x) = (self.t_min - margin, self.x_min - margin);
        if t + x > 0.0 {
            Ok(())
        } else {
            Err(Error::Singular { t, x })
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "[{}, {}] x [{}, {}], {} x {}",
            self.t_min, self.t_max, self.x_min, self.x_max, self.n_t, self.n_x
        )
    }
}

fn nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

/// Outcome of a grid verification.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub equation: String,
    pub kappa: f64,
    pub grid: Grid,
    pub h: f64,
    pub max_abs_residual: f64,
    /// `log2(r_h / r_{h/2})` at the worst node; `+inf` when both are
    /// below `1e-12`.
    pub order_estimate: f64,
    pub tol: f64,
    pub pass: bool,
    pub worst: Point,
}

impl VerifyReport {
    /// Flat JSON object with the report's public keys.
    pub fn to_json(&self) -> Value {
        let order = if self.order_estimate == f64::INFINITY {
            json!("+inf")
        } else {
            json!(self.order_estimate)
        };
        json!({
            "equation": self.equation,
            "kappa": self.kappa,
            "grid": self.grid.describe(),
            "h": self.h,
            "max_abs_residual": self.max_abs_residual,
            "order_estimate": order,
            "pass": self.pass,
        })
    }
}

/// Evaluates `|residual|` of `field` at every grid node using
/// [`fd_jet`] with step `h`, then estimates the convergence order at
/// the worst node by repeating with `h/2`.
pub fn grid_verify(field: &ScalarField, eq: &dyn Residual, grid: &Grid, h: f64, tol: f64) -> Result<VerifyReport> {
    if !(h > 0.0) {
        return Err(Error::Invalid(format!("finite-difference step must be positive, got {h}")));
    }
    eq.check_domain(grid, h)?;
    let points = grid.points();
    let residuals: Vec<Result<f64>> = points
        .par_iter()
        .map(|&p| fd_jet(field, p, h).and_then(|j| eq.residual(&j)).map(f64::abs))
        .collect();

    // deterministic reduction: first error in node order, first maximum on ties
    let mut worst = (0usize, -1.0f64);
    for (i, r) in residuals.into_iter().enumerate() {
        let r = r?;
        if r > worst.1 || r.is_nan() {
            worst = (i, r);
            if r.is_nan() {
                break;
            }
        }
    }
    let (idx, r_h) = worst;
    let worst_point = points[idx];
    let r_half = fd_jet(field, worst_point, 0.5 * h)
        .and_then(|j| eq.residual(&j))?
        .abs();
    let order_estimate = if r_h < EXACT_RESIDUAL && r_half < EXACT_RESIDUAL {
        f64::INFINITY
    } else {
        (r_h / r_half).log2()
    };
    Ok(VerifyReport {
        equation: eq.equation(),
        kappa: eq.kappa(),
        grid: *grid,
        h,
        max_abs_residual: r_h,
        order_estimate,
        tol,
        pass: r_h <= tol,
        worst: worst_point,
    })
}
