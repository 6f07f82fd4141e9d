use thiserror::Error;

use super::{BinOp, Env, Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
}

// Integer exponents up to this magnitude are evaluated by repeated
// multiplication.
const MAX_REPEATED_MUL: i64 = 64;

pub(crate) fn apply_func(func: Func, a: f64) -> Result<f64, EvalError> {
    match func {
        Func::Sin => Ok(a.sin()),
        Func::Cos => Ok(a.cos()),
        Func::Exp => Ok(a.exp()),
        Func::Ln if a > 0.0 => Ok(a.ln()),
        Func::Ln => Err(EvalError::Domain(format!("ln of non-positive value {a}"))),
        Func::Sqrt if a >= 0.0 => Ok(a.sqrt()),
        Func::Sqrt => Err(EvalError::Domain(format!("sqrt of negative value {a}"))),
    }
}

fn integer_power(base: f64, n: i64) -> Result<f64, EvalError> {
    let mut acc = 1.0;
    for _ in 0..n.unsigned_abs() {
        acc *= base;
    }
    if n >= 0 {
        Ok(acc)
    } else if acc == 0.0 {
        Err(EvalError::Domain(format!("division by zero in {base}^{n}")))
    } else {
        Ok(1.0 / acc)
    }
}

pub(crate) fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div if b == 0.0 => Err(EvalError::Domain(format!("division by zero ({a}/0)"))),
        BinOp::Div => Ok(a / b),
        BinOp::Pow => {
            if b.fract() == 0.0 && b.abs() <= MAX_REPEATED_MUL as f64 {
                integer_power(a, b as i64)
            } else if a > 0.0 {
                Ok(a.powf(b))
            } else {
                Err(EvalError::Domain(format!(
                    "non-integer power {b} of non-positive base {a}"
                )))
            }
        }
    }
}

impl Expr {
    /// Evaluates the expression; fails on unbound variables and on
    /// arguments outside a function's real domain.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        self.eval_with(&|name| env.get(name))
    }

    /// Evaluates with a single variable bound; the fast path used for
    /// one-variable functions such as `S(t)`.
    pub fn eval_at(&self, var: &str, value: f64) -> Result<f64, EvalError> {
        self.eval_with(&|name| (name == var).then_some(value))
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.to_string())),
            Expr::Neg(a) => Ok(-a.eval_with(lookup)?),
            Expr::Call(func, a) => apply_func(*func, a.eval_with(lookup)?),
            Expr::Binary(op, a, b) => apply_binary(*op, a.eval_with(lookup)?, b.eval_with(lookup)?),
        }
    }
}
