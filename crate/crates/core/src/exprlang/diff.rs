use super::eval::{apply_binary, apply_func};
use super::{BinOp, Expr, Func};

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

fn fold(result: Result<f64, super::EvalError>) -> Option<Expr> {
    match result {
        Ok(v) if v.is_finite() => Some(Expr::Num(v)),
        _ => None,
    }
}

impl Expr {
    /// Exact structural derivative with respect to `var`, passed through
    /// [`Expr::simplify`]. An expression free of `var` differentiates to
    /// the zero literal.
    pub fn differentiate(&self, var: &str) -> Expr {
        self.derive(var).simplify()
    }

    fn derive(&self, var: &str) -> Expr {
        if !self.contains_var(var) {
            return Expr::Num(0.0);
        }
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(_) => Expr::Num(1.0),
            Expr::Neg(a) => Expr::neg(a.derive(var)),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                match op {
                    BinOp::Add => Expr::add(a.derive(var), b.derive(var)),
                    BinOp::Sub => Expr::sub(a.derive(var), b.derive(var)),
                    BinOp::Mul => Expr::add(
                        Expr::mul(a.derive(var), b.clone()),
                        Expr::mul(a.clone(), b.derive(var)),
                    ),
                    BinOp::Div => Expr::div(
                        Expr::sub(
                            Expr::mul(a.derive(var), b.clone()),
                            Expr::mul(a.clone(), b.derive(var)),
                        ),
                        Expr::pow(b.clone(), Expr::Num(2.0)),
                    ),
                    BinOp::Pow => derive_pow(a, b, var),
                }
            }
            Expr::Call(func, a) => {
                let inner = a.derive(var);
                let a = a.as_ref().clone();
                match func {
                    Func::Sin => Expr::mul(Expr::call(Func::Cos, a), inner),
                    Func::Cos => Expr::mul(Expr::neg(Expr::call(Func::Sin, a)), inner),
                    Func::Exp => Expr::mul(Expr::call(Func::Exp, a), inner),
                    Func::Ln => Expr::div(inner, a),
                    Func::Sqrt => Expr::div(
                        inner,
                        Expr::mul(Expr::Num(2.0), Expr::call(Func::Sqrt, a)),
                    ),
                }
            }
        }
    }

    /// Constant folding plus removal of additive zeros, multiplicative
    /// ones and multiplicative zeros. Nothing else is rewritten.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => {
                let a = a.simplify();
                match a {
                    Expr::Num(v) => Expr::Num(-v),
                    a => Expr::neg(a),
                }
            }
            Expr::Call(func, a) => {
                let a = a.simplify();
                if let Some(folded) = a.as_num().and_then(|v| fold(apply_func(*func, v))) {
                    return folded;
                }
                Expr::call(*func, a)
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
                    if let Some(folded) = fold(apply_binary(*op, x, y)) {
                        return folded;
                    }
                }
                match op {
                    BinOp::Add if is_num(&a, 0.0) => b,
                    BinOp::Add | BinOp::Sub if is_num(&b, 0.0) => a,
                    BinOp::Sub if is_num(&a, 0.0) => Expr::neg(b),
                    BinOp::Mul if is_num(&a, 0.0) || is_num(&b, 0.0) => Expr::Num(0.0),
                    BinOp::Mul if is_num(&a, 1.0) => b,
                    BinOp::Mul | BinOp::Div | BinOp::Pow if is_num(&b, 1.0) => a,
                    BinOp::Div if is_num(&a, 0.0) => Expr::Num(0.0),
                    _ => Expr::binary(*op, a, b),
                }
            }
        }
    }
}

fn derive_pow(base: &Expr, exponent: &Expr, var: &str) -> Expr {
    let base_dep = base.contains_var(var);
    let exp_dep = exponent.contains_var(var);
    if !exp_dep {
        // power rule
        let lowered = match exponent.as_num() {
            Some(n) => Expr::Num(n - 1.0),
            None => Expr::sub(exponent.clone(), Expr::Num(1.0)),
        };
        return Expr::mul(
            Expr::mul(exponent.clone(), Expr::pow(base.clone(), lowered)),
            base.derive(var),
        );
    }
    let ln_base = Expr::call(Func::Ln, base.clone());
    let whole = Expr::pow(base.clone(), exponent.clone());
    if !base_dep {
        return Expr::mul(Expr::mul(whole, ln_base), exponent.derive(var));
    }
    Expr::mul(
        whole,
        Expr::add(
            Expr::mul(exponent.derive(var), ln_base),
            Expr::div(Expr::mul(exponent.clone(), base.derive(var)), base.clone()),
        ),
    )
}
