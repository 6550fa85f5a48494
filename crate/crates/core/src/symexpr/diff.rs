use std::collections::BTreeMap;

use super::{int, mk_add, mk_mul, mk_neg, mk_sub, Expr, ExprError};
use crate::Rational;

/// Symbolic partial derivative with respect to a variable or time symbol.
///
/// Symbolic constants differentiate to zero. The result is lightly
/// simplified (0 and 1 folding) but not normalised.
pub fn diff(e: &Expr, wrt: &str) -> Expr {
    match e {
        Expr::Const(_) | Expr::SymConst(_) => Expr::zero(),
        Expr::Var(n) | Expr::Time(n) => {
            if n == wrt {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Neg(a) => mk_neg(diff(a, wrt)),
        Expr::Add(a, b) => mk_add(diff(a, wrt), diff(b, wrt)),
        Expr::Sub(a, b) => mk_sub(diff(a, wrt), diff(b, wrt)),
        Expr::Mul(a, b) => mk_add(
            mk_mul(diff(a, wrt), (**b).clone()),
            mk_mul((**a).clone(), diff(b, wrt)),
        ),
        Expr::Div(a, b) => {
            let da = diff(a, wrt);
            let db = diff(b, wrt);
            if db.is_zero_const() {
                if da.is_zero_const() {
                    return Expr::zero();
                }
                return Expr::Div(Box::new(da), b.clone());
            }
            // (a' b - a b') / b^2
            let num = mk_sub(mk_mul(da, (**b).clone()), mk_mul((**a).clone(), db));
            Expr::Div(Box::new(num), Box::new((**b).clone().pow(2)))
        }
        Expr::Pow(a, k) => match k {
            0 => Expr::zero(),
            1 => diff(a, wrt),
            _ => {
                let base = if *k == 2 {
                    (**a).clone()
                } else {
                    (**a).clone().pow(k - 1)
                };
                mk_mul(mk_mul(Expr::Const(Rational::from_integer((*k).into())), base), diff(a, wrt))
            }
        },
        Expr::Sin(a) => mk_mul((**a).clone().cos(), diff(a, wrt)),
        Expr::Cos(a) => mk_neg(mk_mul((**a).clone().sin(), diff(a, wrt))),
        Expr::Exp(a) => mk_mul((**a).clone().exp(), diff(a, wrt)),
    }
}

/// Lie derivative `Σ_x (∂μ/∂x)·f(x)` of a time-free term along a vector
/// field given by its components.
pub fn lie_derivative(mu: &Expr, field: &BTreeMap<String, Expr>) -> Result<Expr, ExprError> {
    if let Some(t) = mu.time_names().into_iter().next() {
        return Err(ExprError::MentionsTime(mu.to_string(), t));
    }
    let mut acc = int(0);
    for (x, fx) in field {
        let d = diff(mu, x);
        if !d.is_zero_const() {
            acc = mk_add(acc, mk_mul(d, fx.clone()));
        }
    }
    Ok(acc)
}
