use std::collections::BTreeMap;

use thiserror::Error;

use super::{CmpOp, Expr, Pred};
use crate::Scalar;

/// Numeric assignment of names to values.
pub type Valuation<S> = BTreeMap<String, S>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
}

/// Anything that can resolve a name to a value.
pub trait Bindings<S> {
    fn lookup(&self, name: &str) -> Option<S>;
}

impl<S: Copy> Bindings<S> for BTreeMap<String, S> {
    fn lookup(&self, name: &str) -> Option<S> {
        self.get(name).copied()
    }
}

impl<S, B: Bindings<S> + ?Sized> Bindings<S> for &B {
    fn lookup(&self, name: &str) -> Option<S> {
        (**self).lookup(name)
    }
}

/// Two binding layers; `top` shadows `base`.
pub struct Layered<'a, S> {
    pub top: &'a dyn Bindings<S>,
    pub base: &'a dyn Bindings<S>,
}

impl<'a, S> Layered<'a, S> {
    pub fn new(top: &'a dyn Bindings<S>, base: &'a dyn Bindings<S>) -> Self {
        Self { top, base }
    }
}

impl<S> Bindings<S> for Layered<'_, S> {
    fn lookup(&self, name: &str) -> Option<S> {
        self.top.lookup(name).or_else(|| self.base.lookup(name))
    }
}

struct Single<'a, S> {
    name: &'a str,
    value: S,
    rest: &'a dyn Bindings<S>,
}

impl<S: Copy> Bindings<S> for Single<'_, S> {
    fn lookup(&self, name: &str) -> Option<S> {
        if name == self.name {
            Some(self.value)
        } else {
            self.rest.lookup(name)
        }
    }
}

pub fn eval<S: Scalar>(e: &Expr, env: &dyn Bindings<S>) -> Result<S, EvalError> {
    Ok(match e {
        Expr::Const(c) => S::from_rational(c),
        Expr::SymConst(n) | Expr::Var(n) | Expr::Time(n) => {
            env.lookup(n).ok_or_else(|| EvalError::Unbound(n.clone()))?
        }
        Expr::Neg(a) => -eval(a, env)?,
        Expr::Add(a, b) => eval(a, env)? + eval(b, env)?,
        Expr::Sub(a, b) => eval(a, env)? - eval(b, env)?,
        Expr::Mul(a, b) => eval(a, env)? * eval(b, env)?,
        Expr::Div(a, b) => {
            let den = eval(b, env)?;
            if den == S::zero() {
                return Err(EvalError::DivisionByZero(e.to_string()));
            }
            eval(a, env)? / den
        }
        Expr::Pow(a, n) => eval(a, env)?.powi(*n as i32),
        Expr::Sin(a) => eval(a, env)?.sin(),
        Expr::Cos(a) => eval(a, env)?.cos(),
        Expr::Exp(a) => eval(a, env)?.exp(),
    })
}

/// How predicates are evaluated numerically.
///
/// Comparisons use a relative tolerance: `a = b` holds when
/// `|a - b| <= eq_tol * max(1, |a|, |b|)`, and orderings are only considered
/// violated beyond the same margin. Quantifiers are checked on a grid of
/// step `quant_step` over `[-quant_horizon, quant_horizon]`, plus every
/// bound read off the guard.
#[derive(Debug, Clone, Copy)]
pub struct PredEvalConfig<S> {
    pub eq_tol: S,
    pub quant_step: S,
    pub quant_horizon: S,
}

impl<S: Scalar> PredEvalConfig<S> {
    /// Exact comparisons; suitable for integer-valued stores.
    pub fn exact() -> Self {
        Self {
            eq_tol: S::zero(),
            quant_step: S::lit(0.01),
            quant_horizon: S::lit(5.0),
        }
    }

    pub fn tolerant(eq_tol: f64) -> Self {
        Self {
            eq_tol: S::lit(eq_tol),
            ..Self::exact()
        }
    }
}

impl<S: Scalar> Default for PredEvalConfig<S> {
    fn default() -> Self {
        Self::tolerant(1e-9)
    }
}

fn compare<S: Scalar>(op: CmpOp, a: S, b: S, tol: S) -> bool {
    let scale = S::one().max(a.abs()).max(b.abs());
    let margin = tol * scale;
    let d = a - b;
    match op {
        CmpOp::Eq => d.abs() <= margin,
        CmpOp::Ne => d.abs() > margin,
        CmpOp::Le => d <= margin,
        CmpOp::Lt => d < margin,
        CmpOp::Ge => -d <= margin,
        CmpOp::Gt => -d < margin,
    }
}

pub fn eval_pred<S: Scalar>(
    p: &Pred,
    env: &dyn Bindings<S>,
    cfg: &PredEvalConfig<S>,
) -> Result<bool, EvalError> {
    Ok(match p {
        Pred::True => true,
        Pred::False => false,
        Pred::Cmp(op, a, b) => {
            let (x, y) = (eval(a, env)?, eval(b, env)?);
            if x.is_nan() || y.is_nan() {
                false
            } else {
                compare(*op, x, y, cfg.eq_tol)
            }
        }
        Pred::And(a, b) => eval_pred(a, env, cfg)? && eval_pred(b, env, cfg)?,
        Pred::Or(a, b) => eval_pred(a, env, cfg)? || eval_pred(b, env, cfg)?,
        Pred::Not(a) => !eval_pred(a, env, cfg)?,
        Pred::Implies(a, b) => !eval_pred(a, env, cfg)? || eval_pred(b, env, cfg)?,
        Pred::Forall { var, guard, body } => {
            for tau in quantifier_points(var, guard, env, cfg)? {
                let inner = Single {
                    name: var,
                    value: tau,
                    rest: env,
                };
                if eval_pred(guard, &inner, &PredEvalConfig { eq_tol: S::zero(), ..*cfg })?
                    && !eval_pred(body, &inner, cfg)?
                {
                    return Ok(false);
                }
            }
            true
        }
        Pred::Exists { var, guard, body } => {
            for tau in quantifier_points(var, guard, env, cfg)? {
                let inner = Single {
                    name: var,
                    value: tau,
                    rest: env,
                };
                if eval_pred(guard, &inner, &PredEvalConfig { eq_tol: S::zero(), ..*cfg })?
                    && eval_pred(body, &inner, cfg)?
                {
                    return Ok(true);
                }
            }
            false
        }
    })
}

/// Grid points plus the bounds `var op e` found among the guard's conjuncts.
fn quantifier_points<S: Scalar>(
    var: &str,
    guard: &Pred,
    env: &dyn Bindings<S>,
    cfg: &PredEvalConfig<S>,
) -> Result<Vec<S>, EvalError> {
    let mut pts = Vec::new();
    let h = cfg.quant_horizon;
    let step = cfg.quant_step;
    let n = (h / step).ceil().to_i64().unwrap_or(0);
    for k in -n..=n {
        pts.push(S::lit(k as f64) * step);
    }
    for c in guard.conjuncts() {
        if let Pred::Cmp(_, a, b) = c {
            let bound = match (a, b) {
                (Expr::Time(n), other) | (other, Expr::Time(n)) if n == var => other,
                _ => continue,
            };
            if !bound.time_names().contains(var) {
                pts.push(eval(bound, env)?);
            }
        }
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, ratio, sym, time, var};

    fn val(pairs: &[(&str, f64)]) -> Valuation<f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn constant() {
        assert_eq!(eval::<f64>(&int(5), &Valuation::new()).unwrap(), 5.0);
    }

    #[test]
    fn pythagoras() {
        let e = time().sin().pow(2) + time().cos().pow(2);
        let v = eval(&e, &val(&[("t", 0.37)])).unwrap();
        assert!((v - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ball_position() {
        // g t^2 / 2 + v t + x at g=-1, t=2, v=3, x=0
        let e = sym("g") * time().pow(2) / int(2) + var("v") * time() + var("x");
        let v = eval(&e, &val(&[("g", -1.0), ("t", 2.0), ("v", 3.0), ("x", 0.0)])).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn errors() {
        let env = val(&[("x", 0.0)]);
        assert_eq!(
            eval::<f64>(&var("y"), &env),
            Err(EvalError::Unbound("y".into()))
        );
        let e = int(1) / var("x");
        assert!(matches!(eval::<f64>(&e, &env), Err(EvalError::DivisionByZero(_))));
    }

    #[test]
    fn generic_over_f32() {
        let env: Valuation<f32> = [("x".to_string(), 2.0f32)].into_iter().collect();
        let e = var("x").pow(3) * ratio(1, 2);
        assert_eq!(eval::<f32>(&e, &env).unwrap(), 4.0f32);
    }

    #[test]
    fn bounded_quantifier_uses_guard_bounds() {
        // forall tau in [0, t]. tau <= 1  with t = 1.0000001 fails only at tau = t
        let tau = crate::symexpr::time_named("tau");
        let p = Pred::forall(
            "tau",
            Pred::and(Pred::le(int(0), tau.clone()), Pred::le(tau.clone(), time())),
            Pred::le(tau, int(1)),
        );
        let cfg = PredEvalConfig::exact();
        assert!(eval_pred(&p, &val(&[("t", 1.0)]), &cfg).unwrap());
        assert!(!eval_pred(&p, &val(&[("t", 1.0005)]), &cfg).unwrap());
    }
}
