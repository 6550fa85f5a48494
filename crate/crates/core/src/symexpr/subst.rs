use std::collections::{BTreeMap, BTreeSet};

use super::{Expr, Pred};

/// Simultaneous replacement of names by terms.
pub type Substitution = BTreeMap<String, Expr>;

pub fn substitute(e: &Expr, sub: &Substitution) -> Expr {
    if sub.is_empty() {
        return e.clone();
    }
    let b = |x: &Expr| Box::new(substitute(x, sub));
    match e {
        Expr::Const(_) => e.clone(),
        Expr::SymConst(n) | Expr::Var(n) | Expr::Time(n) => {
            sub.get(n).cloned().unwrap_or_else(|| e.clone())
        }
        Expr::Neg(a) => Expr::Neg(b(a)),
        Expr::Add(x, y) => Expr::Add(b(x), b(y)),
        Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
        Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
        Expr::Div(x, y) => Expr::Div(b(x), b(y)),
        Expr::Pow(x, k) => Expr::Pow(b(x), *k),
        Expr::Sin(a) => Expr::Sin(b(a)),
        Expr::Cos(a) => Expr::Cos(b(a)),
        Expr::Exp(a) => Expr::Exp(b(a)),
    }
}

/// Capture-avoiding substitution: a binder whose name occurs free in the
/// substituted terms is renamed first.
pub fn substitute_pred(p: &Pred, sub: &Substitution) -> Pred {
    if sub.is_empty() {
        return p.clone();
    }
    match p {
        Pred::True | Pred::False => p.clone(),
        Pred::Cmp(op, a, b) => Pred::Cmp(*op, substitute(a, sub), substitute(b, sub)),
        Pred::And(a, b) => Pred::and(substitute_pred(a, sub), substitute_pred(b, sub)),
        Pred::Or(a, b) => Pred::or(substitute_pred(a, sub), substitute_pred(b, sub)),
        Pred::Implies(a, b) => Pred::implies(substitute_pred(a, sub), substitute_pred(b, sub)),
        Pred::Not(a) => Pred::not(substitute_pred(a, sub)),
        Pred::Forall { var, guard, body } => {
            let (v, g, b) = under_binder(var, guard, body, sub);
            Pred::Forall {
                var: v,
                guard: Box::new(g),
                body: Box::new(b),
            }
        }
        Pred::Exists { var, guard, body } => {
            let (v, g, b) = under_binder(var, guard, body, sub);
            Pred::Exists {
                var: v,
                guard: Box::new(g),
                body: Box::new(b),
            }
        }
    }
}

fn under_binder(var: &str, guard: &Pred, body: &Pred, sub: &Substitution) -> (String, Pred, Pred) {
    let mut inner: Substitution = sub.clone();
    inner.remove(var);
    let range_names: BTreeSet<String> = inner.values().flat_map(Expr::names).collect();
    if !range_names.contains(var) {
        return (
            var.to_string(),
            substitute_pred(guard, &inner),
            substitute_pred(body, &inner),
        );
    }
    let mut avoid = range_names;
    avoid.extend(guard.all_names());
    avoid.extend(body.all_names());
    let fresh = fresh_name(var, &avoid);
    let rename: Substitution = [(var.to_string(), Expr::Time(fresh.clone()))].into();
    let g = substitute_pred(&substitute_pred(guard, &rename), &inner);
    let b = substitute_pred(&substitute_pred(body, &rename), &inner);
    (fresh, g, b)
}

/// `base`, or `base` with the smallest numeric suffix not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !avoid.contains(n))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, sym, time, time_named, var};

    #[test]
    fn velocity_flip() {
        let q = Pred::eq(var("v").pow(2), sym("c"));
        let sub: Substitution = [("v".to_string(), -var("v"))].into();
        assert_eq!(
            substitute_pred(&q, &sub),
            Pred::eq((-var("v")).pow(2), sym("c"))
        );
    }

    #[test]
    fn empty_is_identity() {
        let e = var("x") + var("y");
        assert_eq!(substitute(&e, &Substitution::new()), e);
    }

    #[test]
    fn simultaneous_swap() {
        let sub: Substitution = [("x".to_string(), var("y")), ("y".to_string(), var("x"))].into();
        assert_eq!(substitute(&(var("x") + var("y")), &sub), var("y") + var("x"));
    }

    #[test]
    fn binder_is_renamed_on_capture() {
        // forall t [0 <= t]. x <= t   with x := t  must not capture
        let p = Pred::forall("t", Pred::le(int(0), time()), Pred::le(var("x"), time()));
        let sub: Substitution = [("x".to_string(), time())].into();
        let out = substitute_pred(&p, &sub);
        match out {
            Pred::Forall { var: v, body, .. } => {
                assert_ne!(v, "t");
                assert_eq!(*body, Pred::le(time(), time_named(&v)));
            }
            _ => panic!(),
        }
    }
}
