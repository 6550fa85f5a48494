use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    /// The operator denoting the complement relation.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// A boolean formula. Quantifiers only bind time symbols and always carry a
/// range guard: `Forall { var, guard, body }` reads `∀var. guard → body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
    Implies(Box<Pred>, Box<Pred>),
    Forall {
        var: String,
        guard: Box<Pred>,
        body: Box<Pred>,
    },
    Exists {
        var: String,
        guard: Box<Pred>,
        body: Box<Pred>,
    },
}

impl Pred {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Pred {
        Pred::Cmp(op, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Pred {
        Pred::Cmp(CmpOp::Eq, a, b)
    }

    pub fn le(a: Expr, b: Expr) -> Pred {
        Pred::Cmp(CmpOp::Le, a, b)
    }

    pub fn lt(a: Expr, b: Expr) -> Pred {
        Pred::Cmp(CmpOp::Lt, a, b)
    }

    pub fn ge(a: Expr, b: Expr) -> Pred {
        Pred::Cmp(CmpOp::Ge, a, b)
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Pred, b: Pred) -> Pred {
        Pred::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Pred) -> Pred {
        Pred::Not(Box::new(a))
    }

    pub fn implies(a: Pred, b: Pred) -> Pred {
        Pred::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(var: &str, guard: Pred, body: Pred) -> Pred {
        Pred::Forall {
            var: var.to_string(),
            guard: Box::new(guard),
            body: Box::new(body),
        }
    }

    /// Right-nested conjunction; `True` for an empty list.
    pub fn all(preds: impl IntoIterator<Item = Pred>) -> Pred {
        let mut items: Vec<Pred> = preds.into_iter().collect();
        match items.len() {
            0 => Pred::True,
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(p) = items.pop() {
                    acc = Pred::and(p, acc);
                }
                acc
            }
        }
    }

    /// Flattened top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Pred> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Pred, out: &mut Vec<&'a Pred>) {
            match p {
                Pred::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Pred::True => {}
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match self {
            Pred::True | Pred::False => {}
            Pred::Cmp(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
                a.walk_exprs(f);
                b.walk_exprs(f);
            }
            Pred::Not(a) => a.walk_exprs(f),
            Pred::Forall { guard, body, .. } | Pred::Exists { guard, body, .. } => {
                guard.walk_exprs(f);
                body.walk_exprs(f);
            }
        }
    }

    /// Every name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk_exprs(&mut |e| match e {
            Expr::SymConst(n) | Expr::Var(n) | Expr::Time(n) => {
                out.insert(n.clone());
            }
            _ => {}
        });
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut BTreeSet<String>) {
        match self {
            Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
                a.collect_binders(out);
                b.collect_binders(out);
            }
            Pred::Not(a) => a.collect_binders(out),
            Pred::Forall { var, guard, body } | Pred::Exists { var, guard, body } => {
                out.insert(var.clone());
                guard.collect_binders(out);
                body.collect_binders(out);
            }
            _ => {}
        }
    }

    /// Names occurring free (not under a quantifier binding them).
    pub fn free_names(&self) -> BTreeSet<String> {
        match self {
            Pred::True | Pred::False => BTreeSet::new(),
            Pred::Cmp(_, a, b) => {
                let mut s = a.names();
                s.extend(b.names());
                s
            }
            Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
                let mut s = a.free_names();
                s.extend(b.free_names());
                s
            }
            Pred::Not(a) => a.free_names(),
            Pred::Forall { var, guard, body } | Pred::Exists { var, guard, body } => {
                let mut s = guard.free_names();
                s.extend(body.free_names());
                s.remove(var);
                s
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Pred::True | Pred::False | Pred::Cmp(..) => true,
            Pred::And(a, b) | Pred::Or(a, b) | Pred::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Pred::Not(a) => a.is_quantifier_free(),
            Pred::Forall { .. } | Pred::Exists { .. } => false,
        }
    }
}

/// Negation normal form: `Not` and `Implies` are eliminated, comparison
/// operators absorb negations and quantifiers dualise.
pub fn nnf(p: &Pred) -> Pred {
    to_nnf(p, false)
}

fn to_nnf(p: &Pred, negated: bool) -> Pred {
    match (p, negated) {
        (Pred::True, false) | (Pred::False, true) => Pred::True,
        (Pred::True, true) | (Pred::False, false) => Pred::False,
        (Pred::Cmp(op, a, b), neg) => {
            let op = if neg { op.negate() } else { *op };
            Pred::Cmp(op, a.clone(), b.clone())
        }
        (Pred::And(a, b), false) => Pred::and(to_nnf(a, false), to_nnf(b, false)),
        (Pred::And(a, b), true) => Pred::or(to_nnf(a, true), to_nnf(b, true)),
        (Pred::Or(a, b), false) => Pred::or(to_nnf(a, false), to_nnf(b, false)),
        (Pred::Or(a, b), true) => Pred::and(to_nnf(a, true), to_nnf(b, true)),
        (Pred::Implies(a, b), false) => Pred::or(to_nnf(a, true), to_nnf(b, false)),
        (Pred::Implies(a, b), true) => Pred::and(to_nnf(a, false), to_nnf(b, true)),
        (Pred::Not(a), neg) => to_nnf(a, !neg),
        (Pred::Forall { var, guard, body }, false) => Pred::Forall {
            var: var.clone(),
            guard: Box::new(to_nnf(guard, false)),
            body: Box::new(to_nnf(body, false)),
        },
        (Pred::Forall { var, guard, body }, true) => Pred::Exists {
            var: var.clone(),
            guard: Box::new(to_nnf(guard, false)),
            body: Box::new(to_nnf(body, true)),
        },
        (Pred::Exists { var, guard, body }, false) => Pred::Exists {
            var: var.clone(),
            guard: Box::new(to_nnf(guard, false)),
            body: Box::new(to_nnf(body, false)),
        },
        (Pred::Exists { var, guard, body }, true) => Pred::Forall {
            var: var.clone(),
            guard: Box::new(to_nnf(guard, false)),
            body: Box::new(to_nnf(body, true)),
        },
    }
}

/// True when `p` contains no `Not` or `Implies` node.
pub fn is_nnf(p: &Pred) -> bool {
    match p {
        Pred::True | Pred::False | Pred::Cmp(..) => true,
        Pred::And(a, b) | Pred::Or(a, b) => is_nnf(a) && is_nnf(b),
        Pred::Not(_) | Pred::Implies(..) => false,
        Pred::Forall { guard, body, .. } | Pred::Exists { guard, body, .. } => {
            is_nnf(guard) && is_nnf(body)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, var};

    #[test]
    fn negated_strict_comparison_flips() {
        let p = Pred::not(Pred::lt(var("a"), var("b")));
        assert_eq!(nnf(&p), Pred::ge(var("a"), var("b")));
    }

    #[test]
    fn de_morgan() {
        let p = Pred::eq(var("x"), int(0));
        let q = Pred::le(var("y"), int(1));
        let lhs = nnf(&Pred::not(Pred::and(p.clone(), q.clone())));
        let rhs = Pred::or(nnf(&Pred::not(p)), nnf(&Pred::not(q)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn double_negation_vanishes() {
        let p = Pred::eq(var("a"), var("b"));
        assert_eq!(nnf(&Pred::not(Pred::not(p.clone()))), p);
    }

    #[test]
    fn implication_and_quantifier() {
        let body = Pred::implies(Pred::True, Pred::eq(var("x"), int(0)));
        let q = Pred::forall("tau", Pred::True, body);
        let n = nnf(&Pred::not(q));
        assert!(is_nnf(&n));
        assert!(matches!(n, Pred::Exists { .. }));
    }

    #[test]
    fn free_names_skip_binders() {
        let q = Pred::forall(
            "tau",
            Pred::le(crate::symexpr::time_named("tau"), var("x")),
            Pred::True,
        );
        let names = q.free_names();
        assert!(names.contains("x"));
        assert!(!names.contains("tau"));
    }
}
