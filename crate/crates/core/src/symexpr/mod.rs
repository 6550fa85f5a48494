//! Symbolic terms and formulas over store variables, symbolic constants and
//! time symbols.
//!
//! Guards, invariants, flows and obligations all live in this language.
//! Expressions carry exact rational constants; numeric evaluation is generic
//! over [`Scalar`](crate::Scalar).

mod diff;
mod equality;
mod eval;
mod normal;
mod pred;
mod print;
mod subst;

pub use diff::{diff, lie_derivative};
pub use equality::{expr_eq, EqualityConfig, ExprEquality};
pub use eval::{eval, eval_pred, Bindings, EvalError, Layered, PredEvalConfig, Valuation};
pub use normal::{normalize, Atom, Monomial, NormalForm, Poly};
pub use pred::{is_nnf, nnf, CmpOp, Pred};
pub use print::format_rational;
pub use subst::{fresh_name, substitute, substitute_pred, Substitution};

use std::collections::BTreeSet;
use std::ops;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::Rational;

/// Name of the distinguished time symbol used by flows.
pub const TIME: &str = "t";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by a structurally zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` mentions the time symbol `{1}`")]
    MentionsTime(String, String),
}

/// A real-valued term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(Rational),
    /// Named symbolic constant such as `g` or `r`; never changed by programs.
    SymConst(String),
    /// Store variable.
    Var(String),
    /// Time symbol (`t`, or a bound quantifier name such as `tau`).
    Time(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

pub fn int(n: i64) -> Expr {
    Expr::Const(Rational::from_integer(BigInt::from(n)))
}

pub fn ratio(num: i64, den: i64) -> Expr {
    Expr::Const(Rational::new(BigInt::from(num), BigInt::from(den)))
}

pub fn var(name: &str) -> Expr {
    Expr::Var(name.to_string())
}

pub fn sym(name: &str) -> Expr {
    Expr::SymConst(name.to_string())
}

pub fn time() -> Expr {
    Expr::Time(TIME.to_string())
}

pub fn time_named(name: &str) -> Expr {
    Expr::Time(name.to_string())
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    /// Division, rejecting a literal zero denominator.
    pub fn div(num: Expr, den: Expr) -> Result<Expr, ExprError> {
        match &den {
            Expr::Const(c) if c.is_zero() => Err(ExprError::ZeroDenominator(format!(
                "{} / {}",
                num, den
            ))),
            _ => Ok(Expr::Div(Box::new(num), Box::new(den))),
        }
    }

    pub fn pow(self, n: u32) -> Expr {
        Expr::Pow(Box::new(self), n)
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Visit every subterm, parents before children.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::SymConst(_) | Expr::Var(_) | Expr::Time(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                a.walk(f)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// All names (variables, constants and time symbols) in the term.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::SymConst(n) | Expr::Var(n) | Expr::Time(n) => {
                out.insert(n.clone());
            }
            _ => {}
        });
        out
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Var(n) = e {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn time_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Time(n) = e {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn mentions_time(&self) -> bool {
        !self.time_names().is_empty()
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

// Smart constructors used by differentiation; they fold the trivial 0/1 cases
// so derivatives stay readable.
pub(crate) fn mk_add(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::Const(x + y),
        _ if a.is_zero_const() => b,
        _ if b.is_zero_const() => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mk_sub(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::Const(x - y),
        _ if b.is_zero_const() => a,
        _ if a.is_zero_const() => mk_neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mk_neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(crate) fn mk_mul(a: Expr, b: Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::Const(x * y),
        _ if a.is_zero_const() || b.is_zero_const() => Expr::zero(),
        _ if a.is_one_const() => b,
        _ if b.is_one_const() => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Panicking division for literal test fixtures with obviously nonzero
/// denominators.
impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs).expect("literal zero denominator")
    }
}
