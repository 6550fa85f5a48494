//! Concrete text syntax. The output is accepted by the `.hwl` parser and
//! parses back to the same tree.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{Expr, Pred};
use crate::Rational;

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

/// Renders a rational as an exact decimal when the denominator allows it,
/// otherwise as `n/d`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    let scaled = r * Rational::from_integer(BigInt::from(10).pow(digits));
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let s = n.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits as usize + 1);
    let (int_part, frac) = s.split_at(s.len() - digits as usize);
    format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac)
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
        Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
        Expr::Neg(..) => PREC_NEG,
        Expr::Pow(..) => PREC_POW,
        Expr::Const(c) if c.is_negative() => PREC_NEG,
        Expr::Const(c) if !c.is_integer() && format_rational(c).contains('/') => PREC_MUL,
        _ => PREC_ATOM,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{}", format_rational(c)),
        Expr::SymConst(n) | Expr::Var(n) | Expr::Time(n) => write!(f, "{n}"),
        Expr::Neg(a) => {
            write!(f, "-")?;
            // `-2` would read back as a negative literal.
            let needs_paren = matches!(**a, Expr::Const(_)) || prec(a) < PREC_POW;
            if needs_paren {
                write!(f, "(")?;
                write_expr(f, a)?;
                write!(f, ")")
            } else {
                write_expr(f, a)
            }
        }
        Expr::Add(a, b) => {
            write_at(f, a, PREC_ADD)?;
            write!(f, " + ")?;
            write_at(f, b, PREC_ADD + 1)
        }
        Expr::Sub(a, b) => {
            write_at(f, a, PREC_ADD)?;
            write!(f, " - ")?;
            write_at(f, b, PREC_ADD + 1)
        }
        Expr::Mul(a, b) => {
            write_at(f, a, PREC_MUL)?;
            write!(f, " * ")?;
            write_at(f, b, PREC_MUL + 1)
        }
        Expr::Div(a, b) => {
            write_at(f, a, PREC_MUL)?;
            write!(f, " / ")?;
            write_at(f, b, PREC_MUL + 1)
        }
        Expr::Pow(a, n) => {
            write_at(f, a, PREC_ATOM)?;
            write!(f, "^{n}")
        }
        Expr::Sin(a) => write_call(f, "sin", a),
        Expr::Cos(a) => write_call(f, "cos", a),
        Expr::Exp(a) => write_call(f, "exp", a),
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, a: &Expr) -> fmt::Result {
    write!(f, "{name}(")?;
    write_expr(f, a)?;
    write!(f, ")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

const PPREC_QUANT: u8 = 0;
const PPREC_IMP: u8 = 1;
const PPREC_OR: u8 = 2;
const PPREC_AND: u8 = 3;
const PPREC_NOT: u8 = 4;
const PPREC_ATOM: u8 = 5;

fn pprec(p: &Pred) -> u8 {
    match p {
        Pred::Forall { .. } | Pred::Exists { .. } => PPREC_QUANT,
        Pred::Implies(..) => PPREC_IMP,
        Pred::Or(..) => PPREC_OR,
        Pred::And(..) => PPREC_AND,
        Pred::Not(..) => PPREC_NOT,
        _ => PPREC_ATOM,
    }
}

fn pwrite_at(f: &mut fmt::Formatter<'_>, p: &Pred, min: u8) -> fmt::Result {
    if pprec(p) < min {
        write!(f, "(")?;
        write_pred(f, p)?;
        write!(f, ")")
    } else {
        write_pred(f, p)
    }
}

fn write_pred(f: &mut fmt::Formatter<'_>, p: &Pred) -> fmt::Result {
    match p {
        Pred::True => write!(f, "true"),
        Pred::False => write!(f, "false"),
        Pred::Cmp(op, a, b) => write!(f, "{} {} {}", a, op.symbol(), b),
        Pred::And(a, b) => {
            pwrite_at(f, a, PPREC_AND)?;
            write!(f, " and ")?;
            pwrite_at(f, b, PPREC_AND + 1)
        }
        Pred::Or(a, b) => {
            pwrite_at(f, a, PPREC_OR)?;
            write!(f, " or ")?;
            pwrite_at(f, b, PPREC_OR + 1)
        }
        Pred::Implies(a, b) => {
            // right associative
            pwrite_at(f, a, PPREC_IMP + 1)?;
            write!(f, " -> ")?;
            pwrite_at(f, b, PPREC_IMP)
        }
        Pred::Not(a) => {
            write!(f, "not ")?;
            pwrite_at(f, a, PPREC_NOT)
        }
        Pred::Forall { var, guard, body } => {
            write!(f, "forall {var} [")?;
            write_pred(f, guard)?;
            write!(f, "]. ")?;
            write_pred(f, body)
        }
        Pred::Exists { var, guard, body } => {
            write!(f, "exists {var} [")?;
            write_pred(f, guard)?;
            write!(f, "]. ")?;
            write_pred(f, body)
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pred(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, ratio, var};

    #[test]
    fn rationals() {
        assert_eq!(format_rational(&Rational::new(1.into(), 2.into())), "0.5");
        assert_eq!(format_rational(&Rational::new((-3).into(), 40.into())), "-0.075");
        assert_eq!(format_rational(&Rational::new(1.into(), 3.into())), "1/3");
        assert_eq!(format_rational(&Rational::from_integer(12.into())), "12");
    }

    #[test]
    fn precedence() {
        let e = (var("a") - (var("b") + var("c"))) * var("d").pow(2);
        assert_eq!(e.to_string(), "(a - (b + c)) * d^2");
        assert_eq!((-int(2)).to_string(), "-(2)");
        assert_eq!(Expr::Neg(Box::new(var("x").pow(2))).to_string(), "-x^2");
        assert_eq!(int(-2).pow(2).to_string(), "(-2)^2");
        assert_eq!((var("x") * ratio(1, 2)).to_string(), "x * 0.5");
    }
}
