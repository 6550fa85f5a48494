//! Canonical polynomial forms with exact rational coefficients.
//!
//! Variables, symbolic constants and time symbols are polynomial
//! indeterminates. `sin`, `cos` and `exp` subterms are opaque atoms keyed by
//! their normalised argument, with the single rewrite `sin(u)^2 -> 1 - cos(u)^2`.
//! Division by a monomial in symbolic constants contributes negative
//! exponents (and records the constants as assumed nonzero); any other
//! division becomes an opaque quotient atom.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{mk_mul, Expr};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(String),
    Sym(String),
    Time(String),
    Sin(Box<Poly>),
    Cos(Box<Poly>),
    Exp(Box<Poly>),
    Quot(Box<Poly>, Box<Poly>),
}

impl Atom {
    /// The plain name for indeterminate atoms.
    pub fn name(&self) -> Option<&str> {
        match self {
            Atom::Var(n) | Atom::Sym(n) | Atom::Time(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_transcendental(&self) -> bool {
        matches!(self, Atom::Sin(_) | Atom::Cos(_) | Atom::Exp(_))
    }

    /// Names of all indeterminates occurring in the atom, including inside
    /// transcendental arguments.
    pub fn names(&self) -> BTreeSet<String> {
        match self {
            Atom::Var(n) | Atom::Sym(n) | Atom::Time(n) => [n.clone()].into(),
            Atom::Sin(p) | Atom::Cos(p) | Atom::Exp(p) => p.names(),
            Atom::Quot(a, b) => {
                let mut s = a.names();
                s.extend(b.names());
                s
            }
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Atom::Var(n) => Expr::Var(n.clone()),
            Atom::Sym(n) => Expr::SymConst(n.clone()),
            Atom::Time(n) => Expr::Time(n.clone()),
            Atom::Sin(p) => p.to_expr().sin(),
            Atom::Cos(p) => p.to_expr().cos(),
            Atom::Exp(p) => p.to_expr().exp(),
            Atom::Quot(a, b) => Expr::Div(Box::new(a.to_expr()), Box::new(b.to_expr())),
        }
    }
}

/// Product of atoms with integer exponents (negative only for symbolic
/// constants that were divided by).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Atom, i32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn atom(a: Atom) -> Self {
        Monomial([(a, 1)].into())
    }

    pub fn atom_pow(a: Atom, e: i32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial([(a, e)].into())
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Atom, i32)> {
        self.0.iter().map(|(a, e)| (a, *e))
    }

    pub fn exponent(&self, a: &Atom) -> i32 {
        self.0.get(a).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i32 {
        self.0.values().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (a, e) in &other.0 {
            let slot = m.entry(a.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                m.remove(a);
            }
        }
        Monomial(m)
    }

    fn with_exponent(&self, a: &Atom, e: i32) -> Monomial {
        let mut m = self.0.clone();
        if e == 0 {
            m.remove(a);
        } else {
            m.insert(a.clone(), e);
        }
        Monomial(m)
    }

    /// `other / self` when the quotient introduces no new negative exponents.
    pub fn divides(&self, other: &Monomial) -> Option<Monomial> {
        let mut q = other.0.clone();
        for (a, e1) in &self.0 {
            let e2 = other.exponent(a);
            if !(*e1 <= e2 || *e1 <= 0) {
                return None;
            }
            let r = e2 - e1;
            if r == 0 {
                q.remove(a);
            } else {
                q.insert(a.clone(), r);
            }
        }
        Some(Monomial(q))
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.0.keys().flat_map(Atom::names).collect()
    }

    pub fn to_expr(&self) -> Expr {
        let mut num = Expr::one();
        let mut den = Expr::one();
        for (a, e) in &self.0 {
            let base = a.to_expr();
            let factor = |k: i32| if k == 1 { base.clone() } else { base.clone().pow(k as u32) };
            if *e > 0 {
                num = mk_mul(num, factor(*e));
            } else {
                den = mk_mul(den, factor(-*e));
            }
        }
        if den.is_one_const() {
            num
        } else {
            Expr::Div(Box::new(num), Box::new(den))
        }
    }
}

/// Graded order used to pick leading terms.
pub fn grlex(a: &Monomial, b: &Monomial) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| a.cmp(b))
}

/// Sparse polynomial: monomial ↦ nonzero rational coefficient.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(BTreeMap<Monomial, Rational>);

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn atom(a: Atom) -> Self {
        Self::term(Monomial::atom(a), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.0.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// The value when the polynomial has no indeterminates.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(m.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul_term(&self, m: &Monomial, k: &Rational) -> Poly {
        let mut out = Poly::zero();
        for (m2, c) in &self.0 {
            out.add_term(m2.mul(m), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(Rational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.0.keys().flat_map(Monomial::names).collect()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.0.keys().flat_map(|m| m.0.keys().cloned()).collect()
    }

    /// Leading term under [`grlex`].
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.0.iter().max_by(|a, b| grlex(a.0, b.0))
    }

    /// The same polynomial scaled so the leading coefficient is `±1`
    /// (sign preserved when `keep_sign`, otherwise made positive).
    pub fn monic(&self, keep_sign: bool) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some((_, c)) => {
                let k = if keep_sign { c.abs() } else { c.clone() };
                self.scale(&(Rational::one() / k))
            }
        }
    }

    /// `Some((coefficients, constant))` when every term is a constant or a
    /// single indeterminate to the first power.
    pub fn linear_form(&self) -> Option<(BTreeMap<String, Rational>, Rational)> {
        let mut coeffs = BTreeMap::new();
        let mut constant = Rational::zero();
        for (m, c) in &self.0 {
            if m.is_one() {
                constant = c.clone();
                continue;
            }
            let mut it = m.0.iter();
            match (it.next(), it.next()) {
                (Some((a, 1)), None) => {
                    let name = a.name()?;
                    coeffs.insert(name.to_string(), c.clone());
                }
                _ => return None,
            }
        }
        Some((coeffs, constant))
    }

    /// Apply `sin(u)^2 -> 1 - cos(u)^2` until no monomial has a sine power ≥ 2.
    pub fn reduce_trig(&self) -> Poly {
        let mut out = Poly::zero();
        let mut work: Vec<(Monomial, Rational)> =
            self.0.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        while let Some((m, c)) = work.pop() {
            let sin_sq = m
                .0
                .iter()
                .find(|(a, e)| matches!(a, Atom::Sin(_)) && **e >= 2)
                .map(|(a, e)| (a.clone(), *e));
            match sin_sq {
                None => out.add_term(m, c),
                Some((Atom::Sin(arg), e)) => {
                    let sin = Atom::Sin(arg.clone());
                    let cos = Atom::Cos(arg);
                    let base = m.with_exponent(&sin, e - 2);
                    let with_cos = base.with_exponent(&cos, base.exponent(&cos) + 2);
                    work.push((base, c.clone()));
                    work.push((with_cos, -c));
                }
                Some(_) => unreachable!(),
            }
        }
        out
    }

    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (m, c) in &self.0 {
            let mono = m.to_expr();
            let (neg, mag) = (c.is_negative(), c.abs());
            let term = if m.is_one() {
                Expr::Const(mag)
            } else if mag.is_one() {
                mono
            } else {
                Expr::Mul(Box::new(Expr::Const(mag)), Box::new(mono))
            };
            acc = Some(match (acc, neg) {
                (None, false) => term,
                (None, true) => Expr::Neg(Box::new(term)),
                (Some(a), false) => Expr::Add(Box::new(a), Box::new(term)),
                (Some(a), true) => Expr::Sub(Box::new(a), Box::new(term)),
            });
        }
        acc.unwrap_or_else(Expr::zero)
    }

    /// Reduce modulo a set of polynomials by repeated leading-term division.
    /// Returns the remainder, or `None` if the step budget runs out.
    pub fn reduce_by(&self, divisors: &[Poly], max_steps: usize) -> Option<Poly> {
        let divisors: Vec<&Poly> = divisors.iter().filter(|d| !d.is_zero()).collect();
        let mut rest = self.clone();
        let mut remainder = Poly::zero();
        let mut steps = 0;
        while let Some((lm, lc)) = rest.leading().map(|(m, c)| (m.clone(), c.clone())) {
            steps += 1;
            if steps > max_steps {
                return None;
            }
            let mut reduced = false;
            for d in &divisors {
                let (dm, dc) = d.leading().unwrap();
                if let Some(q) = dm.divides(&lm) {
                    let k = &lc / dc;
                    rest = rest.sub(&d.mul_term(&q, &k));
                    reduced = true;
                    break;
                }
            }
            if !reduced {
                rest.add_term(lm.clone(), -lc.clone());
                remainder.add_term(lm, lc);
            }
        }
        Some(remainder)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Result of [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub poly: Poly,
    /// Some division could not be folded into the polynomial.
    pub has_opaque: bool,
    /// Symbolic constants that were divided by and are assumed nonzero.
    pub nonzero: BTreeSet<String>,
}

impl NormalForm {
    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
}

pub fn normalize(e: &Expr) -> NormalForm {
    let mut n = Normalizer::default();
    let poly = n.go(e).reduce_trig();
    NormalForm {
        poly,
        has_opaque: n.opaque,
        nonzero: n.nonzero,
    }
}

#[derive(Default)]
struct Normalizer {
    opaque: bool,
    nonzero: BTreeSet<String>,
}

impl Normalizer {
    fn arg(&mut self, e: &Expr) -> Poly {
        self.go(e).reduce_trig()
    }

    fn go(&mut self, e: &Expr) -> Poly {
        match e {
            Expr::Const(c) => Poly::constant(c.clone()),
            Expr::Var(n) => Poly::atom(Atom::Var(n.clone())),
            Expr::SymConst(n) => Poly::atom(Atom::Sym(n.clone())),
            Expr::Time(n) => Poly::atom(Atom::Time(n.clone())),
            Expr::Neg(a) => self.go(a).neg(),
            Expr::Add(a, b) => self.go(a).add(&self.go(b)),
            Expr::Sub(a, b) => self.go(a).sub(&self.go(b)),
            Expr::Mul(a, b) => self.go(a).mul(&self.go(b)),
            Expr::Pow(a, k) => self.go(a).pow(*k),
            Expr::Div(a, b) => {
                let num = self.go(a);
                let den = self.arg(b);
                self.divide(num, den)
            }
            Expr::Sin(a) => {
                let u = self.arg(a);
                if u.is_zero() {
                    return Poly::zero();
                }
                if leading_negative(&u) {
                    Poly::atom(Atom::Sin(Box::new(u.neg()))).neg()
                } else {
                    Poly::atom(Atom::Sin(Box::new(u)))
                }
            }
            Expr::Cos(a) => {
                let u = self.arg(a);
                if u.is_zero() {
                    return Poly::constant(Rational::one());
                }
                let u = if leading_negative(&u) { u.neg() } else { u };
                Poly::atom(Atom::Cos(Box::new(u)))
            }
            Expr::Exp(a) => {
                let u = self.arg(a);
                if u.is_zero() {
                    return Poly::constant(Rational::one());
                }
                Poly::atom(Atom::Exp(Box::new(u)))
            }
        }
    }

    fn divide(&mut self, num: Poly, den: Poly) -> Poly {
        if num.is_zero() {
            return num;
        }
        if den.len() == 1 {
            let (m, c) = den.terms().next().map(|(m, c)| (m.clone(), c.clone())).unwrap();
            let only_syms = m.factors().all(|(a, _)| matches!(a, Atom::Sym(_)));
            if only_syms {
                let inv = Monomial(m.0.iter().map(|(a, e)| (a.clone(), -e)).collect());
                for (a, _) in m.factors() {
                    if let Some(n) = a.name() {
                        self.nonzero.insert(n.to_string());
                    }
                }
                return num.mul_term(&inv, &(Rational::one() / c));
            }
        }
        self.opaque = true;
        let num = num.reduce_trig();
        Poly::atom(Atom::Quot(Box::new(num), Box::new(den)))
    }
}

fn leading_negative(p: &Poly) -> bool {
    p.leading().is_some_and(|(_, c)| c.is_negative())
}
