//! Fourier–Motzkin elimination over exact rationals.
//!
//! A [`LinAtom`] reads `Σ cᵢ·xᵢ + k ≤ 0` (or `< 0` when strict). Feasible
//! systems come back with a rational witness built by back-substitution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::symexpr::{normalize, CmpOp, Expr, Pred};
use crate::Rational;

/// Rows allowed in any intermediate system before giving up.
pub const FM_MAX_ROWS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmError {
    #[error("`{0}` is not linear")]
    NotLinear(String),
    #[error("`{0}` cannot be expressed as linear inequalities")]
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinAtom {
    pub coeffs: BTreeMap<String, Rational>,
    pub constant: Rational,
    pub strict: bool,
}

impl LinAtom {
    pub fn new(coeffs: BTreeMap<String, Rational>, constant: Rational, strict: bool) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Self {
            coeffs,
            constant,
            strict,
        }
    }

    /// `e ≤ 0` (or `< 0`) for a linear term `e`.
    pub fn from_expr(e: &Expr, strict: bool) -> Result<Self, FmError> {
        let nf = normalize(e);
        let (coeffs, constant) = nf
            .poly
            .linear_form()
            .filter(|_| !nf.has_opaque && nf.nonzero.is_empty())
            .ok_or_else(|| FmError::NotLinear(e.to_string()))?;
        Ok(Self::new(coeffs, constant, strict))
    }

    /// The inequalities equivalent to a conjunction of comparisons.
    pub fn from_pred(p: &Pred) -> Result<Vec<Self>, FmError> {
        let mut out = Vec::new();
        for c in p.conjuncts() {
            match c {
                Pred::True => {}
                Pred::Cmp(op, a, b) => {
                    let d = a.clone() - b.clone();
                    let r = b.clone() - a.clone();
                    match op {
                        CmpOp::Le => out.push(Self::from_expr(&d, false)?),
                        CmpOp::Lt => out.push(Self::from_expr(&d, true)?),
                        CmpOp::Ge => out.push(Self::from_expr(&r, false)?),
                        CmpOp::Gt => out.push(Self::from_expr(&r, true)?),
                        CmpOp::Eq => {
                            out.push(Self::from_expr(&d, false)?);
                            out.push(Self::from_expr(&r, false)?);
                        }
                        CmpOp::Ne => return Err(FmError::Unsupported(c.to_string())),
                    }
                }
                other => return Err(FmError::Unsupported(other.to_string())),
            }
        }
        Ok(out)
    }

    pub fn coeff(&self, x: &str) -> Rational {
        self.coeffs.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    /// The complement: `¬(e ≤ 0)` is `-e < 0`, `¬(e < 0)` is `-e ≤ 0`.
    pub fn negate(&self) -> LinAtom {
        LinAtom {
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            constant: -self.constant.clone(),
            strict: !self.strict,
        }
    }

    /// Left-hand side under a (possibly partial) assignment; missing names
    /// count as zero.
    pub fn lhs(&self, w: &BTreeMap<String, Rational>) -> Rational {
        let mut acc = self.constant.clone();
        for (x, c) in &self.coeffs {
            if let Some(v) = w.get(x) {
                acc += c * v;
            }
        }
        acc
    }

    pub fn holds(&self, w: &BTreeMap<String, Rational>) -> bool {
        let v = self.lhs(w);
        if self.strict {
            v.is_negative()
        } else {
            !v.is_positive()
        }
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Scale so the first coefficient has magnitude one; used for dedupe.
    fn scaled(&self) -> LinAtom {
        match self.coeffs.values().next() {
            None => self.clone(),
            Some(c) => {
                let k = Rational::one() / c.abs();
                LinAtom {
                    coeffs: self.coeffs.iter().map(|(x, v)| (x.clone(), v * &k)).collect(),
                    constant: &self.constant * &k,
                    strict: self.strict,
                }
            }
        }
    }
}

impl fmt::Display for LinAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (x, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*{}", c, x)?;
        }
        if first {
            write!(f, "0")?;
        }
        if !self.constant.is_zero() {
            write!(f, " + {}", self.constant)?;
        }
        write!(f, " {} 0", if self.strict { "<" } else { "<=" })
    }
}

/// Outcome of [`fourier_motzkin`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FmResult {
    Feasible(BTreeMap<String, Rational>),
    Infeasible,
    TooLarge,
}

/// Outcome of [`fm_implies`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Implication {
    Valid,
    Invalid(BTreeMap<String, Rational>),
    TooLarge,
}

/// Decide feasibility of a conjunction of linear atoms by eliminating the
/// names in `eliminate` first (in order), then any remaining ones.
pub fn fourier_motzkin(atoms: &[LinAtom], eliminate: &[String]) -> FmResult {
    let mut order: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mentioned: BTreeSet<&String> = atoms.iter().flat_map(|a| a.names()).collect();
    for x in eliminate.iter().chain(mentioned.iter().copied()) {
        if mentioned.contains(x) && seen.insert(x.clone()) {
            order.push(x.clone());
        }
    }

    let mut system = match prune(atoms.to_vec()) {
        Some(s) => s,
        None => return FmResult::Infeasible,
    };
    let mut stages: Vec<(String, Vec<LinAtom>)> = Vec::new();
    for x in &order {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for a in &system {
            let c = a.coeff(x);
            if c.is_positive() {
                pos.push(a);
            } else if c.is_negative() {
                neg.push(a);
            } else {
                rest.push(a.clone());
            }
        }
        if rest.len() + pos.len() * neg.len() > FM_MAX_ROWS {
            return FmResult::TooLarge;
        }
        for p in &pos {
            for n in &neg {
                rest.push(combine(p, n, x));
            }
        }
        stages.push((x.clone(), system.clone()));
        system = match prune(rest) {
            Some(s) => s,
            None => return FmResult::Infeasible,
        };
    }

    let mut witness: BTreeMap<String, Rational> = BTreeMap::new();
    for (x, rows) in stages.iter().rev() {
        let v = pick_value(x, rows, &witness);
        witness.insert(x.clone(), v);
    }
    debug_assert!(atoms.iter().all(|a| a.holds(&witness)));
    FmResult::Feasible(witness)
}

/// `hyps ⟹ goal`, by infeasibility of `hyps ∧ ¬goal`.
pub fn fm_implies(hyps: &[LinAtom], goal: &LinAtom) -> Implication {
    let mut system = hyps.to_vec();
    system.push(goal.negate());
    match fourier_motzkin(&system, &[]) {
        FmResult::Infeasible => Implication::Valid,
        FmResult::Feasible(w) => Implication::Invalid(w),
        FmResult::TooLarge => Implication::TooLarge,
    }
}

/// Positive combination cancelling `x`.
fn combine(p: &LinAtom, n: &LinAtom, x: &str) -> LinAtom {
    let cp = p.coeff(x);
    let cn = -n.coeff(x);
    let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
    for (y, c) in &p.coeffs {
        *coeffs.entry(y.clone()).or_insert_with(Rational::zero) += c / &cp;
    }
    for (y, c) in &n.coeffs {
        *coeffs.entry(y.clone()).or_insert_with(Rational::zero) += c / &cn;
    }
    coeffs.remove(x);
    LinAtom::new(
        coeffs,
        &p.constant / &cp + &n.constant / &cn,
        p.strict || n.strict,
    )
}

/// Drop satisfied constant rows and duplicates; `None` on a violated one.
fn prune(rows: Vec<LinAtom>) -> Option<Vec<LinAtom>> {
    let mut out = BTreeSet::new();
    for r in rows {
        if r.is_trivial() {
            if !r.holds(&BTreeMap::new()) {
                return None;
            }
            continue;
        }
        out.insert(r.scaled());
    }
    Some(out.into_iter().collect())
}

/// A value for `x` satisfying every row once later names are fixed.
fn pick_value(x: &str, rows: &[LinAtom], w: &BTreeMap<String, Rational>) -> Rational {
    let mut lower: Option<(Rational, bool)> = None;
    let mut upper: Option<(Rational, bool)> = None;
    for r in rows {
        let c = r.coeff(x);
        if c.is_zero() {
            continue;
        }
        let mut rest = r.clone();
        rest.coeffs.remove(x);
        let bound = -rest.lhs(w) / &c;
        if c.is_positive() {
            // x ≤ bound
            let tighter = match &upper {
                None => true,
                Some((u, s)) => bound < *u || (bound == *u && r.strict && !s),
            };
            if tighter {
                upper = Some((bound, r.strict));
            }
        } else {
            let tighter = match &lower {
                None => true,
                Some((l, s)) => bound > *l || (bound == *l && r.strict && !s),
            };
            if tighter {
                lower = Some((bound, r.strict));
            }
        }
    }
    let one = Rational::one();
    match (lower, upper) {
        (None, None) => Rational::zero(),
        (Some((l, _)), None) => l + &one,
        (None, Some((u, _))) => u - &one,
        (Some((l, ls)), Some((u, us))) => {
            if l == u && !ls && !us {
                l
            } else {
                (l + u) / Rational::from_integer(2.into())
            }
        }
    }
}
