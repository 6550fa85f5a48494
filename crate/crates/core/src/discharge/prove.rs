//! Sequent preprocessing and the proof methods.
//!
//! A goal is broken down by introducing universal quantifiers and
//! implications and splitting conjunctions. Hypotheses are flattened into
//! comparison facts; universally quantified hypotheses are instantiated at
//! the time names in scope (and at `0`) whenever their guard is entailed.
//! The remaining atomic goals go through the methods in a fixed order.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::lemma::LemmaDB;
use super::linear::{fourier_motzkin, FmResult, LinAtom};
use crate::symexpr::{
    fresh_name, int, nnf, normalize, substitute, substitute_pred, Atom, CmpOp, Expr, Monomial, Poly,
    Pred, Substitution,
};
use crate::Rational;

/// `poly op 0` with `op` one of `<`, `<=`, `=`, `!=`. Orderings are scaled
/// to a leading coefficient of `±1`, (dis)equalities to `1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Fact {
    pub op: CmpOp,
    pub poly: Poly,
    /// Constants divided by during normalisation.
    pub nonzero: BTreeSet<String>,
}

impl Fact {
    pub fn new(op: CmpOp, poly: Poly, nonzero: BTreeSet<String>) -> Fact {
        let (op, poly) = match op {
            CmpOp::Gt => (CmpOp::Lt, poly.neg()),
            CmpOp::Ge => (CmpOp::Le, poly.neg()),
            other => (other, poly),
        };
        let poly = match op {
            CmpOp::Lt | CmpOp::Le => poly.monic(true),
            _ => poly.monic(false),
        };
        Fact { op, poly, nonzero }
    }

    pub fn from_cmp(op: CmpOp, a: &Expr, b: &Expr) -> Fact {
        let nf = normalize(&(a.clone() - b.clone()));
        Fact::new(op, nf.poly, nf.nonzero)
    }

    pub fn from_pred(p: &Pred) -> Option<Fact> {
        match p {
            Pred::Cmp(op, a, b) => Some(Fact::from_cmp(*op, a, b)),
            Pred::True => Some(Fact::new(CmpOp::Eq, Poly::zero(), BTreeSet::new())),
            Pred::False => Some(Fact::new(CmpOp::Ne, Poly::zero(), BTreeSet::new())),
            _ => None,
        }
    }

    pub fn truth(&self) -> Option<bool> {
        let c = self.poly.as_constant()?;
        Some(self.op.holds(c, Rational::zero()))
    }

    fn substitute(&self, sub: &Substitution) -> Fact {
        let nf = normalize(&substitute(&self.poly.to_expr(), sub));
        let mut nonzero = self.nonzero.clone();
        nonzero.extend(nf.nonzero);
        Fact::new(self.op, nf.poly, nonzero)
    }

    /// Whether `self` entails `g` by a syntactic check on the polynomials.
    pub fn implies(&self, g: &Fact) -> bool {
        if g.truth() == Some(true) || self.truth() == Some(false) {
            return true;
        }
        let offset = |sign: i64| -> Option<Rational> {
            let scaled = self.poly.scale(&Rational::from_integer(sign.into()));
            g.poly.sub(&scaled).as_constant()
        };
        match g.op {
            CmpOp::Le | CmpOp::Lt => {
                let strict_goal = g.op == CmpOp::Lt;
                match self.op {
                    CmpOp::Lt | CmpOp::Le => offset(1).is_some_and(|d| {
                        !d.is_positive() && (!strict_goal || self.op == CmpOp::Lt || d.is_negative())
                    }),
                    CmpOp::Eq => [1, -1].into_iter().any(|s| {
                        offset(s).is_some_and(|d| if strict_goal { d.is_negative() } else { !d.is_positive() })
                    }),
                    _ => false,
                }
            }
            CmpOp::Eq => self.op == CmpOp::Eq && self.poly == g.poly,
            CmpOp::Ne => match self.op {
                CmpOp::Ne => self.poly == g.poly,
                CmpOp::Lt => self.poly == g.poly || self.poly == g.poly.neg(),
                CmpOp::Eq => offset(1).is_some_and(|d| !d.is_zero()),
                _ => false,
            },
            _ => false,
        }
    }

    fn to_lin(&self) -> Option<Vec<LinAtom>> {
        let (coeffs, k) = self.poly.linear_form()?;
        let atom = |sign: i64, strict: bool| {
            let s = Rational::from_integer(sign.into());
            LinAtom::new(
                coeffs.iter().map(|(x, c)| (x.clone(), c * &s)).collect(),
                &k * &s,
                strict,
            )
        };
        match self.op {
            CmpOp::Lt => Some(vec![atom(1, true)]),
            CmpOp::Le => Some(vec![atom(1, false)]),
            CmpOp::Eq => Some(vec![atom(1, false), atom(-1, false)]),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProveConfig {
    /// Fourier–Motzkin is attempted only up to this many names.
    pub fm_max_names: usize,
    /// Disjunctive hypotheses split on, per goal.
    pub case_splits: usize,
    /// Step budget for polynomial reduction.
    pub reduce_steps: usize,
}

impl Default for ProveConfig {
    fn default() -> Self {
        Self {
            fm_max_names: 6,
            case_splits: 4,
            reduce_steps: 20_000,
        }
    }
}

pub(crate) struct Prover<'a> {
    pub db: &'a LemmaDB,
    pub cfg: &'a ProveConfig,
}

type Methods = Vec<String>;

#[derive(Clone, Default)]
struct Scope {
    avoid: BTreeSet<String>,
    times: Vec<Expr>,
}

#[derive(Default)]
struct Flat {
    atoms: Vec<Pred>,
    facts: Vec<Fact>,
    ors: Vec<Pred>,
    quantified: Vec<Pred>,
    contradiction: bool,
}

impl Prover<'_> {
    /// Methods used for every leaf goal, or the reason the first failing
    /// leaf could not be closed.
    pub fn prove(&self, hyps: &[Pred], concl: &Pred) -> Result<Methods, String> {
        let mut scope = Scope::default();
        for h in hyps {
            scope.avoid.extend(h.all_names());
        }
        scope.avoid.extend(concl.all_names());
        let mut used = Vec::new();
        self.goal(hyps.to_vec(), concl, &mut scope, &mut used)?;
        let mut out: Methods = Vec::new();
        for m in used {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.len() > 1 {
            out.retain(|m| m != "trivial");
        }
        Ok(out)
    }

    fn goal(&self, mut hyps: Vec<Pred>, concl: &Pred, scope: &mut Scope, used: &mut Methods) -> Result<(), String> {
        match concl {
            Pred::True => {
                used.push("trivial".into());
                Ok(())
            }
            Pred::And(a, b) => {
                self.goal(hyps.clone(), a, scope, used)?;
                self.goal(hyps, b, scope, used)
            }
            Pred::Implies(a, b) => {
                hyps.push((**a).clone());
                self.goal(hyps, b, scope, used)
            }
            Pred::Forall { var, guard, body } => {
                let v = fresh_name(var, &scope.avoid);
                scope.avoid.insert(v.clone());
                let sub: Substitution = [(var.clone(), Expr::Time(v.clone()))].into();
                let (guard, body) = if &v == var {
                    ((**guard).clone(), (**body).clone())
                } else {
                    (substitute_pred(guard, &sub), substitute_pred(body, &sub))
                };
                hyps.push(guard);
                let mut inner = scope.clone();
                inner.times.push(Expr::Time(v));
                let r = self.goal(hyps, &body, &mut inner, used);
                scope.avoid = inner.avoid;
                r
            }
            Pred::Or(a, b) => {
                hyps.push(nnf(&Pred::not((**a).clone())));
                self.goal(hyps, b, scope, used)
            }
            Pred::Not(_) => {
                let n = nnf(concl);
                if matches!(n, Pred::Not(_)) {
                    return Err(format!("cannot decompose `{concl}`"));
                }
                self.goal(hyps, &n, scope, used)
            }
            Pred::Exists { .. } => Err(format!("existential goal `{concl}`")),
            Pred::Cmp(..) | Pred::False => {
                let m = self.close(hyps, concl, scope, self.cfg.case_splits)?;
                used.push(m);
                Ok(())
            }
        }
    }

    fn close(&self, hyps: Vec<Pred>, goal: &Pred, scope: &mut Scope, splits: usize) -> Result<String, String> {
        let flat = self.flatten(hyps, scope);
        if flat.contradiction {
            return Ok("trivial".into());
        }
        let g = Fact::from_pred(goal);
        let first = self.atoms(&flat.facts, g.as_ref());
        if first.is_ok() || flat.ors.is_empty() || splits == 0 {
            return first;
        }
        // Case split on the first disjunction.
        let (left, right) = match &flat.ors[0] {
            Pred::Or(a, b) => ((**a).clone(), (**b).clone()),
            _ => unreachable!(),
        };
        let mut methods = Vec::new();
        for d in [left, right] {
            let mut hs: Vec<Pred> = flat.atoms.clone();
            hs.extend(flat.ors[1..].iter().cloned());
            hs.extend(flat.quantified.iter().cloned());
            hs.push(d);
            let m = self.close(hs, goal, scope, splits - 1)?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        if methods.len() > 1 {
            methods.retain(|m| m != "trivial");
        }
        Ok(methods.join("+"))
    }

    fn flatten(&self, hyps: Vec<Pred>, scope: &mut Scope) -> Flat {
        let mut flat = Flat::default();
        let mut queue: Vec<Pred> = hyps;
        queue.reverse();
        let mut done: BTreeSet<(usize, String)> = BTreeSet::new();
        for _round in 0..4 {
            while let Some(h) = queue.pop() {
                match h {
                    Pred::True => {}
                    Pred::False => flat.contradiction = true,
                    Pred::Cmp(op, a, b) => {
                        let f = Fact::from_cmp(op, &a, &b);
                        if f.truth() == Some(false) {
                            flat.contradiction = true;
                        }
                        if !flat.facts.contains(&f) {
                            flat.facts.push(f);
                            flat.atoms.push(Pred::Cmp(op, a, b));
                        }
                    }
                    Pred::And(a, b) => {
                        queue.push(*b);
                        queue.push(*a);
                    }
                    Pred::Or(..) => flat.ors.push(h),
                    Pred::Not(_) | Pred::Implies(..) => {
                        let n = nnf(&h);
                        if !matches!(n, Pred::Not(_)) {
                            queue.push(n);
                        }
                    }
                    Pred::Forall { .. } => flat.quantified.push(h),
                    Pred::Exists { var, guard, body } => {
                        let v = fresh_name(&var, &scope.avoid);
                        scope.avoid.insert(v.clone());
                        let sub: Substitution = [(var.clone(), Expr::Time(v.clone()))].into();
                        queue.push(substitute_pred(&body, &sub));
                        queue.push(substitute_pred(&guard, &sub));
                        scope.times.push(Expr::Time(v));
                    }
                }
            }
            // Instantiate quantified hypotheses whose guard is entailed.
            let mut candidates = scope.times.clone();
            candidates.push(int(0));
            for (qi, q) in flat.quantified.iter().enumerate() {
                let Pred::Forall { var, guard, body } = q else { continue };
                for c in &candidates {
                    let key = (qi, c.to_string());
                    if done.contains(&key) {
                        continue;
                    }
                    let sub: Substitution = [(var.clone(), c.clone())].into();
                    let g = substitute_pred(guard, &sub);
                    if entailed(&g, &flat.facts) {
                        done.insert(key);
                        queue.push(substitute_pred(body, &sub));
                    }
                }
            }
            if queue.is_empty() {
                break;
            }
        }
        flat
    }

    /// The methods proper, on comparison facts. `goal = None` asks for a
    /// contradiction among the facts.
    fn atoms(&self, facts: &[Fact], goal: Option<&Fact>) -> Result<String, String> {
        if facts.iter().any(|f| f.truth() == Some(false)) {
            return Ok("trivial".into());
        }
        if let Some(g) = goal {
            if g.truth() == Some(true) && g.nonzero.is_empty() {
                return Ok("trivial".into());
            }
            // Equalities are left to the identity check below.
            if g.op != CmpOp::Eq && facts.iter().any(|h| h.implies(g)) {
                return Ok("hypothesis".into());
            }
        }

        let (sfacts, sgoal) = substitute_equalities(facts, goal);
        let known_nonzero = |g: &Fact| g.nonzero.iter().all(|n| is_nonzero(n, facts));
        if sfacts.iter().any(|f| f.truth() == Some(false)) {
            return Ok("poly-identity".into());
        }
        if let Some(g) = &sgoal {
            if known_nonzero(g) {
                if g.truth() == Some(true) {
                    return Ok("poly-identity".into());
                }
                if g.op == CmpOp::Eq {
                    let eqs: Vec<Poly> = sfacts
                        .iter()
                        .filter(|f| f.op == CmpOp::Eq)
                        .map(|f| f.poly.clone())
                        .collect();
                    if let Some(r) = g.poly.reduce_by(&eqs, self.cfg.reduce_steps) {
                        if r.is_zero() {
                            return Ok("poly-identity".into());
                        }
                    }
                }
            }
            if sfacts.iter().any(|h| h.implies(g)) {
                return Ok("hypothesis".into());
            }
        }

        let views = [(sfacts.as_slice(), sgoal.as_ref()), (facts, goal)];
        for (fs, g) in views {
            if self.linear(fs, g) {
                return Ok("linear-arith".into());
            }
        }
        for (fs, g) in views {
            if let Some(g) = g {
                if g.nonzero.iter().all(|n| is_nonzero(n, fs)) && square_rule(fs, g) {
                    return Ok("square-rule".into());
                }
            }
        }
        for (fs, g) in [(facts, goal), (sfacts.as_slice(), sgoal.as_ref())] {
            if let Some(g) = g {
                if let Some(name) = self.lemma(fs, g) {
                    return Ok(format!("lemma:{name}"));
                }
            }
        }
        Err(match goal {
            Some(g) => format!("no method closes `{} {} 0`", g.poly, g.op.symbol()),
            None => "hypotheses not shown contradictory".into(),
        })
    }

    fn linear(&self, facts: &[Fact], goal: Option<&Fact>) -> bool {
        let negated: Vec<Vec<LinAtom>> = match goal {
            None => vec![vec![]],
            Some(g) => {
                let Some(lin) = Fact::new(CmpOp::Le, g.poly.clone(), BTreeSet::new()).to_lin() else {
                    return false;
                };
                let p = &lin[0];
                let mp = p.negate();
                let loose = |a: &LinAtom| LinAtom { strict: false, ..a.clone() };
                let strict = |a: &LinAtom| LinAtom { strict: true, ..a.clone() };
                match g.op {
                    // p ≤ 0 fails iff -p < 0
                    CmpOp::Le => vec![vec![strict(&mp)]],
                    CmpOp::Lt => vec![vec![loose(&mp)]],
                    CmpOp::Eq => vec![vec![strict(p)], vec![strict(&mp)]],
                    CmpOp::Ne => vec![vec![loose(p), loose(&mp)]],
                    _ => return false,
                }
            }
        };
        let goal_names: BTreeSet<String> = negated
            .iter()
            .flatten()
            .flat_map(|a| a.names().cloned())
            .collect();
        let hyps: Vec<Vec<LinAtom>> = facts.iter().filter_map(Fact::to_lin).collect();
        // Keep hypotheses connected to the goal through shared names.
        let mut names = goal_names;
        let mut chosen = vec![false; hyps.len()];
        loop {
            let mut grew = false;
            for (i, h) in hyps.iter().enumerate() {
                if chosen[i] {
                    continue;
                }
                let hn: BTreeSet<&String> = h.iter().flat_map(|a| a.names()).collect();
                if goal.is_none() || hn.iter().any(|n| names.contains(*n)) || hn.is_empty() {
                    chosen[i] = true;
                    names.extend(hn.into_iter().cloned());
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if names.len() > self.cfg.fm_max_names {
            return false;
        }
        let base: Vec<LinAtom> = hyps
            .iter()
            .zip(&chosen)
            .filter(|(_, c)| **c)
            .flat_map(|(h, _)| h.iter().cloned())
            .collect();
        if base.is_empty() && goal.is_none() {
            return false;
        }
        negated.into_iter().all(|extra| {
            let mut sys = base.clone();
            sys.extend(extra);
            fourier_motzkin(&sys, &[]) == FmResult::Infeasible
        })
    }

    fn lemma(&self, facts: &[Fact], goal: &Fact) -> Option<String> {
        self.db
            .ready()
            .iter()
            .find(|l| {
                l.concl.iter().any(|c| c.implies(goal))
                    && l.hyps
                        .iter()
                        .all(|lh| lh.truth() == Some(true) || facts.iter().any(|f| f.implies(lh)))
            })
            .map(|l| l.name.clone())
    }
}

fn entailed(guard: &Pred, facts: &[Fact]) -> bool {
    guard.conjuncts().into_iter().all(|c| match Fact::from_pred(c) {
        Some(f) => f.truth() == Some(true) || facts.iter().any(|h| h.implies(&f)),
        None => false,
    })
}

/// Repeatedly solve an equality for the lexicographically last name that
/// occurs only in a single degree-one monomial with coefficient `±1`, and
/// substitute it everywhere else.
fn substitute_equalities(facts: &[Fact], goal: Option<&Fact>) -> (Vec<Fact>, Option<Fact>) {
    let mut facts = facts.to_vec();
    let mut goal = goal.cloned();
    for _ in 0..32 {
        let pick = facts
            .iter()
            .enumerate()
            .filter(|(_, f)| f.op == CmpOp::Eq)
            .find_map(|(i, f)| solve_unit(&f.poly).map(|(x, rhs)| (i, x, rhs)));
        let Some((i, x, rhs)) = pick else { break };
        facts.remove(i);
        let sub: Substitution = [(x, rhs)].into();
        facts = facts.iter().map(|f| f.substitute(&sub)).collect();
        goal = goal.map(|g| g.substitute(&sub));
    }
    (facts, goal)
}

fn solve_unit(p: &Poly) -> Option<(String, Expr)> {
    let names = p.names();
    for n in names.iter().rev() {
        let mut hit: Option<(&Monomial, &Rational)> = None;
        let mut clean = true;
        for (m, c) in p.terms() {
            if !m.names().contains(n) {
                continue;
            }
            let mut fs = m.factors();
            match (fs.next(), fs.next()) {
                (Some((a, 1)), None) if a.name() == Some(n.as_str()) && hit.is_none() => {
                    hit = Some((m, c));
                }
                _ => clean = false,
            }
        }
        let Some((m, c)) = hit else { continue };
        if !clean || c.abs() != Rational::one() {
            continue;
        }
        let mut rest = p.clone();
        rest.add_term(m.clone(), -c.clone());
        let rhs = rest.scale(&(-Rational::one() / c));
        return Some((n.clone(), rhs.to_expr()));
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Pos,
    Neg,
    NonNeg,
    NonPos,
    NonZero,
}

impl Sign {
    fn strict(self) -> bool {
        matches!(self, Sign::Pos | Sign::Neg)
    }

    /// `Some(true)` for ≥ 0 signs, `Some(false)` for ≤ 0, `None` if neither.
    fn nonneg(self) -> Option<bool> {
        match self {
            Sign::Pos | Sign::NonNeg => Some(true),
            Sign::Neg | Sign::NonPos => Some(false),
            Sign::NonZero => None,
        }
    }

    fn from_parts(nonneg: bool, strict: bool) -> Sign {
        match (nonneg, strict) {
            (true, true) => Sign::Pos,
            (true, false) => Sign::NonNeg,
            (false, true) => Sign::Neg,
            (false, false) => Sign::NonPos,
        }
    }

    fn mul(self, other: Sign) -> Option<Sign> {
        let (a, b) = (self.nonneg()?, other.nonneg()?);
        Some(Sign::from_parts(a == b, self.strict() && other.strict()))
    }
}

fn name_signs(facts: &[Fact]) -> BTreeMap<String, Sign> {
    let mut out: BTreeMap<String, Sign> = BTreeMap::new();
    for f in facts {
        let mut terms = f.poly.terms();
        let (Some((m, c)), None) = (terms.next(), terms.next()) else { continue };
        let mut fs = m.factors();
        let (Some((a, 1)), None) = (fs.next(), fs.next()) else { continue };
        let Some(n) = a.name() else { continue };
        let positive = c.is_positive();
        let s = match (f.op, positive) {
            (CmpOp::Lt, true) => Sign::Neg,
            (CmpOp::Lt, false) => Sign::Pos,
            (CmpOp::Le, true) => Sign::NonPos,
            (CmpOp::Le, false) => Sign::NonNeg,
            (CmpOp::Ne, _) => Sign::NonZero,
            _ => continue,
        };
        let slot = out.entry(n.to_string()).or_insert(s);
        if s.strict() || *slot == Sign::NonZero {
            *slot = s;
        }
    }
    out
}

fn is_nonzero(name: &str, facts: &[Fact]) -> bool {
    name_signs(facts).get(name).is_some_and(|s| s.strict() || *s == Sign::NonZero)
}

fn atom_sign(a: &Atom, e: i32, signs: &BTreeMap<String, Sign>) -> Option<Sign> {
    let base = match a {
        Atom::Exp(_) => Some(Sign::Pos),
        _ => a.name().and_then(|n| signs.get(n).copied()),
    };
    if e.rem_euclid(2) == 0 {
        return Some(match base {
            Some(s) if s.strict() || s == Sign::NonZero => Sign::Pos,
            _ => Sign::NonNeg,
        });
    }
    base.filter(|s| *s != Sign::NonZero)
}

fn monomial_sign(m: &Monomial, signs: &BTreeMap<String, Sign>) -> Option<Sign> {
    let mut acc = Sign::Pos;
    for (a, e) in m.factors() {
        acc = acc.mul(atom_sign(a, e, signs)?)?;
    }
    Some(acc)
}

/// `Some(strict)` when every term is visibly nonnegative; `strict` means
/// some term is visibly positive.
fn obviously_nonneg(p: &Poly, signs: &BTreeMap<String, Sign>) -> Option<bool> {
    let mut strict = false;
    for (m, c) in p.terms() {
        let cs = if c.is_positive() { Sign::Pos } else { Sign::Neg };
        let s = monomial_sign(m, signs)?.mul(cs)?;
        if s.nonneg() != Some(true) {
            return None;
        }
        strict |= s.strict();
    }
    Some(strict)
}

/// Find a strictly signed multiplier `κ` and `λ` with
/// `κ·p - λ·e` visibly of the sign that forces `p ≤ 0` (or `< 0`), where
/// `e = 0` is a hypothesis (or `λ = 0`).
fn square_rule(facts: &[Fact], goal: &Fact) -> bool {
    if !matches!(goal.op, CmpOp::Le | CmpOp::Lt) {
        return false;
    }
    let strict_goal = goal.op == CmpOp::Lt;
    let signs = name_signs(facts);
    let strict: Vec<(Monomial, Sign)> = signs
        .iter()
        .filter(|(_, s)| s.strict())
        .map(|(n, s)| (Monomial::atom(atom_for(n, facts)), *s))
        .collect();
    let mut kappas: Vec<(Monomial, Sign)> = vec![(Monomial::one(), Sign::Pos)];
    kappas.extend(strict.iter().cloned());
    for i in 0..strict.len() {
        for j in i + 1..strict.len() {
            let s = strict[i].1.mul(strict[j].1).unwrap();
            kappas.push((strict[i].0.mul(&strict[j].0), s));
        }
    }
    let eqs: Vec<&Poly> = facts.iter().filter(|f| f.op == CmpOp::Eq).map(|f| &f.poly).collect();
    for (k, ks) in &kappas {
        let kp = goal.poly.mul_term(k, &Rational::one());
        let mut cands: Vec<Poly> = vec![kp.clone()];
        for e in &eqs {
            for (m, c) in kp.terms() {
                let ce = e.coeff(m);
                if !ce.is_zero() {
                    cands.push(kp.sub(&e.scale(&(c / &ce))));
                }
            }
        }
        // sign(p) = sign(q)·sign(κ); need -sign(κ)·q ≥ 0.
        let flip = if *ks == Sign::Pos { -Rational::one() } else { Rational::one() };
        for q in cands {
            if let Some(s) = obviously_nonneg(&q.scale(&flip), &signs) {
                if s || !strict_goal {
                    return true;
                }
            }
        }
    }
    false
}

/// The polynomial atom under which `name` occurs in the facts.
fn atom_for(name: &str, facts: &[Fact]) -> Atom {
    for f in facts {
        for a in f.poly.atoms() {
            if a.name() == Some(name) {
                return a;
            }
        }
    }
    Atom::Var(name.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_pred_in;

    fn p(src: &str) -> Pred {
        parse_pred_in(src, &["x", "y", "v"], &["g", "h", "r"]).unwrap()
    }

    fn run(hyps: &[&str], concl: &str) -> Result<Methods, String> {
        let db = LemmaDB::new();
        let cfg = ProveConfig::default();
        let prover = Prover { db: &db, cfg: &cfg };
        let hs: Vec<Pred> = hyps.iter().map(|h| p(h)).collect();
        prover.prove(&hs, &p(concl))
    }

    #[test]
    fn bb_square_rule() {
        let m = run(&["0 > g", "2*g*x - 2*g*h = v*v"], "x <= h").unwrap();
        assert_eq!(m, vec!["square-rule"]);
    }

    #[test]
    fn linear_transitivity() {
        assert!(run(&["x <= y", "y <= h"], "x <= h").is_ok());
        assert!(run(&["x + y <= 2", "x - y <= 0"], "x <= 1").is_ok());
        assert!(run(&["x >= 0"], "x >= 1").is_err());
    }

    #[test]
    fn substitution_then_identity() {
        let m = run(&["x = h", "v = 0"], "2*g*x - 2*g*h - v*v = 0").unwrap();
        assert_eq!(m, vec!["poly-identity"]);
    }

    #[test]
    fn rotation_identity() {
        let m = run(
            &["x^2 + y^2 = r^2"],
            "(x*cos(t) + y*sin(t))^2 + (y*cos(t) - x*sin(t))^2 = r^2",
        )
        .unwrap();
        assert_eq!(m, vec!["poly-identity"]);
    }

    #[test]
    fn quantified_hypothesis_instantiated() {
        let m = run(
            &["g < 0"],
            "forall t [0 <= t]. (forall s [0 <= s and s <= t]. x + v*s >= 0) -> x + v*t >= 0",
        )
        .unwrap();
        assert_eq!(m, vec!["hypothesis"]);
    }

    #[test]
    fn disjunctive_hypothesis_split() {
        assert!(run(&["x < 0 or x > 0"], "x != 0").is_ok());
        assert!(run(&["x <= -1 or x >= 1"], "x*x >= 0").is_ok());
    }

    #[test]
    fn unit_substitution_picks_last_name() {
        let f = Fact::from_cmp(CmpOp::Eq, &crate::symexpr::var("x"), &crate::symexpr::sym("h"));
        let (x, rhs) = solve_unit(&f.poly).unwrap();
        assert_eq!(x, "x");
        assert_eq!(rhs, crate::symexpr::sym("h"));
    }
}
