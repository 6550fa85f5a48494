//! Differential invariants by Lie derivatives.
//!
//! The invariant is put in negation normal form and checked atom by atom:
//! `μ = ν` needs equal Lie derivatives; `μ < ν` and `μ <= ν` need
//! `L μ <= L ν` (and the reverse too when the domain reaches into negative
//! time); `μ != ν` needs both orderings. Conjunctions and disjunctions of
//! invariants are invariants.

use serde::Serialize;

use crate::discharge::{discharge_sequent, DischargeConfig, LemmaDB, Verdict};
use crate::hprog::{TimeDomain, VectorField};
use crate::symexpr::{expr_eq, lie_derivative, nnf, CmpOp, EqualityConfig, Expr, ExprEquality, Pred};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomRule {
    EqRule,
    LtRule,
    NeqRule,
    Conj,
    Disj,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomRuling {
    pub atom: String,
    pub rule: AtomRule,
    /// Lie-derivative side conditions that were emitted.
    pub obligations: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffInvariantReport {
    pub invariant: String,
    pub rulings: Vec<AtomRuling>,
    pub overall: Verdict,
    /// Equality atoms whose Lie derivatives did not normalise to the same
    /// polynomial and went through the general discharger instead.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, Default)]
pub struct DinvConfig {
    /// Facts about the constants, usable as hypotheses.
    pub assumptions: Vec<Pred>,
    pub lemmas: LemmaDB,
    pub discharge: DischargeConfig,
    pub equality: EqualityConfig,
}

/// Check that `inv` is a differential invariant of `field` over `dom`.
pub fn check_diff_invariant(inv: &Pred, field: &VectorField, dom: &TimeDomain, cfg: &DinvConfig) -> DiffInvariantReport {
    let n = nnf(inv);
    let mut ck = Checker {
        field,
        two_sided: dom.effective().has_negative_times(),
        cfg,
        rulings: Vec::new(),
        fallbacks: 0,
    };
    let overall = ck.node(&n);
    DiffInvariantReport {
        invariant: n.to_string(),
        rulings: ck.rulings,
        overall,
        fallbacks: ck.fallbacks,
    }
}

struct Checker<'a> {
    field: &'a VectorField,
    two_sided: bool,
    cfg: &'a DinvConfig,
    rulings: Vec<AtomRuling>,
    fallbacks: usize,
}

impl Checker<'_> {
    fn node(&mut self, p: &Pred) -> Verdict {
        match p {
            Pred::True | Pred::False => Verdict::proved("trivial"),
            Pred::Cmp(op, a, b) => self.atom(p, *op, a, b),
            Pred::And(a, b) | Pred::Or(a, b) => {
                let va = self.node(a);
                let vb = self.node(b);
                let verdict = if !va.is_proved() {
                    va
                } else if !vb.is_proved() {
                    vb
                } else {
                    Verdict::proved("dI")
                };
                let rule = if matches!(p, Pred::And(..)) { AtomRule::Conj } else { AtomRule::Disj };
                self.rulings.push(AtomRuling {
                    atom: p.to_string(),
                    rule,
                    obligations: Vec::new(),
                    verdict: verdict.clone(),
                });
                verdict
            }
            _ => Verdict::unknown(format!("unsupported invariant shape `{p}`")),
        }
    }

    fn atom(&mut self, p: &Pred, op: CmpOp, a: &Expr, b: &Expr) -> Verdict {
        if a.mentions_time() || b.mentions_time() {
            return Verdict::unknown(format!("`{p}` mentions time"));
        }
        let lie = |e: &Expr| lie_derivative(e, self.field.as_map());
        let (la, lb) = match (lie(a), lie(b)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(e), _) | (_, Err(e)) => return Verdict::unknown(e.to_string()),
        };
        let (rule, goals) = match op {
            CmpOp::Eq => {
                if expr_eq(&la, &lb, &self.cfg.equality) == ExprEquality::Equal {
                    let verdict = Verdict::proved("lie-normalize");
                    self.rulings.push(AtomRuling {
                        atom: p.to_string(),
                        rule: AtomRule::EqRule,
                        obligations: vec![Pred::eq(la, lb).to_string()],
                        verdict: verdict.clone(),
                    });
                    return verdict;
                }
                self.fallbacks += 1;
                (AtomRule::EqRule, vec![Pred::eq(la, lb)])
            }
            CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
                // orient as `small < big`
                let (ls, lg) = if matches!(op, CmpOp::Lt | CmpOp::Le) { (la, lb) } else { (lb, la) };
                let mut goals = vec![Pred::le(ls.clone(), lg.clone())];
                if self.two_sided {
                    goals.push(Pred::le(lg, ls));
                }
                (AtomRule::LtRule, goals)
            }
            CmpOp::Ne => (AtomRule::NeqRule, vec![Pred::le(la.clone(), lb.clone()), Pred::le(lb, la)]),
        };
        let mut methods = Vec::new();
        let mut verdict = None;
        for (i, g) in goals.iter().enumerate() {
            let tag = format!("{p}#{i}");
            match discharge_sequent(&self.cfg.assumptions, g, &tag, &self.cfg.lemmas, &self.cfg.discharge) {
                Verdict::Proved { method } => methods.push(method),
                Verdict::Refuted { witness } => {
                    // The rule's premise fails; the atom may still be invariant.
                    let at: Vec<String> = witness.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                    verdict = Some(Verdict::unknown(format!("premise `{g}` fails at {}", at.join(", "))));
                    break;
                }
                Verdict::Unknown { reason } => {
                    verdict = Some(Verdict::unknown(format!("premise `{g}`: {reason}")));
                    break;
                }
            }
        }
        let verdict = verdict.unwrap_or_else(|| Verdict::proved(format!("lie-discharge:{}", methods.join("+"))));
        self.rulings.push(AtomRuling {
            atom: p.to_string(),
            rule,
            obligations: goals.iter().map(|g| g.to_string()).collect(),
            verdict: verdict.clone(),
        });
        verdict
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_pred_in;
    use crate::symexpr::{int, sym, var};

    #[test]
    fn ball_energy() {
        let field = VectorField::new([("x", var("v")), ("v", sym("g"))]).unwrap();
        let inv = parse_pred_in("2*g*x - 2*g*h - v*v = 0", &["x", "v"], &["g", "h"]).unwrap();
        let r = check_diff_invariant(&inv, &field, &TimeDomain::non_negative(), &DinvConfig::default());
        assert_eq!(r.overall, Verdict::proved("lie-normalize"));
        assert_eq!(r.fallbacks, 0);
    }

    #[test]
    fn moving_point_not_invariant() {
        let field = VectorField::new([("x", int(1))]).unwrap();
        let inv = Pred::eq(var("x"), int(1));
        let r = check_diff_invariant(&inv, &field, &TimeDomain::all_reals(), &DinvConfig::default());
        assert!(!r.overall.is_proved());
        assert_eq!(r.rulings[0].rule, AtomRule::EqRule);
    }

    #[test]
    fn inequality_one_and_two_sided() {
        // x' = 1: x > 0 is invariant forwards only
        let field = VectorField::new([("x", int(1))]).unwrap();
        let inv = Pred::lt(int(0), var("x"));
        let fwd = check_diff_invariant(&inv, &field, &TimeDomain::non_negative(), &DinvConfig::default());
        assert!(fwd.overall.is_proved(), "{fwd:?}");
        let both = check_diff_invariant(&inv, &field, &TimeDomain::all_reals(), &DinvConfig::default());
        assert!(!both.overall.is_proved());
        assert_eq!(both.rulings[0].obligations.len(), 2);
    }
}
