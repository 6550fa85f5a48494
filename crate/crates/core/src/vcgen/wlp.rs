use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;

use super::{Check, Obligation, Provenance, VcError};
use crate::hprog::{AstPath, Evolve, Flow, HybridProgram, TimeDomain};
use crate::symexpr::{fresh_name, substitute_pred, time_named, Expr, Pred, Substitution, TIME};
use crate::Rational;

/// A symbolic constant with an optional sampling range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub range: Option<(Rational, Rational)>,
}

impl ConstDecl {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            range: None,
        }
    }
}

/// A partial-correctness problem `assumptions, pre |- [program] post`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    pub vars: Vec<String>,
    pub consts: Vec<ConstDecl>,
    /// Facts about the constants, e.g. `g < 0`; added to every obligation.
    pub assumptions: Vec<Pred>,
    pub pre: Pred,
    pub post: Pred,
    pub program: HybridProgram,
}

impl VerifySpec {
    pub fn const_names(&self) -> BTreeSet<String> {
        self.consts.iter().map(|c| c.name.clone()).collect()
    }

    /// Declared constant ranges as floating-point sampling bounds.
    pub fn const_ranges(&self) -> BTreeMap<String, (f64, f64)> {
        self.consts
            .iter()
            .filter_map(|c| {
                let (lo, hi) = c.range.as_ref()?;
                Some((c.name.clone(), (lo.to_f64()?, hi.to_f64()?)))
            })
            .collect()
    }

    fn check_names(&self) -> Result<(), VcError> {
        let mut known: BTreeSet<String> = self.vars.iter().cloned().collect();
        known.extend(self.const_names());
        let check = |names: BTreeSet<String>| -> Result<(), VcError> {
            match names.into_iter().find(|n| !known.contains(n)) {
                Some(n) => Err(VcError::UnboundName(n)),
                None => Ok(()),
            }
        };
        for p in self.assumptions.iter().chain([&self.pre, &self.post]) {
            check(p.free_names())?;
        }
        check_program(&self.program, &known, &self.vars)
    }
}

fn check_program(p: &HybridProgram, known: &BTreeSet<String>, vars: &[String]) -> Result<(), VcError> {
    let unbound = |names: BTreeSet<String>| names.into_iter().find(|n| !known.contains(n));
    let pred_ok = |q: &Pred| match unbound(q.free_names()) {
        Some(n) => Err(VcError::UnboundName(n)),
        None => Ok(()),
    };
    let expr_ok = |e: &Expr| {
        let mut names = e.names();
        names.retain(|n| !e.time_names().contains(n));
        match unbound(names) {
            Some(n) => Err(VcError::UnboundName(n)),
            None => Ok(()),
        }
    };
    let var_ok = |x: &str| {
        if vars.iter().any(|v| v == x) {
            Ok(())
        } else {
            Err(VcError::NotAVariable(x.to_string()))
        }
    };
    match p {
        HybridProgram::Assign(x, e) => {
            var_ok(x)?;
            expr_ok(e)?;
        }
        HybridProgram::Test(c) | HybridProgram::If(c, _, _) => pred_ok(c)?,
        HybridProgram::Loop { inv, .. } => pred_ok(inv)?,
        HybridProgram::Evolve(ev) => {
            for (x, e) in ev.field.iter() {
                var_ok(x)?;
                expr_ok(e)?;
            }
            if let Some(flow) = &ev.flow {
                for (_, e) in flow.iter() {
                    expr_ok(e)?;
                }
            }
            for q in ev.dinv.iter().chain(&ev.cuts).chain([&ev.guard]) {
                pred_ok(q)?;
            }
        }
        HybridProgram::EvolFlow { flow, guard, .. } => {
            for (x, e) in flow.iter() {
                var_ok(x)?;
                expr_ok(e)?;
            }
            pred_ok(guard)?;
        }
        _ => {}
    }
    for c in p.children() {
        check_program(c, known, vars)?;
    }
    Ok(())
}

fn and_s(a: Pred, b: Pred) -> Pred {
    match (a, b) {
        (Pred::True, q) | (q, Pred::True) => q,
        (p, q) => Pred::and(p, q),
    }
}

fn implies_s(a: Pred, b: Pred) -> Pred {
    match (a, b) {
        (Pred::True, q) => q,
        (_, Pred::True) => Pred::True,
        (p, q) => Pred::implies(p, q),
    }
}

fn hyps(ps: impl IntoIterator<Item = Pred>) -> Vec<Pred> {
    ps.into_iter().filter(|p| *p != Pred::True).collect()
}

/// `forall t in U. (forall tau in U, tau <= t. G[phi(tau)]) -> Q[phi(t)]`.
pub(crate) fn wlp_flow(flow: &Flow, guard: &Pred, dom: &TimeDomain, q: &Pred) -> Pred {
    let mut avoid = q.all_names();
    avoid.extend(guard.all_names());
    for (x, e) in flow.iter() {
        avoid.insert(x.to_string());
        // the flow's own time symbol is substituted away
        avoid.extend(e.names().into_iter().filter(|n| n != TIME));
    }
    let t = fresh_name("t", &avoid);
    avoid.insert(t.clone());
    let tau = fresh_name("tau", &avoid);
    let u = dom.effective();
    let q_t = substitute_pred(q, &flow.at(&time_named(&t)));
    let inner = if *guard == Pred::True {
        Pred::True
    } else {
        let g_tau = substitute_pred(guard, &flow.at(&time_named(&tau)));
        Pred::forall(
            &tau,
            and_s(u.membership(&tau), Pred::le(time_named(&tau), time_named(&t))),
            g_tau,
        )
    };
    Pred::forall(&t, u.membership(&t), implies_s(inner, q_t))
}

fn wlp_evolve(ev: &Evolve, q: &Pred, path: &AstPath, obs: &mut Vec<Obligation>) -> Result<Pred, VcError> {
    ev.validate()?;
    let guard = ev.full_guard();
    let mut pre = match (&ev.flow, &ev.dinv) {
        (Some(flow), _) => {
            obs.push(Obligation::new(
                Vec::new(),
                Pred::True,
                Check::FlowCertificate {
                    field: ev.field.clone(),
                    flow: flow.clone(),
                    dom: ev.dom.clone(),
                },
                Provenance::new("flow-cert", path),
            ));
            wlp_flow(flow, &guard, &ev.dom, q)
        }
        (None, Some(inv)) => {
            obs.push(Obligation::new(
                Vec::new(),
                inv.clone(),
                Check::DiffInvariant {
                    field: ev.field.clone(),
                    dom: ev.dom.clone(),
                },
                Provenance::new("dinv", path),
            ));
            obs.push(Obligation::arith(
                hyps([inv.clone(), guard]),
                q.clone(),
                Provenance::new("dinv-exit", path),
            ));
            inv.clone()
        }
        (None, None) => {
            obs.push(Obligation::new(
                Vec::new(),
                q.clone(),
                Check::Opaque {
                    reason: "evolution without flow certificate or differential invariant".into(),
                },
                Provenance::new("no-strategy", path),
            ));
            q.clone()
        }
    };
    for cut in ev.cuts.iter().rev() {
        obs.push(Obligation::new(
            Vec::new(),
            cut.clone(),
            Check::DiffInvariant {
                field: ev.field.clone(),
                dom: ev.dom.clone(),
            },
            Provenance::new("dC", path),
        ));
        pre = and_s(cut.clone(), pre);
    }
    Ok(pre)
}

fn go(p: &HybridProgram, q: &Pred, path: &AstPath, obs: &mut Vec<Obligation>) -> Result<Pred, VcError> {
    Ok(match p {
        HybridProgram::Skip => q.clone(),
        HybridProgram::Abort => Pred::True,
        HybridProgram::Assign(x, e) => {
            let sub: Substitution = [(x.clone(), e.clone())].into();
            substitute_pred(q, &sub)
        }
        HybridProgram::Test(c) => implies_s(c.clone(), q.clone()),
        HybridProgram::Seq(ps) => {
            let mut acc = q.clone();
            for (i, c) in ps.iter().enumerate().rev() {
                acc = go(c, &acc, &path.child(i), obs)?;
            }
            acc
        }
        HybridProgram::Choice(ps) => {
            let mut parts = Vec::with_capacity(ps.len());
            for (i, c) in ps.iter().enumerate() {
                parts.push(go(c, q, &path.child(i), obs)?);
            }
            parts.into_iter().fold(Pred::True, |acc, w| {
                if acc == Pred::True {
                    w
                } else {
                    and_s(acc, w)
                }
            })
        }
        HybridProgram::If(c, a, b) => {
            let wa = go(a, q, &path.child(0), obs)?;
            let wb = go(b, q, &path.child(1), obs)?;
            and_s(implies_s(c.clone(), wa), implies_s(Pred::not(c.clone()), wb))
        }
        HybridProgram::Loop { body, inv } => {
            let wb = go(body, inv, &path.child(0), obs)?;
            obs.push(Obligation::arith(
                hyps([inv.clone()]),
                wb,
                Provenance::new("loop-step", path),
            ));
            obs.push(Obligation::arith(
                hyps([inv.clone()]),
                q.clone(),
                Provenance::new("loop-exit", path),
            ));
            inv.clone()
        }
        HybridProgram::Evolve(ev) => wlp_evolve(ev, q, path, obs)?,
        HybridProgram::EvolFlow { flow, guard, dom } => wlp_flow(flow, guard, dom, q),
    })
}

/// Weakest liberal precondition of `p` for `q`, with side obligations.
///
/// Obligations carry provisional ids; [`verify`] numbers them.
pub fn wlp(p: &HybridProgram, q: &Pred) -> Result<(Pred, Vec<Obligation>), VcError> {
    let mut obs = Vec::new();
    let pre = go(p, q, &AstPath::root(), &mut obs)?;
    for (i, ob) in obs.iter_mut().enumerate() {
        ob.id = format!("w{}", i + 1);
    }
    Ok((pre, obs))
}

/// All verification conditions of a problem: the entry implication
/// `pre -> wlp(program, post)` first, then the side obligations in the order
/// wlp produced them. Assumptions are prepended to every hypothesis list.
pub fn verify(spec: &VerifySpec) -> Result<Vec<Obligation>, VcError> {
    spec.check_names()?;
    let (w, side) = wlp(&spec.program, &spec.post)?;
    let entry = Obligation::arith(hyps([spec.pre.clone()]), w, Provenance::new("entry", &AstPath::root()));
    let consts = spec.const_names();
    let mut out = Vec::with_capacity(side.len() + 1);
    for (i, mut ob) in std::iter::once(entry).chain(side).enumerate() {
        ob.id = format!("o{}", i + 1);
        let mut hs = hyps(spec.assumptions.iter().cloned());
        hs.append(&mut ob.hyps);
        ob.hyps = hs;
        let mut names: BTreeSet<String> = BTreeSet::new();
        for h in &ob.hyps {
            names.extend(h.free_names().into_iter().filter(|n| consts.contains(n)));
        }
        ob.refresh_forall(&names);
        out.push(ob);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hprog::{TimeKind, VectorField};
    use crate::symexpr::{int, ratio, sym, time, var};

    #[test]
    fn assignment_substitutes() {
        // 1/2 v^2 = g (h - x) after v := -v
        let q = Pred::eq(ratio(1, 2) * var("v").pow(2), sym("g") * (sym("h") - var("x")));
        let (w, obs) = wlp(&HybridProgram::assign("v", -var("v")), &q).unwrap();
        let expected = Pred::eq(ratio(1, 2) * (-var("v")).pow(2), sym("g") * (sym("h") - var("x")));
        assert_eq!(w, expected);
        assert!(obs.is_empty());
    }

    #[test]
    fn skip_is_identity() {
        let q = Pred::le(var("x"), int(1));
        assert_eq!(wlp(&HybridProgram::Skip, &q).unwrap(), (q, Vec::new()));
    }

    #[test]
    fn constant_field_flow() {
        let field = VectorField::new([("x", sym("c"))]).unwrap();
        let flow = Flow::new([("x", var("x") + sym("c") * time())], TimeKind::AllReals);
        let g = Pred::le(var("x"), int(10));
        let ev = Evolve::new(field, g, TimeDomain::non_negative()).with_flow(flow).unwrap();
        let q = Pred::le(var("x"), int(10));
        let (w, obs) = wlp(&HybridProgram::Evolve(ev), &q).unwrap();
        let x_at = |n: &str| var("x") + sym("c") * time_named(n);
        let expected = Pred::forall(
            "t",
            Pred::le(Expr::zero(), time()),
            Pred::implies(
                Pred::forall(
                    "tau",
                    Pred::and(
                        Pred::le(Expr::zero(), time_named("tau")),
                        Pred::le(time_named("tau"), time()),
                    ),
                    Pred::le(x_at("tau"), int(10)),
                ),
                Pred::le(x_at("t"), int(10)),
            ),
        );
        assert_eq!(w, expected);
        assert_eq!(obs.len(), 1);
        assert!(matches!(obs[0].check, Check::FlowCertificate { .. }));
    }

    #[test]
    fn unbound_names_are_rejected() {
        let spec = VerifySpec {
            vars: vec!["x".into()],
            consts: Vec::new(),
            assumptions: Vec::new(),
            pre: Pred::True,
            post: Pred::le(var("y"), int(0)),
            program: HybridProgram::Skip,
        };
        assert_eq!(verify(&spec), Err(VcError::UnboundName("y".into())));
    }
}
