//! Differential cut, weakening and solution rules as explicit tactics.

use std::collections::BTreeMap;

use super::wlp::wlp_flow;
use super::{Check, Obligation, Provenance, VcError};
use crate::hprog::{AstPath, Flow, HybridProgram, TimeDomain, TimeKind};
use crate::symexpr::{time, var, Expr, Pred};

/// Adds `cut` to the guard of the evolution at `path`.
///
/// Returns the transformed program and the invariance obligation for the
/// cut that `verify` will emit for it.
pub fn dc_split(
    program: &HybridProgram,
    path: &AstPath,
    cut: Pred,
) -> Result<(HybridProgram, Obligation), VcError> {
    let mut out = program.clone();
    let node = out.node_at_mut(path)?;
    let HybridProgram::Evolve(ev) = node else {
        return Err(VcError::NotEvolve(path.to_string()));
    };
    let ob = Obligation::new(
        Vec::new(),
        cut.clone(),
        Check::DiffInvariant {
            field: ev.field.clone(),
            dom: ev.dom.clone(),
        },
        Provenance::new("dC", path),
    );
    ev.cuts.push(cut);
    Ok((out, ob))
}

/// Differential weakening: the guard alone implies `q`.
pub fn dw_check(node: &HybridProgram, q: &Pred) -> Result<Obligation, VcError> {
    let guard = match node {
        HybridProgram::Evolve(ev) => ev.full_guard(),
        HybridProgram::EvolFlow { guard, .. } => guard.clone(),
        _ => return Err(VcError::NotEvolve("root".into())),
    };
    let hyps = if guard == Pred::True { Vec::new() } else { vec![guard] };
    Ok(Obligation::arith(hyps, q.clone(), Provenance::new("dW", &AstPath::root())))
}

/// Differential solve for a constant field `x' = c`: the wlp along the
/// closed-form solution `x + c*t`.
pub fn ds_closed_form(
    c: &BTreeMap<String, Expr>,
    guard: &Pred,
    q: &Pred,
    dom: &TimeDomain,
) -> Result<Pred, VcError> {
    if let Some((x, _)) = c
        .iter()
        .find(|(_, e)| !e.vars().is_empty() || e.mentions_time())
    {
        return Err(VcError::NotConstant(x.clone()));
    }
    let flow = Flow::new(
        c.iter().map(|(x, e)| (x.clone(), var(x) + e.clone() * time())),
        TimeKind::AllReals,
    );
    Ok(wlp_flow(&flow, guard, dom, q))
}
