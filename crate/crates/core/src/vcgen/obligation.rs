use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::hprog::{AstPath, Flow, TimeDomain, VectorField};
use crate::symexpr::Pred;

/// Which rule produced an obligation, and where.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub rule: String,
    pub path: AstPath,
}

impl Provenance {
    pub fn new(rule: &str, path: &AstPath) -> Self {
        Self {
            rule: rule.to_string(),
            path: path.clone(),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.rule, self.path)
    }
}

/// What has to be established.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// `forall names. hyps -> concl` over the reals.
    Arith,
    /// The flow solves the field on the domain.
    FlowCertificate {
        field: VectorField,
        flow: Flow,
        dom: TimeDomain,
    },
    /// The conclusion is a differential invariant of the field.
    DiffInvariant { field: VectorField, dom: TimeDomain },
    /// Nothing the kernel can check; always Unknown.
    Opaque { reason: String },
}

impl Check {
    pub fn tag(&self) -> &'static str {
        match self {
            Check::Arith => "arith",
            Check::FlowCertificate { .. } => "flow-certificate",
            Check::DiffInvariant { .. } => "diff-invariant",
            Check::Opaque { .. } => "opaque",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obligation {
    pub id: String,
    /// Universally quantified names (variables, constants, free time names).
    pub forall: Vec<String>,
    pub hyps: Vec<Pred>,
    pub concl: Pred,
    pub check: Check,
    pub provenance: Provenance,
}

impl Obligation {
    pub fn arith(hyps: Vec<Pred>, concl: Pred, provenance: Provenance) -> Self {
        Self::new(hyps, concl, Check::Arith, provenance)
    }

    pub(crate) fn new(hyps: Vec<Pred>, concl: Pred, check: Check, provenance: Provenance) -> Self {
        let mut ob = Self {
            id: String::new(),
            forall: Vec::new(),
            hyps,
            concl,
            check,
            provenance,
        };
        ob.refresh_forall(&BTreeSet::new());
        ob
    }

    /// Recomputes `forall` as `extra` plus every free name.
    pub(crate) fn refresh_forall(&mut self, extra: &BTreeSet<String>) {
        let mut names = extra.clone();
        for h in &self.hyps {
            names.extend(h.free_names());
        }
        names.extend(self.concl.free_names());
        self.forall = names.into_iter().collect();
    }

    pub fn is_arith(&self) -> bool {
        matches!(self.check, Check::Arith)
    }

    /// The whole obligation as a single closed-over implication.
    pub fn as_implication(&self) -> Pred {
        Pred::implies(Pred::all(self.hyps.iter().cloned()), self.concl.clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Repr<'a> {
            id: &'a str,
            forall: &'a [String],
            hyps: Vec<String>,
            concl: String,
            kind: &'static str,
            provenance: String,
        }
        serde_json::to_value(Repr {
            id: &self.id,
            forall: &self.forall,
            hyps: self.hyps.iter().map(|h| h.to_string()).collect(),
            concl: self.concl.to_string(),
            kind: self.check.tag(),
            provenance: self.provenance.to_string(),
        })
        .expect("obligation serializes")
    }
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} ({}): ", self.id, self.provenance, self.check.tag())?;
        if !self.hyps.is_empty() {
            let hs: Vec<String> = self.hyps.iter().map(|h| h.to_string()).collect();
            write!(f, "{} |- ", hs.join(", "))?;
        }
        write!(f, "{}", self.concl)
    }
}
