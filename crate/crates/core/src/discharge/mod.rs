//! Arithmetic obligation discharge.
//!
//! [`discharge`] first tries to prove an obligation (polynomial identities
//! under equality substitution, Fourier–Motzkin on linear fragments, a
//! sign-directed square rule, validated lemmas), then tries to refute it by
//! sampling, and otherwise gives up with a reason. Proofs are symbolic and
//! exact; refutations are numeric witnesses that are re-checked before
//! being returned.

mod lemma;
mod linear;
mod prove;
mod sampler;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use lemma::{validate_lemma, Lemma, LemmaDB, LemmaStatus};
pub use linear::{fm_implies, fourier_motzkin, FmError, FmResult, Implication, LinAtom, FM_MAX_ROWS};
pub use prove::ProveConfig;
pub use sampler::{Sampler, SamplerConfig};

use crate::symexpr::{eval_pred, Expr, Pred, PredEvalConfig, Valuation};
use crate::vcgen::Obligation;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Proved { method: String },
    Refuted { witness: Valuation<f64> },
    Unknown { reason: String },
}

impl Verdict {
    pub fn proved(method: impl Into<String>) -> Self {
        Verdict::Proved { method: method.into() }
    }

    pub fn unknown(reason: impl Into<String>) -> Self {
        Verdict::Unknown { reason: reason.into() }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Proved { .. } => "Proved",
            Verdict::Refuted { .. } => "Refuted",
            Verdict::Unknown { .. } => "Unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Proved { method } => write!(f, "Proved ({method})"),
            Verdict::Refuted { witness } => {
                let parts: Vec<String> = witness.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                write!(f, "Refuted ({})", parts.join(", "))
            }
            Verdict::Unknown { reason } => write!(f, "Unknown ({reason})"),
        }
    }
}

/// Budget and sampling setup for [`discharge`].
#[derive(Debug, Clone)]
pub struct DischargeConfig {
    pub seed: u64,
    /// Valuations tried by the refuter.
    pub refute_trials: usize,
    /// Hard sampling bounds for declared constants.
    pub ranges: BTreeMap<String, (f64, f64)>,
    pub sampler: SamplerConfig,
    pub prove: ProveConfig,
}

impl Default for DischargeConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            refute_trials: 200,
            ranges: BTreeMap::new(),
            sampler: SamplerConfig::default(),
            prove: ProveConfig::default(),
        }
    }
}

/// Decide an arithmetic obligation. Deterministic in `(ob, db, cfg)`.
pub fn discharge(ob: &Obligation, db: &LemmaDB, cfg: &DischargeConfig) -> Verdict {
    if !ob.is_arith() {
        return Verdict::unknown(format!("`{}` is not an arithmetic obligation", ob.check.tag()));
    }
    discharge_sequent(&ob.hyps, &ob.concl, &ob.id, db, cfg)
}

/// [`discharge`] on a bare sequent; `tag` only perturbs the seed.
pub fn discharge_sequent(hyps: &[Pred], concl: &Pred, tag: &str, db: &LemmaDB, cfg: &DischargeConfig) -> Verdict {
    let prover = prove::Prover { db, cfg: &cfg.prove };
    match prover.prove(hyps, concl) {
        Ok(methods) => Verdict::proved(methods.join("+")),
        Err(reason) => match refute(hyps, concl, tag, cfg) {
            Some(witness) => Verdict::Refuted { witness },
            None => Verdict::unknown(reason),
        },
    }
}

/// Whether `w` satisfies every hypothesis and falsifies the conclusion.
pub fn violates(hyps: &[Pred], concl: &Pred, w: &Valuation<f64>, cfg: &PredEvalConfig<f64>) -> bool {
    hyps.iter().all(|h| matches!(eval_pred(h, w, cfg), Ok(true))) && matches!(eval_pred(concl, w, cfg), Ok(false))
}

fn refute(hyps: &[Pred], concl: &Pred, tag: &str, cfg: &DischargeConfig) -> Option<Valuation<f64>> {
    let mut names: BTreeSet<String> = concl.free_names();
    let mut vars: BTreeSet<String> = BTreeSet::new();
    let mut collect_vars = |p: &Pred| {
        p.walk_exprs(&mut |e| {
            if let Expr::Var(n) = e {
                vars.insert(n.clone());
            }
        })
    };
    collect_vars(concl);
    for h in hyps {
        names.extend(h.free_names());
        collect_vars(h);
    }
    let seed = cfg.seed ^ fnv(tag);
    let mut sampler = Sampler::with_config(seed, cfg.sampler.clone())
        .with_ranges(cfg.ranges.clone())
        .with_preferred(vars);
    let pcfg = cfg.sampler.pred_config();
    for _ in 0..cfg.refute_trials {
        let w = sampler.sample(&names, hyps)?;
        if matches!(eval_pred(concl, &w, &pcfg), Ok(false)) && violates(hyps, concl, &w, &pcfg) {
            return Some(w);
        }
    }
    None
}

pub(crate) fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
