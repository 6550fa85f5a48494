//! User-declared arithmetic lemmas and their randomized validation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::prove::Fact;
use super::sampler::Sampler;
use crate::symexpr::{eval_pred, Pred, Valuation};

/// A user-declared arithmetic fact `hyps => concl`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma {
    pub name: String,
    pub hyps: Vec<Pred>,
    pub concl: Pred,
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hs: Vec<String> = self.hyps.iter().map(|h| h.to_string()).collect();
        write!(f, "{}: {} => {}", self.name, hs.join(", "), self.concl)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LemmaStatus {
    Accepted { trials: usize },
    Rejected { witness: Valuation<f64> },
    Inconclusive { reason: String },
}

impl LemmaStatus {
    pub fn is_accepted(&self) -> bool {
        matches!(self, LemmaStatus::Accepted { .. })
    }
}

/// Sample `trials` valuations satisfying the hypotheses and check the
/// conclusion at each.
pub fn validate_lemma(l: &Lemma, trials: usize, seed: u64) -> LemmaStatus {
    let mut names: BTreeSet<String> = l.concl.free_names();
    for h in &l.hyps {
        names.extend(h.free_names());
    }
    let mut sampler = Sampler::new(seed);
    let pcfg = sampler.config().pred_config();
    for _ in 0..trials {
        let Some(v) = sampler.sample(&names, &l.hyps) else {
            return LemmaStatus::Inconclusive {
                reason: "hypotheses unsatisfiable within the sampling budget".into(),
            };
        };
        match eval_pred(&l.concl, &v, &pcfg) {
            Ok(true) => {}
            Ok(false) => return LemmaStatus::Rejected { witness: v },
            Err(e) => {
                return LemmaStatus::Inconclusive {
                    reason: format!("conclusion not evaluable: {e}"),
                }
            }
        }
    }
    LemmaStatus::Accepted { trials }
}

#[derive(Debug, Clone)]
pub(crate) struct ReadyLemma {
    pub name: String,
    pub hyps: Vec<Fact>,
    pub concl: Vec<Fact>,
}

/// Lemmas with their validation outcome. Only accepted lemmas whose
/// hypotheses and conclusion are conjunctions of comparisons are usable.
#[derive(Debug, Clone, Default)]
pub struct LemmaDB {
    entries: Vec<(Lemma, LemmaStatus)>,
    ready: Vec<ReadyLemma>,
}

impl LemmaDB {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn validate(lemmas: &[Lemma], trials: usize, seed: u64) -> Self {
        let mut db = Self::new();
        for (i, l) in lemmas.iter().enumerate() {
            let status = validate_lemma(l, trials, seed.wrapping_add(i as u64));
            db.insert(l.clone(), status);
        }
        db
    }

    /// Record a lemma with a status obtained elsewhere.
    pub fn insert(&mut self, l: Lemma, status: LemmaStatus) {
        if status.is_accepted() {
            let facts = |ps: &[Pred]| -> Option<Vec<Fact>> {
                let mut out = Vec::new();
                for p in ps {
                    for c in p.conjuncts() {
                        out.push(Fact::from_pred(c)?);
                    }
                }
                Some(out)
            };
            if let (Some(hyps), Some(concl)) = (facts(&l.hyps), facts(std::slice::from_ref(&l.concl))) {
                self.ready.push(ReadyLemma {
                    name: l.name.clone(),
                    hyps,
                    concl,
                });
            }
        }
        self.entries.push((l, status));
    }

    pub fn entries(&self) -> &[(Lemma, LemmaStatus)] {
        &self.entries
    }

    pub fn status(&self, name: &str) -> Option<&LemmaStatus> {
        self.entries.iter().find(|(l, _)| l.name == name).map(|(_, s)| s)
    }

    pub(crate) fn ready(&self) -> &[ReadyLemma] {
        &self.ready
    }
}
