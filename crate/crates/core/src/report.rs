//! End-to-end verification runs and their reports.
//!
//! [`verify_spec`] generates the obligations of a problem, routes each to
//! the matching checker (arithmetic discharge, flow certification or
//! differential invariance) and, unless everything was proved, searches for
//! a counterexample by simulation. The resulting [`Report`] serializes to
//! the JSON shape consumed by the command-line tool.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::discharge::{discharge, fnv, DischargeConfig, LemmaDB, LemmaStatus, Verdict};
use crate::hprog::{AstPath, HprogError};
use crate::lang::{SpecFile, CONFIG_KEYS};
use crate::odecert::{
    certify_flow, check_diff_invariant, falsify, CertifyConfig, CounterexampleTrace, DiffInvariantReport, DinvConfig,
    FalsifyConfig, FlowCertificate,
};
use crate::symexpr::Pred;
use crate::vcgen::{dc_split, verify, Check, Obligation, VcError, VerifySpec};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Vc(#[from] VcError),
    #[error(transparent)]
    Program(#[from] HprogError),
    #[error("config `{key}`: {msg}")]
    Config { key: String, msg: String },
}

/// Budgets and tolerances for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Falsifier trials.
    pub trials: usize,
    /// Integration step of the falsifier.
    pub step: f64,
    pub horizon: f64,
    /// Loop unrolling depth of the falsifier.
    pub fuel: usize,
    /// Relative tolerance for postconditions on simulated states.
    pub tolerance: f64,
    /// Samples per lemma during validation.
    pub lemma_trials: usize,
    pub max_states: usize,
    /// Run the falsifier when some obligation is not proved.
    pub falsify: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            step: 0.01,
            horizon: 5.0,
            fuel: 4,
            tolerance: 1e-6,
            lemma_trials: 1000,
            max_states: 4096,
            falsify: true,
        }
    }
}

/// Settings given on the command line; they win over the file's `config`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub step: Option<f64>,
    pub horizon: Option<f64>,
}

impl RunConfig {
    /// Defaults, then the file's `config` entries, then `cli`.
    pub fn resolve(file: &BTreeMap<String, Rational>, cli: &Overrides) -> Result<Self, ReportError> {
        let mut cfg = RunConfig::default();
        cfg.apply_file(file)?;
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(t) = cli.trials {
            cfg.trials = t;
        }
        if let Some(h) = cli.step {
            cfg.step = h;
        }
        if let Some(t) = cli.horizon {
            cfg.horizon = t;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, file: &BTreeMap<String, Rational>) -> Result<(), ReportError> {
        for (key, v) in file {
            let bad = |msg: &str| ReportError::Config {
                key: key.clone(),
                msg: msg.to_string(),
            };
            let count = || -> Result<usize, ReportError> {
                if !v.is_integer() {
                    return Err(bad("expected a non-negative integer"));
                }
                v.to_integer().to_usize().ok_or_else(|| bad("expected a non-negative integer"))
            };
            let real = || v.to_f64().ok_or_else(|| bad("not representable as f64"));
            match key.as_str() {
                "seed" => self.seed = count()? as u64,
                "trials" => self.trials = count()?,
                "step" => self.step = real()?,
                "horizon" => self.horizon = real()?,
                "fuel" => self.fuel = count()?,
                "tolerance" => self.tolerance = real()?,
                "lemma_trials" => self.lemma_trials = count()?,
                "max_states" => self.max_states = count()?,
                _ => return Err(bad(&format!("unknown key; expected one of {}", CONFIG_KEYS.join(", ")))),
            }
        }
        Ok(())
    }

    fn check(&self) -> Result<(), ReportError> {
        let bad = |key: &str, msg: &str| ReportError::Config {
            key: key.to_string(),
            msg: msg.to_string(),
        };
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(bad("step", "must be positive"));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(bad("horizon", "must be non-negative"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(bad("tolerance", "must be non-negative"));
        }
        Ok(())
    }

    pub fn falsify_config(&self, spec: &VerifySpec) -> FalsifyConfig {
        FalsifyConfig {
            trials: self.trials,
            seed: self.seed,
            h: self.step,
            horizon: self.horizon,
            fuel: self.fuel,
            max_states: self.max_states,
            tol: self.tolerance,
            ranges: spec.const_ranges(),
            ..FalsifyConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaEntry {
    pub name: String,
    pub statement: String,
    #[serde(flatten)]
    pub status: LemmaStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObligationResult {
    pub id: String,
    pub provenance: String,
    pub kind: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub hyps: Vec<String>,
    pub concl: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<FlowCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant: Option<DiffInvariantReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub proved: usize,
    pub refuted: usize,
    pub unknown: usize,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub problem: String,
    pub seed: u64,
    pub lemmas: Vec<LemmaEntry>,
    pub obligations: Vec<ObligationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleTrace>,
    pub summary: Summary,
}

impl Report {
    fn new(
        problem: &str,
        seed: u64,
        lemmas: Vec<LemmaEntry>,
        obligations: Vec<ObligationResult>,
        counterexample: Option<CounterexampleTrace>,
    ) -> Self {
        let count = |f: fn(&Verdict) -> bool| obligations.iter().filter(|o| f(&o.verdict)).count();
        let proved = count(Verdict::is_proved);
        let refuted = count(Verdict::is_refuted);
        let unknown = obligations.len() - proved - refuted;
        let exit_code = if refuted > 0 || counterexample.is_some() {
            2
        } else if unknown > 0 {
            1
        } else {
            0
        };
        Report {
            problem: problem.to_string(),
            seed,
            lemmas,
            summary: Summary {
                total: obligations.len(),
                proved,
                refuted,
                unknown,
                exit_code,
            },
            obligations,
            counterexample,
        }
    }

    /// 0 when everything is proved, 2 on any refutation or counterexample,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem {} (seed {})", self.problem, self.seed);
        for l in &self.lemmas {
            let status = match &l.status {
                LemmaStatus::Accepted { trials } => format!("accepted after {trials} samples"),
                LemmaStatus::Rejected { witness } => format!("REJECTED at {}", show(witness)),
                LemmaStatus::Inconclusive { reason } => format!("inconclusive: {reason}"),
            };
            let _ = writeln!(out, "lemma {}: {status}", l.name);
        }
        for o in &self.obligations {
            let _ = writeln!(out, "[{}] {} ({}): {}", o.id, o.provenance, o.kind, o.verdict);
            if let Some(c) = &o.certificate {
                for ck in &c.checks {
                    let mark = if ck.pass { "ok" } else { "FAIL" };
                    let _ = writeln!(out, "    {:<12} {mark:<4} {}", ck.name, ck.detail);
                }
                if let Some(l) = &c.lipschitz {
                    let _ = writeln!(out, "    lipschitz    {} ({:?})", l.constant, l.method);
                }
            }
            if let Some(r) = &o.invariant {
                for ru in &r.rulings {
                    let _ = writeln!(out, "    {} [{:?}]: {}", ru.atom, ru.rule, ru.verdict);
                }
            }
        }
        if let Some(cx) = &self.counterexample {
            let _ = writeln!(
                out,
                "counterexample (trial {}): consts {}; initial {}; violating {}",
                cx.trial,
                show(&cx.consts),
                show(&cx.initial),
                show(&cx.violating)
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "{} obligations: {} proved, {} refuted, {} unknown; exit {}",
            s.total, s.proved, s.refuted, s.unknown, s.exit_code
        );
        out
    }
}

fn show(v: &BTreeMap<String, f64>) -> String {
    let parts: Vec<String> = v.iter().map(|(k, x)| format!("{k} = {x}")).collect();
    parts.join(", ")
}

/// Which obligations `certify` looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CertifyScope {
    #[default]
    All,
    FlowOnly,
    DinvOnly,
}

struct Context<'a> {
    spec: &'a VerifySpec,
    db: LemmaDB,
    cfg: &'a RunConfig,
}

impl Context<'_> {
    fn discharge_config(&self) -> DischargeConfig {
        DischargeConfig {
            seed: self.cfg.seed,
            ranges: self.spec.const_ranges(),
            ..DischargeConfig::default()
        }
    }

    fn check(&self, ob: &Obligation) -> ObligationResult {
        let mut res = ObligationResult {
            id: ob.id.clone(),
            provenance: ob.provenance.to_string(),
            kind: ob.check.tag().to_string(),
            verdict: Verdict::unknown("not checked"),
            hyps: ob.hyps.iter().map(Pred::to_string).collect(),
            concl: describe_concl(ob),
            certificate: None,
            invariant: None,
        };
        match &ob.check {
            Check::Arith => res.verdict = discharge(ob, &self.db, &self.discharge_config()),
            Check::FlowCertificate { field, flow, dom } => {
                let ccfg = CertifyConfig {
                    seed: self.cfg.seed ^ fnv(&ob.id),
                    const_ranges: self.spec.const_ranges(),
                    ..CertifyConfig::default()
                };
                match certify_flow(field, flow, dom, &ccfg) {
                    Ok(cert) => {
                        res.verdict = flow_verdict(&cert);
                        res.certificate = Some(cert);
                    }
                    Err(e) => res.verdict = Verdict::unknown(e.to_string()),
                }
            }
            Check::DiffInvariant { field, dom } => {
                let dcfg = DinvConfig {
                    assumptions: ob.hyps.clone(),
                    lemmas: self.db.clone(),
                    discharge: self.discharge_config(),
                    ..DinvConfig::default()
                };
                let r = check_diff_invariant(&ob.concl, field, dom, &dcfg);
                res.verdict = r.overall.clone();
                res.invariant = Some(r);
            }
            Check::Opaque { reason } => res.verdict = Verdict::unknown(reason.clone()),
        }
        res
    }
}

fn flow_verdict(cert: &FlowCertificate) -> Verdict {
    if cert.certified() {
        return Verdict::proved("flow-certificate");
    }
    let failed: Vec<&str> = cert.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let symbolic = failed.iter().any(|n| *n == "derivative" || *n == "initial");
    match &cert.witness {
        Some(w) if symbolic => Verdict::Refuted { witness: w.clone() },
        _ => Verdict::unknown(format!("flow checks failed: {}", failed.join(", "))),
    }
}

fn describe_concl(ob: &Obligation) -> String {
    match &ob.check {
        Check::FlowCertificate { field, flow, dom } => {
            let f: Vec<String> = flow.iter().map(|(x, e)| format!("{x} := {e}")).collect();
            let v: Vec<String> = field.iter().map(|(x, e)| format!("{x}' = {e}")).collect();
            format!("flow {} solves {} on {}", f.join(", "), v.join(", "), dom)
        }
        Check::DiffInvariant { field, .. } => {
            let v: Vec<String> = field.iter().map(|(x, e)| format!("{x}' = {e}")).collect();
            format!("{} is invariant under {}", ob.concl, v.join(", "))
        }
        _ => ob.concl.to_string(),
    }
}

fn lemma_entries(db: &LemmaDB) -> Vec<LemmaEntry> {
    db.entries()
        .iter()
        .map(|(l, s)| LemmaEntry {
            name: l.name.clone(),
            statement: l.to_string(),
            status: s.clone(),
        })
        .collect()
}

/// Generate, route and check every obligation of `file`.
pub fn verify_spec(file: &SpecFile, cfg: &RunConfig) -> Result<Report, ReportError> {
    verify_program(file, &file.spec, cfg)
}

/// Applies a differential cut at `path` first; the cut's invariance
/// obligation is generated along with the others.
pub fn verify_with_cut(file: &SpecFile, path: &AstPath, cut: Pred, cfg: &RunConfig) -> Result<Report, ReportError> {
    let (program, _) = dc_split(&file.spec.program, path, cut)?;
    let spec = VerifySpec {
        program,
        ..file.spec.clone()
    };
    verify_program(file, &spec, cfg)
}

fn verify_program(file: &SpecFile, spec: &VerifySpec, cfg: &RunConfig) -> Result<Report, ReportError> {
    let obligations = verify(spec)?;
    let ctx = Context {
        spec,
        db: LemmaDB::validate(&file.lemmas, cfg.lemma_trials, cfg.seed),
        cfg,
    };
    let results: Vec<ObligationResult> = obligations.iter().map(|ob| ctx.check(ob)).collect();
    let mut counterexample = None;
    if cfg.falsify && !results.iter().all(|r| r.verdict.is_proved()) {
        counterexample = falsify(spec, &cfg.falsify_config(spec))?;
    }
    Ok(Report::new(
        &file.name,
        cfg.seed,
        lemma_entries(&ctx.db),
        results,
        counterexample,
    ))
}

/// Only the flow-certificate and differential-invariant obligations.
pub fn certify_spec(file: &SpecFile, scope: CertifyScope, cfg: &RunConfig) -> Result<Report, ReportError> {
    let obligations = verify(&file.spec)?;
    let ctx = Context {
        spec: &file.spec,
        db: LemmaDB::validate(&file.lemmas, cfg.lemma_trials, cfg.seed),
        cfg,
    };
    let results = obligations
        .iter()
        .filter(|ob| match (&ob.check, scope) {
            (Check::FlowCertificate { .. }, CertifyScope::All | CertifyScope::FlowOnly) => true,
            (Check::DiffInvariant { .. }, CertifyScope::All | CertifyScope::DinvOnly) => true,
            _ => false,
        })
        .map(|ob| ctx.check(ob))
        .collect();
    Ok(Report::new(&file.name, cfg.seed, lemma_entries(&ctx.db), results, None))
}

pub fn falsify_spec(file: &SpecFile, cfg: &RunConfig) -> Result<Option<CounterexampleTrace>, ReportError> {
    Ok(falsify(&file.spec, &cfg.falsify_config(&file.spec))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_spec;

    const SMALL: &str = "problem inc\nvars x\npre x >= 0\npost x >= 1\nprogram x := x + 1\n";

    #[test]
    fn proved_report_exits_zero() {
        let f = parse_spec(SMALL).unwrap();
        let r = verify_spec(&f, &RunConfig::default()).unwrap();
        assert_eq!(r.exit_code(), 0, "{}", r.render_text());
        let j = r.to_json();
        assert_eq!(j["obligations"][0]["verdict"], "Proved");
        assert!(j["obligations"][0]["method"].is_string());
    }

    #[test]
    fn refuted_report_exits_two() {
        let f = parse_spec(&SMALL.replace("x + 1", "x + 1/2")).unwrap();
        let r = verify_spec(&f, &RunConfig::default()).unwrap();
        assert_eq!(r.exit_code(), 2);
        assert_eq!(r.summary.refuted, 1);
        assert!(r.to_json()["obligations"][0]["witness"].is_object());
    }

    #[test]
    fn config_precedence() {
        let file: BTreeMap<String, Rational> = [
            ("seed".to_string(), Rational::from_integer(7.into())),
            ("trials".to_string(), Rational::from_integer(50.into())),
        ]
        .into();
        let cfg = RunConfig::resolve(
            &file,
            &Overrides {
                seed: Some(3),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.step, RunConfig::default().step);
    }

    #[test]
    fn bad_config_rejected() {
        let file: BTreeMap<String, Rational> = [("fuel".to_string(), Rational::new(1.into(), 2.into()))].into();
        assert!(matches!(
            RunConfig::resolve(&file, &Overrides::default()),
            Err(ReportError::Config { .. })
        ));
    }
}
