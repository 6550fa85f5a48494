//! Counterexample search by simulation.
//!
//! Each trial samples constants and an initial store satisfying the
//! assumptions and the precondition, runs the program with
//! [`run_sampled`](crate::hprog::run_sampled) and checks the postcondition
//! on every reachable store. Trials are spread over threads; the reported
//! counterexample is always the one with the lowest trial index.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;

use crate::discharge::{Sampler, SamplerConfig};
use crate::hprog::{run_sampled, HprogError, SampleConfig, Store};
use crate::symexpr::{eval_pred, Layered, PredEvalConfig, Valuation};
use crate::vcgen::VerifySpec;

#[derive(Debug, Clone)]
pub struct FalsifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub h: f64,
    pub horizon: f64,
    pub fuel: usize,
    pub max_states: usize,
    /// Relative tolerance for the postcondition; numeric orbits are only
    /// approximate, so this is looser than the symbolic checks.
    pub tol: f64,
    pub threads: usize,
    /// Hard sampling bounds for declared constants.
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            h: 0.01,
            horizon: 5.0,
            fuel: 4,
            max_states: 4096,
            tol: 1e-6,
            threads: std::thread::available_parallelism().map_or(4, |n| n.get()),
            ranges: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleTrace {
    pub trial: usize,
    pub seed: u64,
    pub consts: Valuation<f64>,
    pub initial: Valuation<f64>,
    /// A reachable store at which the postcondition fails.
    pub violating: Valuation<f64>,
    /// Number of reachable stores sampled in this trial.
    pub reached: usize,
}

/// Per-trial seed; a SplitMix64 step so neighbouring trials decorrelate.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

pub fn falsify(spec: &VerifySpec, cfg: &FalsifyConfig) -> Result<Option<CounterexampleTrace>, HprogError> {
    let threads = cfg.threads.max(1).min(cfg.trials.max(1));
    let best = AtomicUsize::new(usize::MAX);
    let results: Vec<Result<Option<CounterexampleTrace>, HprogError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|k| {
                let best = &best;
                scope.spawn(move || -> Result<Option<CounterexampleTrace>, HprogError> {
                    let mut i = k;
                    while i < cfg.trials {
                        if best.load(Ordering::Relaxed) < i {
                            break;
                        }
                        if let Some(cx) = run_trial(spec, cfg, i)? {
                            best.fetch_min(i, Ordering::Relaxed);
                            return Ok(Some(cx));
                        }
                        i += threads;
                    }
                    Ok(None)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("falsifier thread")).collect()
    });
    let mut found: Option<CounterexampleTrace> = None;
    for r in results {
        if let Some(cx) = r? {
            if found.as_ref().map_or(true, |f| cx.trial < f.trial) {
                found = Some(cx);
            }
        }
    }
    Ok(found)
}

/// One trial; `None` when no initial state was found or no violation seen.
pub fn run_trial(spec: &VerifySpec, cfg: &FalsifyConfig, trial: usize) -> Result<Option<CounterexampleTrace>, HprogError> {
    let seed = trial_seed(cfg.seed, trial);
    let vars: BTreeSet<String> = spec.vars.iter().cloned().collect();
    let mut names = vars.clone();
    names.extend(spec.const_names());
    let mut constraints = spec.assumptions.clone();
    constraints.push(spec.pre.clone());
    let mut sampler = Sampler::with_config(
        seed,
        SamplerConfig {
            max_attempts: 100,
            ..SamplerConfig::default()
        },
    )
    .with_ranges(cfg.ranges.clone())
    .with_preferred(vars.clone());
    let Some(v) = sampler.sample(&names, &constraints) else {
        return Ok(None);
    };
    let (initial, consts): (Valuation<f64>, Valuation<f64>) = v.into_iter().partition(|(k, _)| vars.contains(k));
    let store = Store::new(initial.clone());
    let scfg = SampleConfig {
        fuel: cfg.fuel,
        h: cfg.h,
        horizon: cfg.horizon,
        seed,
        max_states: cfg.max_states,
        pred: PredEvalConfig::tolerant(1e-9),
    };
    let out = run_sampled(&spec.program, &store, &consts, &scfg)?;
    let pcfg = PredEvalConfig {
        eq_tol: cfg.tol,
        ..PredEvalConfig::default()
    };
    for s in &out.stores {
        let env = Layered::new(s, &consts);
        if matches!(eval_pred(&spec.post, &env, &pcfg), Ok(false)) {
            return Ok(Some(CounterexampleTrace {
                trial,
                seed,
                consts,
                initial,
                violating: s.as_map().clone(),
                reached: out.stores.len(),
            }));
        }
    }
    Ok(None)
}
