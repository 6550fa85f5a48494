//! Rejection sampling of valuations that satisfy a set of constraints.
//!
//! Names are drawn uniformly from their declared range, or from
//! `[-10, 10]` widened by a factor of two every `widen_every` rejected
//! attempts. A fraction of draws are small integers, which finds boundary
//! cases such as `x = 0` far more often than uniform draws do. Top-level
//! equalities are then solved numerically for one still-free name each.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symexpr::{eval, eval_pred, CmpOp, Expr, Pred, PredEvalConfig, Valuation};

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub default_range: (f64, f64),
    /// Attempts per call to [`Sampler::sample`] before giving up.
    pub max_attempts: usize,
    pub widen_every: usize,
    pub small_int_prob: f64,
    /// Relative tolerance used when checking the constraints.
    pub tol: f64,
    pub quant_step: f64,
    pub quant_horizon: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            default_range: (-10.0, 10.0),
            max_attempts: 400,
            widen_every: 50,
            small_int_prob: 0.2,
            tol: 1e-9,
            quant_step: 0.05,
            quant_horizon: 5.0,
        }
    }
}

impl SamplerConfig {
    pub fn pred_config(&self) -> PredEvalConfig<f64> {
        PredEvalConfig {
            eq_tol: self.tol,
            quant_step: self.quant_step,
            quant_horizon: self.quant_horizon,
        }
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
    ranges: BTreeMap<String, (f64, f64)>,
    preferred: BTreeSet<String>,
    cfg: SamplerConfig,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self::with_config(seed, SamplerConfig::default())
    }

    pub fn with_config(seed: u64, cfg: SamplerConfig) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            ranges: BTreeMap::new(),
            preferred: BTreeSet::new(),
            cfg,
        }
    }

    /// Hard bounds for some names; these are never widened.
    pub fn with_ranges(mut self, ranges: BTreeMap<String, (f64, f64)>) -> Self {
        self.ranges = ranges;
        self
    }

    /// Names to solve equalities for before any others (store variables).
    pub fn with_preferred(mut self, names: BTreeSet<String>) -> Self {
        self.preferred = names;
        self
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// A valuation of `names` satisfying every constraint, or `None` once
    /// the attempt budget is spent.
    pub fn sample(&mut self, names: &BTreeSet<String>, constraints: &[Pred]) -> Option<Valuation<f64>> {
        let eqs: Vec<(&Expr, &Expr)> = constraints
            .iter()
            .flat_map(|c| c.conjuncts())
            .filter_map(|c| match c {
                Pred::Cmp(CmpOp::Eq, a, b) => Some((a, b)),
                _ => None,
            })
            .collect();
        let pcfg = self.cfg.pred_config();
        for attempt in 0..self.cfg.max_attempts {
            let widen = 2f64.powi((attempt / self.cfg.widen_every.max(1)).min(10) as i32);
            let mut v: Valuation<f64> = names
                .iter()
                .map(|n| (n.clone(), self.draw(n, widen)))
                .collect();
            let mut solved: BTreeSet<String> = BTreeSet::new();
            let mut ok = true;
            for (a, b) in &eqs {
                let diff = (*a).clone() - (*b).clone();
                let Some(x) = self.pick_unknown(&diff, names, &solved) else {
                    continue;
                };
                match newton(&diff, &x, &mut v) {
                    Some(val) if self.in_range(&x, val) => {
                        v.insert(x.clone(), val);
                        solved.insert(x);
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let good = constraints
                .iter()
                .all(|c| matches!(eval_pred(c, &v, &pcfg), Ok(true)));
            if good {
                return Some(v);
            }
        }
        None
    }

    fn draw(&mut self, name: &str, widen: f64) -> f64 {
        let (lo, hi) = match self.ranges.get(name) {
            Some(r) => *r,
            None => {
                let (lo, hi) = self.cfg.default_range;
                (lo * widen, hi * widen)
            }
        };
        if self.rng.gen_bool(self.cfg.small_int_prob) {
            let a = lo.ceil().max(-3.0) as i64;
            let b = hi.floor().min(3.0) as i64;
            if a <= b {
                return self.rng.gen_range(a..=b) as f64;
            }
        }
        if lo < hi {
            self.rng.gen_range(lo..hi)
        } else {
            lo
        }
    }

    fn in_range(&self, name: &str, v: f64) -> bool {
        match self.ranges.get(name) {
            Some((lo, hi)) => *lo <= v && v <= *hi,
            None => v.is_finite(),
        }
    }

    /// Preferred names first, lexicographically last within each group.
    fn pick_unknown(&self, e: &Expr, names: &BTreeSet<String>, solved: &BTreeSet<String>) -> Option<String> {
        let cands: Vec<String> = e
            .names()
            .into_iter()
            .filter(|n| names.contains(n) && !solved.contains(n))
            .collect();
        cands
            .iter()
            .rev()
            .find(|n| self.preferred.contains(*n))
            .or_else(|| cands.last())
            .cloned()
    }
}

/// Solve `e = 0` for `x` by Newton's method with numeric derivatives,
/// restarting from a few fixed points when an attempt stalls.
fn newton(e: &Expr, x: &str, v: &mut Valuation<f64>) -> Option<f64> {
    let start = v.get(x).copied().unwrap_or(0.0);
    let f = |val: f64, v: &mut Valuation<f64>| -> Option<f64> {
        v.insert(x.to_string(), val);
        eval::<f64>(e, &*v).ok().filter(|y| y.is_finite())
    };
    for x0 in [start, 1.0, -1.0, 5.0, -5.0, 0.0] {
        let mut xk = x0;
        for _ in 0..60 {
            let Some(fx) = f(xk, v) else { break };
            if fx.abs() <= 1e-13 * xk.abs().max(1.0) {
                return Some(xk);
            }
            let h = 1e-7 * xk.abs().max(1.0);
            let (Some(fp), Some(fm)) = (f(xk + h, v), f(xk - h, v)) else {
                break;
            };
            let d = (fp - fm) / (2.0 * h);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let next = xk - fx / d;
            if !next.is_finite() {
                break;
            }
            if (next - xk).abs() <= 1e-15 * xk.abs().max(1.0) {
                xk = next;
                let fx = f(xk, v)?;
                if fx.abs() <= 1e-9 * xk.abs().max(1.0) {
                    return Some(xk);
                }
                break;
            }
            xk = next;
        }
    }
    None
}
