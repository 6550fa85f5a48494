use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{store_update, Evolve, Flow, HprogError, HybridProgram, Store, TimeDomain};
use crate::odecert::{rk4_signed, Stepper};
use crate::symexpr::{eval, eval_pred, Layered, Pred, PredEvalConfig, Valuation, TIME};
use crate::Scalar;

/// Resource bounds for [`run_sampled`].
#[derive(Debug, Clone, Copy)]
pub struct SampleConfig<S> {
    /// Maximum number of loop unrollings.
    pub fuel: usize,
    /// Time grid resolution for evolution commands.
    pub h: S,
    /// Evolutions are sampled on `[-horizon, horizon]` intersected with their domain.
    pub horizon: S,
    /// Seed for subsampling when a state set exceeds `max_states`.
    pub seed: u64,
    pub max_states: usize,
    pub pred: PredEvalConfig<S>,
}

impl<S: Scalar> Default for SampleConfig<S> {
    fn default() -> Self {
        Self {
            fuel: 4,
            h: S::lit(0.01),
            horizon: S::lit(5.0),
            seed: 0,
            max_states: 4096,
            pred: PredEvalConfig::default(),
        }
    }
}

/// Reachable end states; `incomplete` when fuel ran out or states were
/// dropped by subsampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome<S> {
    pub stores: Vec<Store<S>>,
    pub incomplete: bool,
}

/// Grid points `k*h` of the effective domain inside `[-horizon, horizon]`,
/// ascending.
fn grid<S: Scalar>(dom: &TimeDomain, h: S, horizon: S) -> Result<(i64, i64), HprogError> {
    if !(h > S::zero() && h.is_finite()) {
        return Err(HprogError::BadStep);
    }
    let u = dom.effective();
    let hf = h.as_f64();
    let hor = horizon.as_f64().max(0.0);
    let lo = if u.has_negative_times() {
        u.lower().map_or(-hor, |l| l.max(-hor))
    } else {
        0.0
    };
    let hi = u.upper().map_or(hor, |u| u.min(hor));
    let kmin = (lo / hf - 1e-9).ceil() as i64;
    let kmax = (hi / hf + 1e-9).floor() as i64;
    Ok((kmin, kmax))
}

fn guard_holds<S: Scalar>(
    guard: &Pred,
    s: &Store<S>,
    consts: &Valuation<S>,
    cfg: &PredEvalConfig<S>,
    t: S,
) -> Result<bool, HprogError> {
    eval_pred(guard, &Layered::new(s, consts), cfg).map_err(|e| HprogError::Eval {
        at: Some(t.as_f64()),
        source: e,
    })
}

/// Samples the guarded orbit of `flow` from `s`.
///
/// Returns the grid points `t` of the domain (ascending) such that the guard
/// holds at every grid point of the domain up to and including `t`. An
/// empty result means the guard fails at the earliest grid point.
pub fn guarded_orbit_flow<S: Scalar>(
    flow: &Flow,
    guard: &Pred,
    dom: &TimeDomain,
    s: &Store<S>,
    consts: &Valuation<S>,
    cfg: &SampleConfig<S>,
) -> Result<Vec<(S, Store<S>)>, HprogError> {
    let (kmin, kmax) = grid(dom, cfg.h, cfg.horizon)?;
    let mut env: Valuation<S> = consts.clone();
    env.extend(s.iter().map(|(k, v)| (k.to_string(), v)));
    let mut out = Vec::new();
    for k in kmin..=kmax {
        let t = S::lit(k as f64) * cfg.h;
        env.insert(TIME.to_string(), t);
        let mut next = s.clone();
        for (x, e) in flow.iter() {
            let v = eval(e, &env).map_err(|source| HprogError::Eval {
                at: Some(t.as_f64()),
                source,
            })?;
            next.set(x, v)?;
        }
        if !guard_holds(guard, &next, consts, &cfg.pred, t)? {
            break;
        }
        out.push((t, next));
    }
    Ok(out)
}

/// Guarded orbit of an evolution without a flow, by RK4 on the same grid.
fn guarded_orbit_rk4<S: Scalar>(
    ev: &Evolve,
    guard: &Pred,
    s: &Store<S>,
    consts: &Valuation<S>,
    cfg: &SampleConfig<S>,
) -> Result<Vec<(S, Store<S>)>, HprogError> {
    let (kmin, kmax) = grid(&ev.dom, cfg.h, cfg.horizon)?;
    let mut out: Vec<(S, Store<S>)> = Vec::new();
    if kmin < 0 {
        let back = rk4_signed(&ev.field, s, consts, -cfg.h, (-kmin) as usize)
            .map_err(|e| match e {
                crate::odecert::OdeError::Eval(source) => HprogError::Eval { at: None, source },
                crate::odecert::OdeError::BadStep => HprogError::BadStep,
                other => HprogError::BadDomain(other.to_string()),
            })?;
        if back.divergent {
            // the orbit does not extend back far enough on this grid
            return Ok(Vec::new());
        }
        for (t, st) in back.points.into_iter().skip(1).rev() {
            if !guard_holds(guard, &st, consts, &cfg.pred, t)? {
                return Ok(out);
            }
            out.push((t, st));
        }
    }
    if !guard_holds(guard, s, consts, &cfg.pred, S::zero())? {
        return Ok(out);
    }
    out.push((S::zero(), s.clone()));
    let mut stepper = Stepper::new(&ev.field, s, consts);
    let mut y = stepper.values(s);
    for k in 1..=kmax.max(0) {
        let t = S::lit(k as f64) * cfg.h;
        y = stepper
            .step(&y, cfg.h)
            .map_err(|source| HprogError::Eval { at: Some(t.as_f64()), source })?;
        if y.iter().any(|v| !v.is_finite()) {
            break;
        }
        let st = stepper.store(&y);
        if !guard_holds(guard, &st, consts, &cfg.pred, t)? {
            break;
        }
        out.push((t, st));
    }
    Ok(out)
}

#[derive(Default)]
struct StoreSet<S> {
    seen: HashSet<Vec<u64>>,
    items: Vec<Store<S>>,
}

impl<S: Scalar> StoreSet<S> {
    fn insert(&mut self, s: Store<S>) -> bool {
        if self.seen.insert(s.key()) {
            self.items.push(s);
            true
        } else {
            false
        }
    }
}

struct Runner<'a, S> {
    consts: &'a Valuation<S>,
    cfg: &'a SampleConfig<S>,
    rng: ChaCha8Rng,
    incomplete: bool,
}

impl<S: Scalar> Runner<'_, S> {
    fn cap(&mut self, mut v: Vec<Store<S>>) -> Vec<Store<S>> {
        if v.len() <= self.cfg.max_states {
            return v;
        }
        self.incomplete = true;
        let mut idx = sample(&mut self.rng, v.len(), self.cfg.max_states).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| std::mem::take(&mut v[i])).collect()
    }

    fn run_all(&mut self, p: &HybridProgram, inputs: Vec<Store<S>>) -> Result<Vec<Store<S>>, HprogError> {
        let mut set = StoreSet::default();
        for s in inputs {
            for out in self.run(p, &s)? {
                set.insert(out);
            }
        }
        Ok(self.cap(set.items))
    }

    fn run(&mut self, p: &HybridProgram, s: &Store<S>) -> Result<Vec<Store<S>>, HprogError> {
        let consts = self.consts;
        let holds = |c: &Pred, cfg: &SampleConfig<S>| {
            eval_pred(c, &Layered::new(s, consts), &cfg.pred).map_err(HprogError::eval)
        };
        Ok(match p {
            HybridProgram::Skip => vec![s.clone()],
            HybridProgram::Abort => Vec::new(),
            HybridProgram::Assign(x, e) => vec![store_update(s, x, e, consts)?],
            HybridProgram::Test(c) => {
                if holds(c, self.cfg)? {
                    vec![s.clone()]
                } else {
                    Vec::new()
                }
            }
            HybridProgram::Seq(ps) => {
                let mut cur = vec![s.clone()];
                for q in ps {
                    cur = self.run_all(q, cur)?;
                }
                cur
            }
            HybridProgram::Choice(ps) => {
                let mut set = StoreSet::default();
                for q in ps {
                    for out in self.run(q, s)? {
                        set.insert(out);
                    }
                }
                self.cap(set.items)
            }
            HybridProgram::If(c, a, b) => {
                if holds(c, self.cfg)? {
                    self.run(a, s)?
                } else {
                    self.run(b, s)?
                }
            }
            HybridProgram::Loop { body, .. } => {
                let mut all = StoreSet::default();
                all.insert(s.clone());
                let mut frontier = vec![s.clone()];
                for _ in 0..self.cfg.fuel {
                    // Expanding a full frontier would cost max_states orbits;
                    // visit it in random order and stop once `next` is full.
                    frontier.shuffle(&mut self.rng);
                    let mut next = Vec::new();
                    for f in &frontier {
                        if next.len() >= self.cfg.max_states {
                            self.incomplete = true;
                            break;
                        }
                        for out in self.run(body, f)? {
                            if all.insert(out.clone()) {
                                next.push(out);
                            }
                        }
                    }
                    frontier = self.cap(next);
                    if frontier.is_empty() {
                        break;
                    }
                }
                if !frontier.is_empty() {
                    self.incomplete = true;
                }
                all.items
            }
            HybridProgram::Evolve(ev) => {
                let guard = ev.full_guard();
                let pts = match &ev.flow {
                    Some(flow) => guarded_orbit_flow(flow, &guard, &ev.dom, s, consts, self.cfg)?,
                    None => guarded_orbit_rk4(ev, &guard, s, consts, self.cfg)?,
                };
                self.cap(pts.into_iter().map(|(_, st)| st).collect())
            }
            HybridProgram::EvolFlow { flow, guard, dom } => {
                let pts = guarded_orbit_flow(flow, guard, dom, s, consts, self.cfg)?;
                self.cap(pts.into_iter().map(|(_, st)| st).collect())
            }
        })
    }
}

/// Runs `p` from `s` and collects the reachable end states.
///
/// Evolution commands contribute every sampled orbit point. Determinism is
/// guaranteed for a fixed `(p, s, consts, cfg)`.
pub fn run_sampled<S: Scalar>(
    p: &HybridProgram,
    s: &Store<S>,
    consts: &Valuation<S>,
    cfg: &SampleConfig<S>,
) -> Result<SampleOutcome<S>, HprogError> {
    let mut runner = Runner {
        consts,
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        incomplete: false,
    };
    let mut set = StoreSet::default();
    for out in runner.run(p, s)? {
        set.insert(out);
    }
    Ok(SampleOutcome {
        stores: set.items,
        incomplete: runner.incomplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hprog::{TimeKind, VectorField};
    use crate::symexpr::{int, ratio, sym, time, var, Expr};

    fn consts(g: f64) -> Valuation<f64> {
        [("g".to_string(), g)].into()
    }

    fn ball_flow() -> Flow {
        Flow::new(
            [
                ("x", sym("g") * time().pow(2) * ratio(1, 2) + var("v") * time() + var("x")),
                ("v", sym("g") * time() + var("v")),
            ],
            TimeKind::AllReals,
        )
    }

    #[test]
    fn ball_orbit_stops_at_guard() {
        let s = Store::new([("x", 1.0), ("v", 0.0)]);
        let cfg = SampleConfig {
            h: 0.5,
            ..SampleConfig::default()
        };
        let pts = guarded_orbit_flow(
            &ball_flow(),
            &Pred::ge(var("x"), int(0)),
            &TimeDomain::non_negative(),
            &s,
            &consts(-1.0),
            &cfg,
        )
        .unwrap();
        let ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_flow_on_interval() {
        let flow = Flow::new([("x", var("x"))], TimeKind::AllReals);
        let dom = TimeDomain::new(TimeKind::interval(crate::Rational::from_integer(0.into()), crate::Rational::from_integer(1.into())).unwrap());
        let s = Store::new([("x", 3.0)]);
        let cfg = SampleConfig {
            h: 0.5,
            ..SampleConfig::default()
        };
        let pts = guarded_orbit_flow(&flow, &Pred::True, &dom, &s, &Valuation::new(), &cfg).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|(_, st)| *st == s));
        let none = guarded_orbit_flow(&flow, &Pred::False, &dom, &s, &Valuation::new(), &cfg).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn conditional_flip() {
        let p = HybridProgram::if_then_else(
            Pred::eq(var("x"), int(0)),
            HybridProgram::assign("v", -var("v")),
            HybridProgram::Skip,
        );
        let s = Store::new([("x", 0.0), ("v", 3.0)]);
        let out = run_sampled(&p, &s, &Valuation::new(), &SampleConfig::default()).unwrap();
        assert_eq!(out.stores, vec![Store::new([("x", 0.0), ("v", -3.0)])]);
    }

    #[test]
    fn loop_fuel_flags_incomplete() {
        let p = HybridProgram::looped(HybridProgram::assign("x", var("x") + int(1)), Pred::True);
        let s = Store::new([("x", 0.0)]);
        let cfg = SampleConfig {
            fuel: 3,
            ..SampleConfig::default()
        };
        let out = run_sampled(&p, &s, &Valuation::new(), &cfg).unwrap();
        assert_eq!(out.stores.len(), 4);
        assert!(out.incomplete);
    }

    #[test]
    fn rk4_evolution_matches_flow() {
        let field = VectorField::new([("x", var("v")), ("v", sym("g"))]).unwrap();
        let ev = Evolve::new(field, Pred::ge(var("x"), Expr::zero()), TimeDomain::non_negative());
        let s = Store::new([("x", 1.0), ("v", 0.0)]);
        let cfg = SampleConfig::default();
        let numeric = guarded_orbit_rk4(&ev, &ev.guard, &s, &consts(-1.0), &cfg).unwrap();
        let exact = guarded_orbit_flow(&ball_flow(), &ev.guard, &ev.dom, &s, &consts(-1.0), &cfg).unwrap();
        assert_eq!(numeric.len(), exact.len());
        for ((_, a), (_, b)) in numeric.iter().zip(&exact) {
            assert!(a.distance(b) <= 1e-9);
        }
    }
}
