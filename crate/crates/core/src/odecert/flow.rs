//! Certifying a user-supplied flow against its vector field.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::rk4::rk4_integrate;
use super::OdeError;
use crate::hprog::{Flow, Store, TimeDomain, TimeKind, VectorField};
use crate::symexpr::{
    diff, eval, expr_eq, normalize, substitute, EqualityConfig, ExprEquality, Layered, Substitution, Valuation,
    TIME,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LipschitzMethod {
    ExactAffine,
    /// Largest observed difference quotient; a lower bound only.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lipschitz {
    pub constant: f64,
    pub method: LipschitzMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowCertificate {
    pub field: BTreeMap<String, String>,
    pub flow: BTreeMap<String, String>,
    pub domain: String,
    pub lipschitz: Option<Lipschitz>,
    pub checks: Vec<ConditionCheck>,
    pub warnings: Vec<String>,
    /// Valuation at which a symbolic check failed.
    pub witness: Option<Valuation<f64>>,
}

impl FlowCertificate {
    /// Issued only if the symbolic checks (and the numeric ones that ran)
    /// all passed.
    pub fn certified(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct CertifyConfig {
    pub seed: u64,
    pub monoid_samples: usize,
    pub monoid_tol: f64,
    pub rk4_samples: usize,
    pub rk4_step: f64,
    pub rk4_span: f64,
    pub rk4_tol: f64,
    /// Accept a derivative identity the normaliser could not close but
    /// sampling found no disagreement with.
    pub accept_likely_equal: bool,
    /// Sampling interval for states and constants in the numeric checks.
    pub range: (f64, f64),
    /// Declared constant ranges; override `range` for those names.
    pub const_ranges: BTreeMap<String, (f64, f64)>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            monoid_samples: 200,
            monoid_tol: 1e-9,
            rk4_samples: 20,
            rk4_step: 1e-3,
            rk4_span: 1.0,
            rk4_tol: 1e-6,
            accept_likely_equal: false,
            range: (-3.0, 3.0),
            const_ranges: BTreeMap::new(),
        }
    }
}

/// `phi(t, s)` for a numeric state and time.
pub fn flow_state(flow: &Flow, s: &Store<f64>, consts: &Valuation<f64>, t: f64) -> Result<Store<f64>, OdeError> {
    let tv: Valuation<f64> = [(TIME.to_string(), t)].into();
    let base = Layered::new(s, consts);
    let env = Layered::new(&tv, &base);
    let mut out = s.clone();
    for (x, e) in flow.iter() {
        let v = eval(e, &env)?;
        out.set(x, v).map_err(|_| OdeError::VariableMismatch)?;
    }
    Ok(out)
}

/// Run the symbolic and numeric flow checks.
///
/// The derivative identity `d/dt phi_x = f_x[phi]` and the initial condition
/// `phi(0) = id` are symbolic. The domain check asks that the query domain
/// lies inside the flow's claimed interval of existence. The monoid-action
/// check (only for flows on all of `R`) and the RK4 comparison are numeric.
pub fn certify_flow(
    field: &VectorField,
    flow: &Flow,
    dom: &TimeDomain,
    cfg: &CertifyConfig,
) -> Result<FlowCertificate, OdeError> {
    if field.vars() != flow.vars() {
        return Err(OdeError::VariableMismatch);
    }
    let mut cert = FlowCertificate {
        field: field.iter().map(|(k, e)| (k.to_string(), e.to_string())).collect(),
        flow: flow.iter().map(|(k, e)| (k.to_string(), e.to_string())).collect(),
        domain: dom.to_string(),
        lipschitz: None,
        checks: Vec::new(),
        warnings: Vec::new(),
        witness: None,
    };
    let eqcfg = EqualityConfig {
        seed: cfg.seed,
        ..EqualityConfig::default()
    };

    // (a) derivative identity
    let phi: Substitution = flow.as_map().clone();
    let mut failures = Vec::new();
    for (x, fx) in field.iter() {
        let lhs = diff(flow.get(x).expect("same variables"), TIME);
        let rhs = substitute(fx, &phi);
        match expr_eq(&lhs, &rhs, &eqcfg) {
            ExprEquality::Equal => {}
            ExprEquality::Unknown(why) => {
                if cfg.accept_likely_equal {
                    cert.warnings.push(format!("d/dt {x}: {why}"));
                } else {
                    failures.push(format!("d/dt {x}: {why}"));
                }
            }
            ExprEquality::NotEqual(w) => {
                failures.push(format!("d/dt {x}: {lhs} differs from {rhs}"));
                cert.witness.get_or_insert(w);
            }
        }
    }
    cert.checks.push(ConditionCheck {
        name: "derivative",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "d/dt phi = f(phi) holds symbolically".into()
        } else {
            failures.join("; ")
        },
    });

    // (b) initial condition
    let zero: Substitution = [(TIME.to_string(), crate::symexpr::Expr::zero())].into();
    let mut bad = Vec::new();
    for (x, e) in flow.iter() {
        let at0 = substitute(e, &zero);
        let var = crate::symexpr::var(x);
        if !normalize(&(at0.clone() - var.clone())).is_zero() {
            if let ExprEquality::NotEqual(w) = expr_eq(&at0, &var, &eqcfg) {
                cert.witness.get_or_insert(w);
            }
            bad.push(format!("phi_{x}(0) = {at0}"));
        }
    }
    cert.checks.push(ConditionCheck {
        name: "initial",
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            "phi(0) = id".into()
        } else {
            bad.join("; ")
        },
    });

    // (c) query domain inside the interval of existence
    let inside = dom.effective().subset_of(&flow.domain_t);
    cert.checks.push(ConditionCheck {
        name: "domain",
        pass: inside,
        detail: format!("{} within {}", dom.effective(), flow.domain_t),
    });

    if !cert.certified() {
        return Ok(cert);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let consts_names: BTreeSet<String> = flow
        .iter()
        .flat_map(|(_, e)| e.names())
        .chain(field.iter().flat_map(|(_, e)| e.names()))
        .filter(|n| !field.vars().contains(n) && n != TIME)
        .collect();
    let draw = |rng: &mut ChaCha8Rng| -> (Store<f64>, Valuation<f64>) {
        let s = Store::new(field.vars().into_iter().map(|x| {
            let v = rng.gen_range(cfg.range.0..cfg.range.1);
            (x, v)
        }));
        let c: Valuation<f64> = consts_names
            .iter()
            .map(|n| {
                let (lo, hi) = cfg.const_ranges.get(n).copied().unwrap_or(cfg.range);
                (n.clone(), if lo < hi { rng.gen_range(lo..hi) } else { lo })
            })
            .collect();
        (s, c)
    };

    // (d) monoid action
    if flow.domain_t == TimeKind::AllReals {
        let mut worst = 0.0f64;
        for _ in 0..cfg.monoid_samples {
            let (s, c) = draw(&mut rng);
            let t1 = rng.gen_range(-1.0..1.0);
            let t2 = rng.gen_range(-1.0..1.0);
            let direct = flow_state(flow, &s, &c, t1 + t2)?;
            let mid = flow_state(flow, &s, &c, t2)?;
            let composed = flow_state(flow, &mid, &c, t1)?;
            worst = worst.max(relative_gap(&direct, &composed));
        }
        cert.checks.push(ConditionCheck {
            name: "monoid",
            pass: worst <= cfg.monoid_tol,
            detail: format!("max residual {worst:.3e} over {} samples", cfg.monoid_samples),
        });
    } else {
        cert.warnings.push("monoid-action check skipped: flow is not global".into());
    }

    // (e) RK4 cross-check on [0, span]
    let span = dom.effective().upper().map_or(cfg.rk4_span, |u| u.min(cfg.rk4_span));
    let steps = (span / cfg.rk4_step).round() as usize;
    let mut worst = 0.0f64;
    for _ in 0..cfg.rk4_samples {
        let (s, c) = draw(&mut rng);
        let traj = rk4_integrate(field, &s, &c, cfg.rk4_step, steps)?;
        for (t, st) in &traj.points {
            let exact = flow_state(flow, &s, &c, *t)?;
            worst = worst.max(relative_gap(st, &exact));
        }
        if traj.divergent {
            worst = f64::INFINITY;
        }
    }
    cert.checks.push(ConditionCheck {
        name: "rk4",
        pass: worst <= cfg.rk4_tol,
        detail: format!("max deviation {worst:.3e} on [0, {span}] at h = {}", cfg.rk4_step),
    });

    // Lipschitz constant, when the coefficients do not depend on constants.
    let region: BTreeMap<String, (f64, f64)> = field.vars().into_iter().map(|x| (x, cfg.range)).collect();
    if let Ok(l) = lipschitz_estimate(field, &region, &Valuation::new(), 200, cfg.seed) {
        cert.lipschitz = Some(l);
    }
    Ok(cert)
}

/// Sup-norm gap scaled by `max(1, |values|)`.
fn relative_gap(a: &Store<f64>, b: &Store<f64>) -> f64 {
    let mut worst = 0.0f64;
    for (k, x) in a.iter() {
        let y = b.get(k).unwrap_or(f64::NAN);
        let scale = 1f64.max(x.abs()).max(y.abs());
        let g = (x - y).abs() / scale;
        worst = if g.is_nan() { f64::INFINITY } else { worst.max(g) };
    }
    worst
}

/// Lipschitz constant of `field` in the sup norm over a box.
///
/// Affine fields get the exact max-row-sum norm of their coefficient
/// matrix (coefficients may mention constants, evaluated in `consts`).
/// Anything else gets the largest difference quotient over `samples`
/// random pairs from `region`, which only bounds the constant from below.
pub fn lipschitz_estimate(
    field: &VectorField,
    region: &BTreeMap<String, (f64, f64)>,
    consts: &Valuation<f64>,
    samples: usize,
    seed: u64,
) -> Result<Lipschitz, OdeError> {
    let vars = field.vars();
    for x in &vars {
        match region.get(x) {
            Some((lo, hi)) if lo.is_finite() && hi.is_finite() && lo < hi => {}
            _ => return Err(OdeError::DegenerateRegion(x.clone())),
        }
    }
    if samples < 2 {
        return Err(OdeError::TooFewSamples);
    }
    if let Some(rows) = affine_rows(field, &vars, consts) {
        let constant = rows.into_iter().fold(0.0f64, f64::max);
        return Ok(Lipschitz {
            constant,
            method: LipschitzMethod::ExactAffine,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| -> Store<f64> {
        Store::new(vars.iter().map(|x| {
            let (lo, hi) = region[x];
            (x.clone(), rng.gen_range(lo..hi))
        }))
    };
    let eval_field = |s: &Store<f64>| -> Result<Store<f64>, OdeError> {
        let env = Layered::new(s, consts);
        let mut out = s.clone();
        for (x, e) in field.iter() {
            out.set(x, eval(e, &env)?).map_err(|_| OdeError::VariableMismatch)?;
        }
        Ok(out)
    };
    let mut best = 0.0f64;
    for _ in 0..samples {
        let (a, b) = (point(&mut rng), point(&mut rng));
        let d = a.distance(&b);
        if d == 0.0 {
            continue;
        }
        let q = eval_field(&a)?.distance(&eval_field(&b)?) / d;
        if q.is_finite() {
            best = best.max(q);
        }
    }
    Ok(Lipschitz {
        constant: best,
        method: LipschitzMethod::Sampled,
    })
}

/// Absolute row sums of the coefficient matrix, or `None` if some
/// component is not affine in the variables.
fn affine_rows(field: &VectorField, vars: &BTreeSet<String>, consts: &Valuation<f64>) -> Option<Vec<f64>> {
    let mut rows = Vec::new();
    for (_, e) in field.iter() {
        let nf = normalize(e);
        if nf.has_opaque {
            return None;
        }
        // coefficient of each variable, as a polynomial in the constants
        let mut coeffs: BTreeMap<String, crate::symexpr::Poly> = BTreeMap::new();
        for (m, c) in nf.poly.terms() {
            let mut var_part: Option<String> = None;
            let mut rest = crate::symexpr::Monomial::one();
            for (a, k) in m.factors() {
                let names = a.names();
                if names.iter().any(|n| vars.contains(n)) {
                    match (a.name(), k, &var_part) {
                        (Some(n), 1, None) if vars.contains(n) => var_part = Some(n.to_string()),
                        _ => return None,
                    }
                } else {
                    rest = rest.mul(&crate::symexpr::Monomial::atom_pow(a.clone(), k));
                }
            }
            if let Some(v) = var_part {
                coeffs
                    .entry(v)
                    .or_default()
                    .add_term(rest, c.clone());
            }
        }
        let mut sum = 0.0;
        for p in coeffs.values() {
            sum += eval(&p.to_expr(), consts).ok()?.abs();
        }
        rows.push(sum);
    }
    Some(rows)
}
