//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion does. Run with `--nocapture` to see the lines.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use hybrid_wlp_core::algebra::{check_laws, LawMode, Model};
use hybrid_wlp_core::discharge::{discharge_sequent, DischargeConfig, LemmaDB};
use hybrid_wlp_core::hprog::{run_sampled, Flow, HybridProgram, SampleConfig, Store, TimeDomain, TimeKind, VectorField};
use hybrid_wlp_core::lang::{parse_pred_in, parse_spec};
use hybrid_wlp_core::odecert::{
    certify_flow, flow_state, lipschitz_estimate, rk4_integrate, CertifyConfig, LipschitzMethod,
};
use hybrid_wlp_core::symexpr::{
    diff, eval, eval_pred, int, normalize, ratio, sym, time, var, CmpOp, Expr, Pred, PredEvalConfig, Valuation,
};
use hybrid_wlp_core::vcgen::wlp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

// Pinned budgets and tolerances.
const BALL_BUDGET: Duration = Duration::from_secs(2);
const PENDULUM_BUDGET: Duration = Duration::from_secs(1);
const LAWS_BUDGET: Duration = Duration::from_secs(30);
const MUTANT_BUDGET: Duration = Duration::from_secs(10);
const LAW_TRIALS: u64 = 10_000;
const LAW_SEED: u64 = 2024;
const WLP_PROGRAMS: usize = 200;
const DIFF_REL_TOL: f64 = 1e-5;
const RK4_SUP_TOL: f64 = 1e-6;
const RK4_STEP: f64 = 1e-3;
const CONVERGENCE_RANGE: (f64, f64) = (12.0, 20.0);
const MONOID_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

/// Runs `hybrid-wlp verify FILE --json`, returning exit code, report and
/// wall time.
fn verify(path: &PathBuf) -> (i32, Value, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hybrid-wlp"))
        .args(["verify", path.to_str().unwrap(), "--json"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), report, elapsed)
}

fn obligations(r: &Value) -> Vec<Value> {
    r["obligations"].as_array().cloned().unwrap_or_default()
}

fn all_proved(r: &Value) -> Result<(), String> {
    for o in obligations(r) {
        ensure(o["verdict"] == "Proved", format!("{} is {}", o["id"], o["verdict"]))?;
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let (code, r, t) = verify(&example("bouncing_ball.hwl"));
    ensure(code == 0, format!("exit {code}"))?;
    all_proved(&r)?;
    let lemmas: Vec<&str> = r["lemmas"].as_array().unwrap().iter().map(|l| l["name"].as_str().unwrap()).collect();
    ensure(lemmas == ["bb"], format!("lemmas {lemmas:?}"))?;
    ensure(r["lemmas"][0]["status"] == "accepted", "bb lemma not accepted")?;
    let cert = obligations(&r)
        .into_iter()
        .find(|o| o["kind"] == "flow-certificate")
        .ok_or("no flow certificate")?;
    let deriv = cert["certificate"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "derivative")
        .cloned()
        .ok_or("no derivative check")?;
    ensure(deriv["pass"] == true, "derivative check failed")?;
    ensure(
        deriv["detail"].as_str().unwrap_or("").contains("symbolically"),
        "derivative check was not symbolic",
    )?;
    // independent check of the position component
    let x = sym("g") * time().pow(2) * ratio(1, 2) + var("v") * time() + var("x");
    let v = sym("g") * time() + var("v");
    ensure(normalize(&(diff(&x, "t") - v)).is_zero(), "d/dt position is not the velocity")?;
    ensure(t < BALL_BUDGET, format!("{t:?}"))?;
    Ok(format!("{} obligations proved in {t:?}", obligations(&r).len()))
}

fn criterion_2() -> Outcome {
    let (code, r, t) = verify(&example("bouncing_ball_dinv.hwl"));
    ensure(code == 0, format!("exit {code}"))?;
    all_proved(&r)?;
    let dinv = obligations(&r)
        .into_iter()
        .find(|o| o["kind"] == "diff-invariant")
        .ok_or("no differential invariant obligation")?;
    let inv = &dinv["invariant"];
    ensure(inv["fallbacks"] == 0, format!("fallbacks {}", inv["fallbacks"]))?;
    let energy = inv["rulings"]
        .as_array()
        .unwrap()
        .iter()
        .find(|ru| ru["rule"] == "eq-rule")
        .cloned()
        .ok_or("no equality atom")?;
    ensure(energy["verdict"]["method"] == "lie-normalize", format!("{}", energy["verdict"]))?;
    ensure(t < BALL_BUDGET, format!("{t:?}"))?;
    Ok(format!("energy atom by lie-normalize, 0 fallbacks, {t:?}"))
}

fn criterion_3() -> Outcome {
    let (code, r, t) = verify(&example("pendulum_inv.hwl"));
    ensure(code == 0, format!("exit {code}"))?;
    all_proved(&r)?;
    ensure(r["lemmas"].as_array().map_or(0, Vec::len) == 0, "lemmas were used")?;
    let dinv: Vec<Value> = obligations(&r).into_iter().filter(|o| o["kind"] == "diff-invariant").collect();
    ensure(dinv.len() == 1, format!("{} invariance obligations", dinv.len()))?;
    ensure(t < PENDULUM_BUDGET, format!("{t:?}"))?;
    Ok(format!("one invariance obligation, {}, {t:?}", dinv[0]["method"]))
}

fn criterion_4() -> Outcome {
    let (code, r, t) = verify(&example("pendulum_flow.hwl"));
    ensure(code == 0, format!("exit {code}"))?;
    all_proved(&r)?;
    let cert = obligations(&r)
        .into_iter()
        .find(|o| o["kind"] == "flow-certificate")
        .ok_or("no flow certificate")?;
    ensure(cert["verdict"] == "Proved", "flow not certified")?;
    // the rotation identity itself
    let names = (&["x", "y"][..], &["r"][..]);
    let hyp = parse_pred_in("x^2 + y^2 = r^2", names.0, names.1).unwrap();
    let goal = Pred::eq(
        (var("x") * time().cos() + var("y") * time().sin()).pow(2)
            + (var("y") * time().cos() - var("x") * time().sin()).pow(2),
        sym("r").pow(2),
    );
    let v = discharge_sequent(&[hyp], &goal, "rot", &LemmaDB::new(), &DischargeConfig::default());
    let method = match &v {
        hybrid_wlp_core::discharge::Verdict::Proved { method } => method.clone(),
        other => return Err(format!("rotation identity: {other}")),
    };
    ensure(method.contains("poly-identity"), method.clone())?;
    ensure(t < PENDULUM_BUDGET, format!("{t:?}"))?;
    Ok(format!("flow certified, identity by {method}, {t:?}"))
}

/// Skeleton equality up to polynomial normal forms of comparison atoms.
fn same_modulo_normal_form(a: &Pred, b: &Pred) -> bool {
    match (a, b) {
        (Pred::Cmp(o1, l1, r1), Pred::Cmp(o2, l2, r2)) => {
            o1 == o2 && normalize(&(l1.clone() - r1.clone())) == normalize(&(l2.clone() - r2.clone()))
        }
        (Pred::And(a1, b1), Pred::And(a2, b2))
        | (Pred::Or(a1, b1), Pred::Or(a2, b2))
        | (Pred::Implies(a1, b1), Pred::Implies(a2, b2)) => {
            same_modulo_normal_form(a1, a2) && same_modulo_normal_form(b1, b2)
        }
        (Pred::Not(x), Pred::Not(y)) => same_modulo_normal_form(x, y),
        (
            Pred::Forall { var: v1, guard: g1, body: b1 },
            Pred::Forall { var: v2, guard: g2, body: b2 },
        ) => v1 == v2 && same_modulo_normal_form(g1, g2) && same_modulo_normal_form(b1, b2),
        _ => a == b,
    }
}

fn criterion_5() -> Outcome {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let spec = parse_spec(&std::fs::read_to_string(golden.join("ds_constant.hwl")).unwrap()).map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(golden.join("ds_constant.wlp")).unwrap();
    let expected = parse_pred_in(text.trim(), &["x", "y"], &[]).map_err(|e| format!("golden: {e}"))?;
    let (w, _) = wlp(&spec.spec.program, &spec.spec.post).map_err(|e| e.to_string())?;
    ensure(same_modulo_normal_form(&w, &expected), format!("wlp {w}\ngolden {expected}"))?;
    Ok(format!("{w}"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut checked = 0u64;
    for model in [Model::Rel, Model::Sta] {
        let r = check_laws(model, 2, &["dioid", "antidomain", "box"], LawMode::Exhaustive).map_err(|e| e.to_string())?;
        for res in &r.results {
            ensure(res.pass, format!("{model:?} {}: {:?}", res.law, res.counterexample))?;
            checked += res.checked;
        }
        for n in [3, 4] {
            let mode = LawMode::Random {
                seed: LAW_SEED,
                trials: LAW_TRIALS,
            };
            let laws = [
                "star-unfold-left",
                "star-unfold-right",
                "star-induct-left",
                "star-induct-right",
                "inv-closure",
                "adjunction-fwd",
                "adjunction-bwd",
            ];
            let r = check_laws(model, n, &laws, mode).map_err(|e| e.to_string())?;
            for res in &r.results {
                ensure(res.pass, format!("{model:?} n={n} {}: {:?}", res.law, res.counterexample))?;
                checked += res.checked;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < LAWS_BUDGET, format!("{t:?}"))?;
    Ok(format!("{checked} instances in {t:?}"))
}

// Random loop-free discrete programs over x, y, z.
struct Gen(ChaCha8Rng);

impl Gen {
    fn expr(&mut self, depth: u32) -> Expr {
        let r = &mut self.0;
        if depth == 0 || r.gen_bool(0.4) {
            return match r.gen_range(0..4) {
                0 => int(r.gen_range(-2..=2)),
                1 => var("x"),
                2 => var("y"),
                _ => var("z"),
            };
        }
        let (a, b) = (self.expr(depth - 1), self.expr(depth - 1));
        match self.0.gen_range(0..3) {
            0 => a + b,
            1 => a - b,
            _ => a * b,
        }
    }

    fn pred(&mut self, depth: u32) -> Pred {
        if depth == 0 || self.0.gen_bool(0.5) {
            let op = [CmpOp::Eq, CmpOp::Lt, CmpOp::Le, CmpOp::Ne][self.0.gen_range(0..4)];
            return Pred::cmp(op, self.expr(2), self.expr(2));
        }
        match self.0.gen_range(0..3) {
            0 => Pred::and(self.pred(depth - 1), self.pred(depth - 1)),
            1 => Pred::or(self.pred(depth - 1), self.pred(depth - 1)),
            _ => Pred::not(self.pred(depth - 1)),
        }
    }

    fn program(&mut self, depth: u32) -> HybridProgram {
        if depth == 0 || self.0.gen_bool(0.3) {
            return match self.0.gen_range(0..8) {
                0 => HybridProgram::Skip,
                1 => HybridProgram::Abort,
                2 | 3 => HybridProgram::Test(self.pred(1)),
                _ => {
                    let x = ["x", "y", "z"][self.0.gen_range(0..3)];
                    HybridProgram::assign(x, self.expr(2))
                }
            };
        }
        match self.0.gen_range(0..3) {
            0 => HybridProgram::Seq(vec![self.program(depth - 1), self.program(depth - 1)]),
            1 => HybridProgram::Choice(vec![self.program(depth - 1), self.program(depth - 1)]),
            _ => HybridProgram::if_then_else(self.pred(1), self.program(depth - 1), self.program(depth - 1)),
        }
    }
}

fn criterion_7() -> Outcome {
    let mut g = Gen(ChaCha8Rng::seed_from_u64(7));
    let exact = PredEvalConfig::exact();
    let cfg = SampleConfig {
        pred: exact,
        ..SampleConfig::default()
    };
    let none = Valuation::new();
    let mut stores = Vec::new();
    for x in -2..=2 {
        for y in -2..=2 {
            for z in -2..=2 {
                stores.push(Store::new([("x", x as f64), ("y", y as f64), ("z", z as f64)]));
            }
        }
    }
    let mut discrepancies = 0usize;
    for _ in 0..WLP_PROGRAMS {
        let p = g.program(4);
        let q = g.pred(2);
        let (w, side) = wlp(&p, &q).map_err(|e| e.to_string())?;
        ensure(side.is_empty(), "side obligations for a discrete program")?;
        for s in &stores {
            let member = eval_pred(&w, s.as_map(), &exact).map_err(|e| e.to_string())?;
            let outs = run_sampled(&p, s, &none, &cfg).map_err(|e| e.to_string())?;
            let ok = outs
                .stores
                .iter()
                .all(|o| eval_pred(&q, o.as_map(), &exact).unwrap_or(false));
            if member != ok {
                discrepancies += 1;
            }
        }
    }
    ensure(discrepancies == 0, format!("{discrepancies} discrepancies"))?;
    Ok(format!("{WLP_PROGRAMS} programs x {} stores, 0 discrepancies", stores.len()))
}

fn ball() -> (VectorField, Flow) {
    (
        VectorField::new([("x", var("v")), ("v", sym("g"))]).unwrap(),
        Flow::new(
            [
                ("x", sym("g") * time().pow(2) * ratio(1, 2) + var("v") * time() + var("x")),
                ("v", sym("g") * time() + var("v")),
            ],
            TimeKind::AllReals,
        ),
    )
}

fn pendulum() -> (VectorField, Flow) {
    (
        VectorField::new([("x", var("y")), ("y", -var("x"))]).unwrap(),
        Flow::new(
            [
                ("x", var("x") * time().cos() + var("y") * time().sin()),
                ("y", var("y") * time().cos() - var("x") * time().sin()),
            ],
            TimeKind::AllReals,
        ),
    )
}

fn criterion_8() -> Outcome {
    // symbolic derivatives against central differences
    let regression: Vec<Expr> = vec![
        sym("a") * var("x").pow(2) * ratio(1, 2) + var("y") * var("x") + int(3),
        var("y") * var("x").cos() - sym("a") * var("x").sin(),
        var("x").pow(5) - int(3) * var("x").pow(2) + var("x"),
        (var("x") * sym("a")).exp() * var("x").sin(),
        var("x").pow(2).sin().cos(),
        (var("x").pow(2) + int(1)) / (var("y").pow(2) + int(2)),
    ];
    let mut worst_diff = 0.0f64;
    for e in &regression {
        let d = diff(e, "x");
        for i in -8..=8 {
            let x = i as f64 / 4.0;
            let env = |xx: f64| -> Valuation<f64> {
                [("x".to_string(), xx), ("y".to_string(), 0.7), ("a".to_string(), -1.3)].into()
            };
            let h = 1e-5;
            let numeric = (eval(e, &env(x + h)).unwrap() - eval(e, &env(x - h)).unwrap()) / (2.0 * h);
            let exact = eval(&d, &env(x)).unwrap();
            worst_diff = worst_diff.max((numeric - exact).abs() / exact.abs().max(1.0));
        }
    }
    ensure(worst_diff <= DIFF_REL_TOL, format!("derivative gap {worst_diff:e}"))?;

    // RK4 against the certified flows on [0, 1]
    let mut worst_rk4 = 0.0f64;
    let cases: Vec<(VectorField, Flow, Store<f64>, Valuation<f64>)> = vec![
        (ball().0, ball().1, Store::new([("x", 1.0), ("v", 0.0)]), [("g".to_string(), -9.81)].into()),
        (ball().0, ball().1, Store::new([("x", 4.0), ("v", 2.5)]), [("g".to_string(), -1.0)].into()),
        (pendulum().0, pendulum().1, Store::new([("x", 1.0), ("y", 0.0)]), Valuation::new()),
        (pendulum().0, pendulum().1, Store::new([("x", -2.0), ("y", 3.0)]), Valuation::new()),
    ];
    for (field, flow, s, c) in &cases {
        let traj = rk4_integrate(field, s, c, RK4_STEP, (1.0 / RK4_STEP) as usize).unwrap();
        for (t, st) in &traj.points {
            worst_rk4 = worst_rk4.max(st.distance(&flow_state(flow, s, c, *t).unwrap()));
        }
    }
    ensure(worst_rk4 <= RK4_SUP_TOL, format!("rk4 gap {worst_rk4:e}"))?;

    // fourth-order convergence on the rotation
    let (pf, pflow) = pendulum();
    let s = Store::new([("x", 1.0), ("y", 0.0)]);
    let err = |h: f64| {
        let steps = (2.0 / h).round() as usize;
        let end = rk4_integrate(&pf, &s, &Valuation::new(), h, steps).unwrap();
        end.last().distance(&flow_state(&pflow, &s, &Valuation::new(), 2.0).unwrap())
    };
    let ratio = err(0.1) / err(0.05);
    ensure(
        (CONVERGENCE_RANGE.0..=CONVERGENCE_RANGE.1).contains(&ratio),
        format!("convergence ratio {ratio}"),
    )?;

    // monoid action, recomputed here rather than read off the certificate
    let mut worst_monoid = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (_, flow, _, c) in &cases {
        for _ in 0..200 {
            let s = Store::new(flow.vars().into_iter().map(|x| (x, rng.gen_range(-3.0..3.0))));
            let (t1, t2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let direct = flow_state(flow, &s, c, t1 + t2).unwrap();
            let composed = flow_state(flow, &flow_state(flow, &s, c, t1).unwrap(), c, t2).unwrap();
            let scale = direct.iter().map(|(_, v)| v.abs()).fold(1.0, f64::max);
            worst_monoid = worst_monoid.max(direct.distance(&composed) / scale);
        }
    }
    ensure(worst_monoid <= MONOID_TOL, format!("monoid residual {worst_monoid:e}"))?;
    Ok(format!(
        "diff {worst_diff:.1e}, rk4 {worst_rk4:.1e}, ratio {ratio:.2}, monoid {worst_monoid:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    for m in ["ball_guard_dropped.hwl", "ball_no_flip.hwl", "pendulum_radius.hwl"] {
        let (code, r, t) = verify(&example(&format!("mutants/{m}")));
        let refuted = obligations(&r).iter().any(|o| o["verdict"] == "Refuted");
        let cx = r["counterexample"].is_object();
        ensure(code == 2 && (refuted || cx), format!("{m}: exit {code}"))?;
        ensure(t < MUTANT_BUDGET, format!("{m}: {t:?}"))?;
        lines.push(format!("{m} in {t:?}"));
    }
    Ok(lines.join(", "))
}

fn criterion_10() -> Outcome {
    let mut out = Vec::new();
    for (name, (field, flow)) in [("ball", ball()), ("pendulum", pendulum())] {
        let cert = certify_flow(&field, &flow, &TimeDomain::non_negative(), &CertifyConfig::default())
            .map_err(|e| e.to_string())?;
        let l = cert.lipschitz.ok_or(format!("{name}: no Lipschitz constant"))?;
        ensure(l.method == LipschitzMethod::ExactAffine, format!("{name}: {:?}", l.method))?;
        ensure(l.constant == 1.0, format!("{name}: {}", l.constant))?;
        let region = field.vars().into_iter().map(|x| (x, (-10.0, 10.0))).collect();
        let again = lipschitz_estimate(&field, &region, &Valuation::new(), 100, 0).map_err(|e| e.to_string())?;
        ensure(again.constant == 1.0, format!("{name}: region-independent estimate {}", again.constant))?;
        out.push(format!("{name} l = 1"));
    }
    Ok(out.join(", "))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("bouncing ball via flow", criterion_1),
        ("bouncing ball via differential invariant", criterion_2),
        ("pendulum via invariant", criterion_3),
        ("pendulum via flow", criterion_4),
        ("constant-field closed form", criterion_5),
        ("algebraic laws", criterion_6),
        ("discrete wlp soundness", criterion_7),
        ("numeric cross-checks", criterion_8),
        ("mutation detection", criterion_9),
        ("Lipschitz constants", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
