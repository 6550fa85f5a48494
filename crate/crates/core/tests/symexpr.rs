//! Property tests for expressions and predicates, checked against plain
//! floating-point evaluation as the oracle.

use std::collections::BTreeMap;

use hybrid_wlp_core::lang::{parse_expr_in, parse_pred_in};
use hybrid_wlp_core::symexpr::{
    diff, eval, eval_pred, int, is_nnf, nnf, normalize, ratio, substitute, sym, var, CmpOp, Expr, Pred,
    PredEvalConfig, Substitution, Valuation,
};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-4i64..=4).prop_map(int),
        (-3i64..=3, 1i64..=4).prop_map(|(n, d)| ratio(n, d)),
        Just(var("x")),
        Just(var("y")),
        Just(sym("a")),
    ]
}

/// Polynomial-ish expressions with occasional transcendental atoms.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), 0u32..=3).prop_map(|(a, n)| a.pow(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            (inner.clone(), 1i64..=3).prop_map(|(a, k)| a / int(k)),
        ]
    })
}

fn env(x: f64, y: f64, a: f64) -> Valuation<f64> {
    [("x".to_string(), x), ("y".to_string(), y), ("a".to_string(), a)].into()
}

fn close(u: f64, v: f64, rel: f64) -> bool {
    (u - v).abs() <= rel * u.abs().max(v.abs()).max(1.0)
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
    ]
}

fn pred() -> impl Strategy<Value = Pred> {
    let atom = (cmp_op(), leaf(), leaf()).prop_map(|(op, a, b)| Pred::cmp(op, a, b));
    atom.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::implies(a, b)),
            inner.clone().prop_map(Pred::not),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normal_form_evaluates_like_the_original(e in expr(), x in -2.0..2.0f64, y in -2.0..2.0f64, a in -2.0..2.0f64) {
        let v = env(x, y, a);
        let n = normalize(&e);
        let lhs = eval(&e, &v).unwrap();
        let rhs = eval(&n.poly.to_expr(), &v).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9), "{e} = {lhs} but normal form {} = {rhs}", n.poly);
    }

    #[test]
    fn derivative_matches_central_differences(e in expr(), x in -2.0..2.0f64, y in -2.0..2.0f64, a in -2.0..2.0f64) {
        let d = diff(&e, "x");
        let h = 1e-5;
        let f = |xx: f64| eval(&e, &env(xx, y, a)).unwrap();
        let numeric = (f(x + h) - f(x - h)) / (2.0 * h);
        let exact = eval(&d, &env(x, y, a)).unwrap();
        let scale = exact.abs().max(f(x).abs()).max(1.0);
        prop_assert!((numeric - exact).abs() <= 1e-5 * scale, "d/dx {e}: {exact} vs {numeric}");
    }

    #[test]
    fn substitution_commutes_with_evaluation(e in expr(), s in expr(), x in -2.0..2.0f64, y in -2.0..2.0f64, a in -2.0..2.0f64) {
        let v = env(x, y, a);
        let sub: Substitution = [("x".to_string(), s.clone())].into();
        let lhs = eval(&substitute(&e, &sub), &v).unwrap();
        let rhs = eval(&e, &env(eval(&s, &v).unwrap(), y, a)).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn nnf_is_equivalent(p in pred(), x in -3i64..=3, y in -3i64..=3, a in -3i64..=3) {
        let v = env(x as f64, y as f64, a as f64);
        let n = nnf(&p);
        prop_assert!(is_nnf(&n));
        let cfg = PredEvalConfig::exact();
        prop_assert_eq!(eval_pred(&p, &v, &cfg).unwrap(), eval_pred(&n, &v, &cfg).unwrap());
    }

    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let text = e.to_string();
        let back = parse_expr_in(&text, &["x", "y"], &["a"]).unwrap();
        prop_assert!(normalize(&(back.clone() - e.clone())).is_zero(), "{text} reparsed as {back}");
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn printed_predicates_parse_back(p in pred()) {
        let text = p.to_string();
        let back = parse_pred_in(&text, &["x", "y"], &["a"]).unwrap();
        prop_assert_eq!(back.to_string(), text);
    }
}

/// Expressions the numeric cross-check is pinned on.
fn regression_set() -> Vec<(&'static str, Expr)> {
    let (x, y, a) = (var("x"), var("y"), sym("a"));
    vec![
        ("ball position", a.clone() * x.clone().pow(2) * ratio(1, 2) + y.clone() * x.clone() + int(3)),
        ("rotation", y.clone() * x.clone().cos() - a.clone() * x.clone().sin()),
        ("quintic", x.clone().pow(5) - int(3) * x.clone().pow(2) + x.clone()),
        ("exp chain", (x.clone() * a.clone()).exp() * x.clone().sin()),
        ("nested trig", (x.clone().pow(2)).sin().cos()),
        ("quotient", (x.clone().pow(2) + int(1)) / (y.clone().pow(2) + int(2))),
    ]
}

#[test]
fn regression_set_derivatives() {
    let h = 1e-5;
    for (name, e) in regression_set() {
        let d = diff(&e, "x");
        for i in -8..=8 {
            let x = i as f64 / 4.0;
            let f = |xx: f64| eval(&e, &env(xx, 0.7, -1.3)).unwrap();
            let numeric = (f(x + h) - f(x - h)) / (2.0 * h);
            let exact = eval(&d, &env(x, 0.7, -1.3)).unwrap();
            assert!(
                (numeric - exact).abs() <= 1e-5 * exact.abs().max(1.0),
                "{name} at x = {x}: {exact} vs {numeric}"
            );
        }
    }
}

#[test]
fn pythagorean_identity_normalises_to_zero() {
    let t = var("x");
    let e = t.clone().sin().pow(2) + t.cos().pow(2) - int(1);
    assert!(normalize(&e).is_zero());
}

#[test]
fn unbound_names_are_reported() {
    let e = var("z") + int(1);
    let v: BTreeMap<String, f64> = BTreeMap::new();
    assert!(eval(&e, &v).is_err());
}
