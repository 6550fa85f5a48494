//! Flow certification and integration checked against closed forms.

use std::collections::BTreeMap;

use hybrid_wlp_core::hprog::{Flow, Store, TimeDomain, TimeKind, VectorField};
use hybrid_wlp_core::lang::parse_spec;
use hybrid_wlp_core::odecert::{
    certify_flow, check_diff_invariant, falsify, flow_state, lipschitz_estimate, rk4_integrate, CertifyConfig,
    DinvConfig, FalsifyConfig, LipschitzMethod,
};
use hybrid_wlp_core::symexpr::{int, ratio, sym, time, var, Expr, Valuation};
use proptest::prelude::*;

fn ball() -> (VectorField, Flow) {
    let field = VectorField::new([("x", var("v")), ("v", sym("g"))]).unwrap();
    let flow = Flow::new(
        [
            ("x", sym("g") * time().pow(2) * ratio(1, 2) + var("v") * time() + var("x")),
            ("v", sym("g") * time() + var("v")),
        ],
        TimeKind::AllReals,
    );
    (field, flow)
}

fn pendulum() -> (VectorField, Flow) {
    let field = VectorField::new([("x", var("y")), ("y", -var("x"))]).unwrap();
    let flow = Flow::new(
        [
            ("x", var("x") * time().cos() + var("y") * time().sin()),
            ("y", var("y") * time().cos() - var("x") * time().sin()),
        ],
        TimeKind::AllReals,
    );
    (field, flow)
}

/// Closed-form rotation, written out independently of the flow above.
fn rotation(x0: f64, y0: f64, t: f64) -> (f64, f64) {
    (x0 * t.cos() + y0 * t.sin(), y0 * t.cos() - x0 * t.sin())
}

fn sup_gap_to_flow(field: &VectorField, flow: &Flow, s: &Store<f64>, c: &Valuation<f64>) -> f64 {
    let traj = rk4_integrate(field, s, c, 1e-3, 1000).unwrap();
    traj.points
        .iter()
        .map(|(t, st)| st.distance(&flow_state(flow, s, c, *t).unwrap()))
        .fold(0.0, f64::max)
}

#[test]
fn rk4_tracks_certified_flows_on_unit_interval() {
    let (bf, bflow) = ball();
    let (pf, pflow) = pendulum();
    for (x, v, g) in [(1.0, 0.0, -9.81), (5.0, 2.0, -1.0), (0.0, -3.0, -20.0)] {
        let s = Store::new([("x", x), ("v", v)]);
        let c: Valuation<f64> = [("g".to_string(), g)].into();
        assert!(sup_gap_to_flow(&bf, &bflow, &s, &c) <= 1e-6);
    }
    for (x, y) in [(1.0, 0.0), (-2.0, 0.5), (3.0, 3.0)] {
        let s = Store::new([("x", x), ("y", y)]);
        assert!(sup_gap_to_flow(&pf, &pflow, &s, &Valuation::new()) <= 1e-6);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let (field, _) = pendulum();
    let s = Store::new([("x", 1.0), ("y", 0.0)]);
    let err = |h: f64| {
        let steps = (2.0 / h).round() as usize;
        let end = rk4_integrate(&field, &s, &Valuation::new(), h, steps).unwrap();
        let (x, y) = rotation(1.0, 0.0, 2.0);
        let last = end.last();
        (last.get("x").unwrap() - x).abs().max((last.get("y").unwrap() - y).abs())
    };
    let ratio = err(0.1) / err(0.05);
    assert!((12.0..=20.0).contains(&ratio), "convergence ratio {ratio}");
}

#[test]
fn quarter_turn() {
    let (field, _) = pendulum();
    let s = Store::new([("x", 1.0), ("y", 0.0)]);
    let steps = (std::f64::consts::FRAC_PI_2 / 1e-3).round() as usize;
    let h = std::f64::consts::FRAC_PI_2 / steps as f64;
    let end = rk4_integrate(&field, &s, &Valuation::new(), h, steps).unwrap();
    assert!(end.last().get("x").unwrap().abs() <= 1e-6);
    assert!((end.last().get("y").unwrap() + 1.0).abs() <= 1e-6);
}

#[test]
fn monoid_action_residual() {
    let (_, flow) = pendulum();
    let c = Valuation::new();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let t1 = -1.0 + i as f64 * 0.1;
        let t2 = 0.7 - i as f64 * 0.05;
        let s = Store::new([("x", 0.3 * i as f64 - 2.0), ("y", 1.5)]);
        let direct = flow_state(&flow, &s, &c, t1 + t2).unwrap();
        let composed = flow_state(&flow, &flow_state(&flow, &s, &c, t1).unwrap(), &c, t2).unwrap();
        worst = worst.max(direct.distance(&composed));
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn certificates_for_both_examples() {
    for (field, flow) in [ball(), pendulum()] {
        let cert = certify_flow(&field, &flow, &TimeDomain::non_negative(), &CertifyConfig::default()).unwrap();
        assert!(cert.certified(), "{cert:?}");
        let l = cert.lipschitz.expect("lipschitz");
        assert_eq!(l.method, LipschitzMethod::ExactAffine);
        assert_eq!(l.constant, 1.0);
    }
}

#[test]
fn damped_flow_is_not_a_rotation() {
    let (field, _) = pendulum();
    let wrong = Flow::new(
        [
            ("x", var("x") * time().cos() + var("y") * time().sin()),
            ("y", var("y") * time().cos() + var("x") * time().sin()),
        ],
        TimeKind::AllReals,
    );
    let cert = certify_flow(&field, &wrong, &TimeDomain::all_reals(), &CertifyConfig::default()).unwrap();
    assert!(!cert.certified());
    assert!(!cert.check("derivative").unwrap().pass);
    assert!(cert.witness.is_some());
}

#[test]
fn nonlinear_lipschitz_is_sampled_lower_bound() {
    // x' = x^2 on [-1, 1] has constant 2
    let field = VectorField::new([("x", var("x").pow(2))]).unwrap();
    let region: BTreeMap<String, (f64, f64)> = [("x".to_string(), (-1.0, 1.0))].into();
    let l = lipschitz_estimate(&field, &region, &Valuation::new(), 2000, 5).unwrap();
    assert_eq!(l.method, LipschitzMethod::Sampled);
    assert!(l.constant <= 2.0 && l.constant > 1.5, "{}", l.constant);
}

fn affine_field() -> impl Strategy<Value = VectorField> {
    prop::collection::vec(-3i64..=3, 6).prop_map(|c| {
        let comp = |a: i64, b: i64, k: i64| int(a) * var("x") + int(b) * var("y") + int(k);
        VectorField::new([("x", comp(c[0], c[1], c[2])), ("y", comp(c[3], c[4], c[5]))]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn affine_lipschitz_bounds_difference_quotients(
        field in affine_field(),
        pts in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 50),
    ) {
        let region: BTreeMap<String, (f64, f64)> = [("x".to_string(), (-3.0, 3.0)), ("y".to_string(), (-3.0, 3.0))].into();
        let l = lipschitz_estimate(&field, &region, &Valuation::new(), 10, 0).unwrap();
        prop_assert_eq!(l.method, LipschitzMethod::ExactAffine);
        let f = |x: f64, y: f64| -> (f64, f64) {
            let ev = |e: &Expr| hybrid_wlp_core::symexpr::eval(e, &[("x".to_string(), x), ("y".to_string(), y)].into_iter().collect::<Valuation<f64>>()).unwrap();
            (ev(field.get("x").unwrap()), ev(field.get("y").unwrap()))
        };
        for (a, b, c, d) in pts {
            let (fa, fb) = (f(a, b), f(c, d));
            let num = (fa.0 - fb.0).abs().max((fa.1 - fb.1).abs());
            let den = (a - c).abs().max((b - d).abs());
            prop_assert!(num <= l.constant * den + 1e-9);
        }
    }
}

#[test]
fn energy_and_radius_are_differential_invariants() {
    let (bf, _) = ball();
    let energy = hybrid_wlp_core::lang::parse_pred_in("2*g*x - 2*g*h - v*v = 0", &["x", "v"], &["g", "h"]).unwrap();
    let r = check_diff_invariant(&energy, &bf, &TimeDomain::non_negative(), &DinvConfig::default());
    assert!(r.overall.is_proved());
    assert_eq!(r.fallbacks, 0);
    let (pf, _) = pendulum();
    let radius = hybrid_wlp_core::lang::parse_pred_in("x^2 + y^2 = r^2", &["x", "y"], &["r"]).unwrap();
    assert!(check_diff_invariant(&radius, &pf, &TimeDomain::all_reals(), &DinvConfig::default())
        .overall
        .is_proved());
}

#[test]
fn falsifier_result_does_not_depend_on_thread_count() {
    let src = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../cli/examples/mutants/ball_no_flip.hwl"
    ))
    .unwrap();
    let f = parse_spec(&src).unwrap();
    let run = |threads: usize| {
        let cfg = FalsifyConfig {
            trials: 64,
            seed: 9,
            threads,
            ranges: f.spec.const_ranges(),
            ..FalsifyConfig::default()
        };
        falsify(&f.spec, &cfg).unwrap()
    };
    let one = run(1);
    assert!(one.is_some());
    assert_eq!(one, run(4));
}
