//! The command-line tool end to end: exit codes, JSON reports against the
//! checked-in schema, and the non-verify commands.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-wlp"))
}

fn example(name: &str) -> String {
    format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}\nstdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn assert_schema(report: &Value) {
    let path = format!("{}/schema/report.schema.json", env!("CARGO_MANIFEST_DIR"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(report) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "schema violations: {msgs:#?}\n{report:#}");
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn golden_examples_verify() {
    for f in ["bouncing_ball.hwl", "bouncing_ball_dinv.hwl", "pendulum_inv.hwl", "pendulum_flow.hwl"] {
        let out = run(&["verify", &example(f), "--json"]);
        let r = json(&out);
        assert_schema(&r);
        assert_eq!(out.status.code(), Some(0), "{f}: {r:#}");
        assert_eq!(r["summary"]["unknown"], 0);
        assert!(r.get("counterexample").is_none());
    }
}

#[test]
fn mutants_are_refuted() {
    for f in ["ball_guard_dropped.hwl", "ball_no_flip.hwl", "ball_flipped_post.hwl", "pendulum_radius.hwl"] {
        let out = run(&["verify", &example(&format!("mutants/{f}")), "--json"]);
        let r = json(&out);
        assert_schema(&r);
        assert_eq!(out.status.code(), Some(2), "{f}");
        let refuted = r["obligations"].as_array().unwrap().iter().any(|o| o["verdict"] == "Refuted");
        assert!(refuted || r["counterexample"].is_object(), "{f}");
    }
}

#[test]
fn flipped_post_witness_violates_post() {
    let out = run(&["verify", &example("mutants/ball_flipped_post.hwl"), "--json", "--seed", "4"]);
    let r = json(&out);
    let cx = &r["counterexample"]["violating"];
    let (x, h) = (cx["x"].as_f64().unwrap(), r["counterexample"]["consts"]["h"].as_f64().unwrap());
    // the mutated post is `0 <= x and h <= x`, so a violating store sits below h
    assert!(x < h || x < 0.0, "x = {x}, h = {h}");
}

#[test]
fn missing_strategy_is_unknown() {
    let p = temp_file(
        "no_strategy.hwl",
        "problem drift\nvars x\npre x = 0\npost x >= 0\nprogram\n  evolve x' = 1 & x <= 5 on [0,inf)\n",
    );
    let out = run(&["verify", p.to_str().unwrap(), "--json"]);
    let r = json(&out);
    assert_schema(&r);
    assert_eq!(out.status.code(), Some(1));
    let opaque = r["obligations"].as_array().unwrap().iter().find(|o| o["kind"] == "opaque").unwrap();
    assert_eq!(opaque["verdict"], "Unknown");
    assert!(opaque["reason"].is_string());
}

#[test]
fn verify_is_deterministic_given_seed() {
    let args = ["verify", &example("mutants/ball_guard_dropped.hwl"), "--json", "--seed", "12"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_precedence() {
    let src = std::fs::read_to_string(example("pendulum_inv.hwl")).unwrap() + "config seed = 7, trials = 5\n";
    let p = temp_file("with_config.hwl", &src);
    let r = json(&run(&["verify", p.to_str().unwrap(), "--json"]));
    assert_eq!(r["seed"], 7);
    let r = json(&run(&["verify", p.to_str().unwrap(), "--json", "--seed", "3"]));
    assert_eq!(r["seed"], 3);
}

#[test]
fn differential_cut_from_the_command_line() {
    let out = run(&[
        "verify",
        &example("pendulum_inv.hwl"),
        "--json",
        "--cut",
        "x^2 + y^2 >= 0",
        "--at",
        "root",
    ]);
    let r = json(&out);
    assert_schema(&r);
    assert_eq!(out.status.code(), Some(0), "{r:#}");
    let cut = r["obligations"].as_array().unwrap().iter().find(|o| o["provenance"] == "dC@root");
    assert_eq!(cut.expect("cut obligation")["verdict"], "Proved");
}

#[test]
fn certify_reports_flow_certificate() {
    let out = run(&["certify", &example("pendulum_flow.hwl"), "--json"]);
    let r = json(&out);
    assert_schema(&r);
    assert_eq!(out.status.code(), Some(0));
    let obs = r["obligations"].as_array().unwrap();
    assert_eq!(obs.len(), 1);
    let cert = &obs[0]["certificate"];
    assert!(cert["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(cert["lipschitz"]["constant"], 1.0);

    let out = run(&["certify", &example("pendulum_flow.hwl"), "--dinv-only"]);
    assert_eq!(out.status.code(), Some(3), "nothing to certify");
    let out = run(&["certify", &example("bouncing_ball_dinv.hwl"), "--dinv-only", "--json"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn pendulum_has_no_counterexample_in_ten_thousand_trials() {
    let out = run(&["falsify", &example("pendulum_inv.hwl"), "--trials", "10000", "--json"]);
    let r = json(&out);
    assert_eq!(out.status.code(), Some(0));
    assert!(r["counterexample"].is_null());
    assert_eq!(r["trials"], 10000);
}

#[test]
fn falsify_finds_guard_mutant() {
    let out = run(&["falsify", &example("mutants/ball_guard_dropped.hwl"), "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    assert!(r["counterexample"]["violating"]["x"].as_f64().unwrap() < 0.0);
}

#[test]
fn laws_command() {
    let out = run(&["laws", "--model", "rel", "--n", "2", "--mode", "exhaustive", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    for res in r["results"].as_array().unwrap() {
        assert_eq!(res["mode"], "exhaustive");
        assert_eq!(res["pass"], true, "{res}");
        assert!(res.get("counterexample").is_none());
    }
    let out = run(&["laws", "--model", "sta", "--n", "2", "--mode", "exhaustive", "--law", "mult-comm", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    assert!(r["results"][0]["counterexample"].is_string());
    let out = run(&[
        "laws", "--model", "rel", "--n", "4", "--mode", "random", "--seed", "1", "--trials", "500", "--law", "star",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn fmt_is_idempotent() {
    for f in ["bouncing_ball.hwl", "pendulum_flow.hwl"] {
        let out = run(&["fmt", &example(f)]);
        assert_eq!(out.status.code(), Some(0));
        let p = temp_file(&format!("fmt_{f}"), &String::from_utf8(out.stdout).unwrap());
        assert_eq!(run(&["fmt", "--check", p.to_str().unwrap()]).status.code(), Some(0));
    }
}

#[test]
fn errors_exit_three() {
    let p = temp_file("broken.hwl", "problem p\nvars x\npre x=0\npost x=0\nprogram evolve x' =");
    let out = run(&["verify", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("5:"));
    assert_eq!(run(&["verify", "/nonexistent.hwl"]).status.code(), Some(3));
    assert_eq!(run(&["bogus"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
