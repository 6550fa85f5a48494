use std::fmt::Write;

use super::SpecFile;
use crate::hprog::{HybridProgram, TimeDomain};
use crate::symexpr::format_rational;

const LEVEL_CHOICE: u8 = 0;
const LEVEL_SEQ: u8 = 1;
const LEVEL_ATOM: u8 = 2;

fn level(p: &HybridProgram) -> u8 {
    match p {
        HybridProgram::Choice(_) => LEVEL_CHOICE,
        HybridProgram::Seq(_) => LEVEL_SEQ,
        _ => LEVEL_ATOM,
    }
}

fn at(out: &mut String, p: &HybridProgram, min: u8) {
    if level(p) < min {
        out.push('(');
        write_hp(out, p);
        out.push(')');
    } else {
        write_hp(out, p);
    }
}

fn domain(d: &TimeDomain) -> String {
    d.effective().to_string()
}

fn write_hp(out: &mut String, p: &HybridProgram) {
    match p {
        HybridProgram::Skip => out.push_str("skip"),
        HybridProgram::Abort => out.push_str("abort"),
        HybridProgram::Assign(x, e) => {
            let _ = write!(out, "{x} := {e}");
        }
        HybridProgram::Test(c) => {
            let _ = write!(out, "?{c}");
        }
        HybridProgram::Seq(ps) => {
            for (i, c) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                // nested sequences keep their grouping
                at(out, c, LEVEL_ATOM);
            }
        }
        HybridProgram::Choice(ps) => {
            for (i, c) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ++ ");
                }
                at(out, c, LEVEL_SEQ);
            }
        }
        HybridProgram::If(c, a, b) => {
            let _ = write!(out, "if {c} then ");
            write_hp(out, a);
            out.push_str(" else ");
            at(out, b, LEVEL_ATOM);
        }
        HybridProgram::Loop { body, inv } => {
            out.push_str("loop ");
            write_hp(out, body);
            let _ = write!(out, " inv {inv}");
        }
        HybridProgram::Evolve(ev) => {
            out.push_str("evolve ");
            let odes: Vec<String> = ev.field.iter().map(|(x, e)| format!("{x}' = {e}")).collect();
            out.push_str(&odes.join(", "));
            if ev.guard != crate::symexpr::Pred::True {
                let _ = write!(out, " & {}", ev.guard);
            }
            let _ = write!(out, " on {}", domain(&ev.dom));
            if let Some(flow) = &ev.flow {
                let comps: Vec<String> = flow.iter().map(|(x, e)| format!("{x} := {e}")).collect();
                let _ = write!(out, " flow {}", comps.join(", "));
            }
            if let Some(inv) = &ev.dinv {
                let _ = write!(out, " dinv {inv}");
            }
            for c in &ev.cuts {
                let _ = write!(out, " cut {c}");
            }
        }
        HybridProgram::EvolFlow { flow, guard, dom } => {
            let comps: Vec<String> = flow.iter().map(|(x, e)| format!("{x} := {e}")).collect();
            let _ = write!(out, "evol {}", comps.join(", "));
            if *guard != crate::symexpr::Pred::True {
                let _ = write!(out, " & {guard}");
            }
            let _ = write!(out, " on {}", domain(dom));
        }
    }
}

/// Single-line concrete syntax of a program.
pub fn print_program(p: &HybridProgram) -> String {
    let mut out = String::new();
    write_hp(&mut out, p);
    out
}

/// Canonical text of a problem file.
pub fn print_spec(f: &SpecFile) -> String {
    let s = &f.spec;
    let mut out = String::new();
    let _ = writeln!(out, "problem {}", f.name);
    let _ = writeln!(out, "vars {}", s.vars.join(" "));
    if !s.consts.is_empty() {
        let cs: Vec<String> = s
            .consts
            .iter()
            .map(|c| match &c.range {
                Some((lo, hi)) => format!("{} in [{}, {}]", c.name, format_rational(lo), format_rational(hi)),
                None => c.name.clone(),
            })
            .collect();
        let _ = writeln!(out, "consts {}", cs.join(", "));
    }
    if !s.assumptions.is_empty() {
        let asm: Vec<String> = s.assumptions.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(out, "assume {}", asm.join(", "));
    }
    let _ = writeln!(out, "pre {}", s.pre);
    let _ = writeln!(out, "post {}", s.post);
    let _ = writeln!(out, "program\n  {}", print_program(&s.program));
    for l in &f.lemmas {
        let hs: Vec<String> = l.hyps.iter().map(|h| h.to_string()).collect();
        let sep = if hs.is_empty() { "" } else { " " };
        let _ = writeln!(out, "lemma {}: {}{sep}=> {}", l.name, hs.join(", "), l.concl);
    }
    if !f.config.is_empty() {
        let kv: Vec<String> = f
            .config
            .iter()
            .map(|(k, v)| format!("{k} = {}", format_rational(v)))
            .collect();
        let _ = writeln!(out, "config {}", kv.join(", "));
    }
    out
}
