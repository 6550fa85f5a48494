//! The `.hwl` problem language.
//!
//! A problem file is a sequence of keyword-introduced sections:
//!
//! ```text
//! problem ball
//! vars x v
//! consts g h in [0, 10]
//! assume g < 0, h >= 0
//! pre x = h and v = 0
//! post 0 <= x and x <= h
//! program
//!   loop
//!     evolve x' = v, v' = g & x >= 0 on [0,inf)
//!       flow x := g*t^2/2 + v*t + x, v := g*t + v;
//!     if x = 0 then v := -v else skip
//!   inv 0 <= x and 2*g*x - 2*g*h - v*v = 0
//! lemma bb: 0 > g, 2*g*x - 2*g*h = v*v => x <= h
//! config seed = 7, trials = 2000
//! ```
//!
//! In programs `;` binds tighter than `++`; the else branch of a conditional
//! is a single atom. Identifiers must be declared before use; `t` is the
//! time symbol of flows. [`print_spec`] renders a file that parses back to
//! the same tree.

mod lexer;
mod parser;
mod printer;

pub use printer::{print_program, print_spec};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::discharge::Lemma;
use crate::hprog::HybridProgram;
use crate::symexpr::{Expr, Pred};
use crate::vcgen::VerifySpec;
use crate::Rational;

/// Keys accepted in `config` sections.
pub const CONFIG_KEYS: &[&str] = &[
    "seed",
    "trials",
    "step",
    "horizon",
    "fuel",
    "tolerance",
    "lemma_trials",
    "max_states",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Self {
            line,
            col,
            msg: msg.into(),
        }
    }
}

/// A parsed problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub name: String,
    pub spec: VerifySpec,
    pub lemmas: Vec<Lemma>,
    /// Raw `config` entries; keys are from [`CONFIG_KEYS`].
    pub config: BTreeMap<String, Rational>,
}

pub fn parse_spec(src: &str) -> Result<SpecFile, ParseError> {
    parser::Parser::new(src)?.spec_file()
}

/// Parses a predicate in which `vars` are store variables and `consts`
/// symbolic constants.
pub fn parse_pred_in(src: &str, vars: &[&str], consts: &[&str]) -> Result<Pred, ParseError> {
    let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut p = parser::Parser::with_names(src, &own(vars), &own(consts))?;
    let out = p.pred()?;
    p.expect_eof()?;
    Ok(out)
}

pub fn parse_expr_in(src: &str, vars: &[&str], consts: &[&str]) -> Result<Expr, ParseError> {
    let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut p = parser::Parser::with_names(src, &own(vars), &own(consts))?;
    let out = p.expr()?;
    p.expect_eof()?;
    Ok(out)
}

impl SpecFile {
    fn names(&self) -> (Vec<String>, Vec<String>) {
        (
            self.spec.vars.clone(),
            self.spec.consts.iter().map(|c| c.name.clone()).collect(),
        )
    }

    /// Parses a predicate over this problem's variables and constants.
    pub fn parse_pred(&self, src: &str) -> Result<Pred, ParseError> {
        let (v, c) = self.names();
        let mut p = parser::Parser::with_names(src, &v, &c)?;
        let out = p.pred()?;
        p.expect_eof()?;
        Ok(out)
    }

    pub fn parse_expr(&self, src: &str) -> Result<Expr, ParseError> {
        let (v, c) = self.names();
        let mut p = parser::Parser::with_names(src, &v, &c)?;
        let out = p.expr()?;
        p.expect_eof()?;
        Ok(out)
    }

    pub fn parse_program(&self, src: &str) -> Result<HybridProgram, ParseError> {
        let (v, c) = self.names();
        let mut p = parser::Parser::with_names(src, &v, &c)?;
        let out = p.program()?;
        p.expect_eof()?;
        Ok(out)
    }
}

impl fmt::Display for SpecFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_spec(self))
    }
}
