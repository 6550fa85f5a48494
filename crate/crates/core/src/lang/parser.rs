use std::collections::{BTreeMap, BTreeSet};

use num_traits::{ToPrimitive, Zero};

use super::lexer::{lex, Tok, Token};
use super::{ParseError, SpecFile, CONFIG_KEYS};
use crate::discharge::Lemma;
use crate::hprog::{Evolve, Flow, HybridProgram, TimeDomain, TimeKind, VectorField};
use crate::symexpr::{CmpOp, Expr, Pred, TIME};
use crate::vcgen::{ConstDecl, VerifySpec};
use crate::Rational;

const SECTIONS: &[&str] = &[
    "problem", "vars", "consts", "assume", "pre", "post", "program", "lemma", "config",
];

const RESERVED: &[&str] = &[
    "skip", "abort", "if", "then", "else", "loop", "inv", "evolve", "evol", "on", "flow", "dinv", "cut", "and",
    "or", "not", "true", "false", "forall", "exists", "in", "inf", "sin", "cos", "exp",
];

type PResult<T> = Result<T, ParseError>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vars: BTreeSet<String>,
    consts: BTreeSet<String>,
    bound: Vec<String>,
}

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Self> {
        Ok(Self {
            toks: lex(src)?,
            pos: 0,
            vars: BTreeSet::new(),
            consts: BTreeSet::new(),
            bound: Vec::new(),
        })
    }

    pub(crate) fn with_names(src: &str, vars: &[String], consts: &[String]) -> PResult<Self> {
        let mut p = Self::new(src)?;
        p.vars = vars.iter().cloned().collect();
        p.consts = consts.iter().cloned().collect();
        Ok(p)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError::new(t.line, t.col, msg))
    }

    fn missing(&self, section: &str) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(t.line, t.col, format!("missing `{section}` section"))
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(format!("expected `{k}`, found {}", self.describe()))
        }
    }

    fn at_section(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => SECTIONS.contains(&s.as_str()),
            Tok::Eof => true,
            _ => false,
        }
    }

    pub(crate) fn expect_eof(&mut self) -> PResult<()> {
        self.eat_sym(";");
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn fresh_ident(&mut self, what: &str) -> PResult<String> {
        let name = self.ident()?;
        if SECTIONS.contains(&name.as_str()) || RESERVED.contains(&name.as_str()) || name == TIME {
            self.pos -= 1;
            return self.err(format!("`{name}` is reserved and cannot name a {what}"));
        }
        if self.vars.contains(&name) || self.consts.contains(&name) {
            self.pos -= 1;
            return self.err(format!("`{name}` is already declared"));
        }
        Ok(name)
    }

    fn number(&mut self) -> PResult<Rational> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.err(format!("expected number, found {}", self.describe())),
        }
    }

    fn signed_number(&mut self) -> PResult<Rational> {
        let neg = self.eat_sym("-");
        let n = self.literal()?;
        Ok(if neg { -n } else { n })
    }

    /// A numeric literal, folding `n/d` written without spaces and not
    /// followed by `^`.
    fn literal(&mut self) -> PResult<Rational> {
        let first = self.toks[self.pos].clone();
        let n = self.number()?;
        if self.literal_fraction_follows(&first) {
            self.bump();
            let dtok = self.toks[self.pos].clone();
            let d = self.number()?;
            if d.is_zero() {
                return Err(ParseError::new(dtok.line, dtok.col, "zero denominator"));
            }
            return Ok(n / d);
        }
        Ok(n)
    }

    fn literal_fraction_follows(&self, num: &Token) -> bool {
        let slash = &self.toks[self.pos];
        let den = &self.toks[(self.pos + 1).min(self.toks.len() - 1)];
        matches!(slash.tok, Tok::Sym("/"))
            && slash.start == num.end
            && matches!(den.tok, Tok::Num(_))
            && den.start == slash.end
            && !matches!(self.peek_at(2), Tok::Sym("^"))
    }

    /// Token index just after the literal starting at `pos + k`.
    fn literal_len(&self, k: usize) -> usize {
        let i = self.pos + k;
        let num = &self.toks[i];
        let slash = &self.toks[(i + 1).min(self.toks.len() - 1)];
        let den = &self.toks[(i + 2).min(self.toks.len() - 1)];
        let after = &self.toks[(i + 3).min(self.toks.len() - 1)].tok;
        let folds = matches!(slash.tok, Tok::Sym("/"))
            && slash.start == num.end
            && matches!(den.tok, Tok::Num(_))
            && den.start == slash.end
            && !matches!(after, Tok::Sym("^"));
        if folds {
            3
        } else {
            1
        }
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let mut a = self.mul()?;
        loop {
            if self.eat_sym("+") {
                a = a + self.mul()?;
            } else if self.eat_sym("-") {
                a = a - self.mul()?;
            } else {
                return Ok(a);
            }
        }
    }

    fn mul(&mut self) -> PResult<Expr> {
        let mut a = self.unary()?;
        loop {
            if self.eat_sym("*") {
                a = a * self.unary()?;
            } else if self.is_sym("/") {
                self.bump();
                let t = self.toks[self.pos].clone();
                let d = self.unary()?;
                a = Expr::div(a, d)
                    .map_err(|_| ParseError::new(t.line, t.col, "division by literal zero"))?;
            } else {
                return Ok(a);
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if !self.is_sym("-") {
            return self.pow();
        }
        if matches!(self.peek_at(1), Tok::Num(_)) {
            let len = self.literal_len(1);
            if !matches!(self.peek_at(1 + len), Tok::Sym("^")) {
                self.bump();
                let n = self.literal()?;
                return Ok(Expr::Const(-n));
            }
        }
        self.bump();
        Ok(Expr::Neg(Box::new(self.unary()?)))
    }

    fn pow(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if self.eat_sym("^") {
            let t = self.toks[self.pos].clone();
            let n = self.number()?;
            let k = if n.is_integer() { n.to_integer().to_u32() } else { None };
            let Some(k) = k else {
                return Err(ParseError::new(t.line, t.col, "exponent must be a natural number"));
            };
            if self.is_sym("^") {
                return self.err("chained exponents need parentheses");
            }
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Num(_) => Ok(Expr::Const(self.literal()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if matches!(name.as_str(), "sin" | "cos" | "exp") {
                    self.bump();
                    self.expect_sym("(")?;
                    let a = self.expr()?;
                    self.expect_sym(")")?;
                    return Ok(match name.as_str() {
                        "sin" => a.sin(),
                        "cos" => a.cos(),
                        _ => a.exp(),
                    });
                }
                let e = self.resolve(&name)?;
                self.bump();
                Ok(e)
            }
            _ => self.err(format!("expected expression, found {}", self.describe())),
        }
    }

    fn resolve(&self, name: &str) -> PResult<Expr> {
        if self.bound.iter().rev().any(|b| b == name) {
            Ok(Expr::Time(name.to_string()))
        } else if self.vars.contains(name) {
            Ok(Expr::Var(name.to_string()))
        } else if self.consts.contains(name) {
            Ok(Expr::SymConst(name.to_string()))
        } else if name == TIME {
            Ok(Expr::Time(TIME.to_string()))
        } else {
            self.err(format!("unknown identifier `{name}`"))
        }
    }

    // ---- predicates ----

    pub(crate) fn pred(&mut self) -> PResult<Pred> {
        let a = self.or()?;
        if self.eat_sym("->") {
            let b = self.pred()?;
            return Ok(Pred::implies(a, b));
        }
        Ok(a)
    }

    fn or(&mut self) -> PResult<Pred> {
        let mut a = self.and()?;
        while self.eat_kw("or") {
            a = Pred::or(a, self.and()?);
        }
        Ok(a)
    }

    fn and(&mut self) -> PResult<Pred> {
        let mut a = self.not()?;
        while self.eat_kw("and") {
            a = Pred::and(a, self.not()?);
        }
        Ok(a)
    }

    fn not(&mut self) -> PResult<Pred> {
        if self.eat_kw("not") {
            return Ok(Pred::not(self.not()?));
        }
        self.patom()
    }

    fn patom(&mut self) -> PResult<Pred> {
        if self.eat_kw("true") {
            return Ok(Pred::True);
        }
        if self.eat_kw("false") {
            return Ok(Pred::False);
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            let universal = self.is_kw("forall");
            self.bump();
            let var = self.ident()?;
            if self.vars.contains(&var) || self.consts.contains(&var) {
                self.pos -= 1;
                return self.err(format!("quantified name `{var}` shadows a declaration"));
            }
            self.expect_sym("[")?;
            self.bound.push(var.clone());
            let guard = self.pred();
            let rest = guard.and_then(|g| {
                self.expect_sym("]")?;
                self.expect_sym(".")?;
                Ok((g, self.pred()?))
            });
            self.bound.pop();
            let (guard, body) = rest?;
            let (guard, body) = (Box::new(guard), Box::new(body));
            return Ok(if universal {
                Pred::Forall { var, guard, body }
            } else {
                Pred::Exists { var, guard, body }
            });
        }
        if self.is_sym("(") {
            let save = self.pos;
            self.bump();
            if let Ok(p) = self.pred() {
                if self.eat_sym(")") && !self.continues_expr() {
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        let a = self.expr()?;
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return self.err(format!("expected comparison, found {}", self.describe())),
        };
        self.bump();
        let b = self.expr()?;
        Ok(Pred::cmp(op, a, b))
    }

    fn continues_expr(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Sym("+" | "-" | "*" | "/" | "^" | "=" | "!=" | "<" | "<=" | ">" | ">=")
        )
    }

    // ---- programs ----

    pub(crate) fn program(&mut self) -> PResult<HybridProgram> {
        let first = self.seq()?;
        if !self.is_sym("++") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_sym("++") {
            items.push(self.seq()?);
        }
        Ok(HybridProgram::Choice(items))
    }

    fn seq_continues(&self) -> bool {
        if !self.is_sym(";") {
            return false;
        }
        match self.peek_at(1) {
            Tok::Eof => false,
            Tok::Ident(s) => !SECTIONS.contains(&s.as_str()) && !matches!(s.as_str(), "else" | "inv"),
            Tok::Sym(s) => !matches!(*s, ")" | "++" | ";"),
            Tok::Num(_) => true,
        }
    }

    fn seq(&mut self) -> PResult<HybridProgram> {
        let first = self.hatom()?;
        if !self.seq_continues() {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.seq_continues() {
            self.bump();
            items.push(self.hatom()?);
        }
        Ok(HybridProgram::Seq(items))
    }

    fn hatom(&mut self) -> PResult<HybridProgram> {
        let t = self.toks[self.pos].clone();
        let at = |e: crate::hprog::HprogError| ParseError::new(t.line, t.col, e.to_string());
        if self.eat_kw("skip") {
            return Ok(HybridProgram::Skip);
        }
        if self.eat_kw("abort") {
            return Ok(HybridProgram::Abort);
        }
        if self.eat_sym("?") {
            return Ok(HybridProgram::Test(self.pred()?));
        }
        if self.eat_sym("(") {
            let p = self.program()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if self.eat_kw("if") {
            let c = self.pred()?;
            self.expect_kw("then")?;
            let a = self.program()?;
            self.expect_kw("else")?;
            let b = self.hatom()?;
            return Ok(HybridProgram::if_then_else(c, a, b));
        }
        if self.eat_kw("loop") {
            let body = self.program()?;
            self.expect_kw("inv")?;
            let inv = self.pred()?;
            return Ok(HybridProgram::looped(body, inv));
        }
        if self.eat_kw("evolve") {
            let mut comps = Vec::new();
            loop {
                let x = self.program_var()?;
                self.expect_sym("'")?;
                self.expect_sym("=")?;
                comps.push((x, self.expr()?));
                if !self.eat_sym(",") {
                    break;
                }
            }
            let field = VectorField::new(comps).map_err(at)?;
            let guard = if self.eat_sym("&") { self.pred()? } else { Pred::True };
            let dom = if self.eat_kw("on") { self.domain()? } else { TimeDomain::all_reals() };
            let mut ev = Evolve::new(field, guard, dom);
            if self.eat_kw("flow") {
                let comps = self.assignments()?;
                ev = ev.with_flow(Flow::new(comps, TimeKind::AllReals)).map_err(at)?;
            }
            if self.eat_kw("dinv") {
                let inv = self.pred()?;
                ev = ev.with_dinv(inv).map_err(at)?;
            }
            while self.eat_kw("cut") {
                let c = self.pred()?;
                ev = ev.with_cut(c);
            }
            return Ok(HybridProgram::Evolve(ev));
        }
        if self.eat_kw("evol") {
            let comps = self.assignments()?;
            let guard = if self.eat_sym("&") { self.pred()? } else { Pred::True };
            let dom = if self.eat_kw("on") { self.domain()? } else { TimeDomain::all_reals() };
            return Ok(HybridProgram::EvolFlow {
                flow: Flow::new(comps, TimeKind::AllReals),
                guard,
                dom,
            });
        }
        if let Tok::Ident(_) = self.peek() {
            if matches!(self.peek_at(1), Tok::Sym(":=")) {
                let x = self.program_var()?;
                self.bump();
                return Ok(HybridProgram::Assign(x, self.expr()?));
            }
        }
        self.err(format!("expected program, found {}", self.describe()))
    }

    fn program_var(&mut self) -> PResult<String> {
        let x = self.ident()?;
        if !self.vars.contains(&x) {
            self.pos -= 1;
            return self.err(format!("`{x}` is not a declared variable"));
        }
        Ok(x)
    }

    fn assignments(&mut self) -> PResult<Vec<(String, Expr)>> {
        let mut out: Vec<(String, Expr)> = Vec::new();
        loop {
            let x = self.program_var()?;
            if out.iter().any(|(y, _)| *y == x) {
                self.pos -= 1;
                return self.err(format!("`{x}` assigned twice"));
            }
            self.expect_sym(":=")?;
            out.push((x, self.expr()?));
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    fn domain(&mut self) -> PResult<TimeDomain> {
        let t = self.toks[self.pos].clone();
        if self.eat_kw("R") {
            return Ok(TimeDomain::all_reals());
        }
        self.expect_sym("[")?;
        let lo = self.signed_number()?;
        self.expect_sym(",")?;
        if self.eat_kw("inf") {
            self.expect_sym(")")?;
            if !lo.is_zero() {
                return Err(ParseError::new(t.line, t.col, "unbounded domains must start at 0"));
            }
            return Ok(TimeDomain::non_negative());
        }
        let hi = self.signed_number()?;
        self.expect_sym("]")?;
        let kind = TimeKind::interval(lo, hi).map_err(|e| ParseError::new(t.line, t.col, e.to_string()))?;
        Ok(TimeDomain::new(kind))
    }

    // ---- problem file ----

    fn pred_list(&mut self) -> PResult<Vec<Pred>> {
        let mut out = vec![self.pred()?];
        while self.eat_sym(",") {
            out.push(self.pred()?);
        }
        Ok(out)
    }

    pub(crate) fn spec_file(&mut self) -> PResult<SpecFile> {
        let mut name = None;
        let mut vars: Option<Vec<String>> = None;
        let mut consts: Vec<ConstDecl> = Vec::new();
        let mut assumptions = Vec::new();
        let (mut pre, mut post, mut program) = (None, None, None);
        let mut lemmas: Vec<Lemma> = Vec::new();
        let mut config: BTreeMap<String, Rational> = BTreeMap::new();
        loop {
            while self.eat_sym(";") {}
            let section = match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(s) if SECTIONS.contains(&s.as_str()) => s,
                _ => return self.err(format!("expected section keyword, found {}", self.describe())),
            };
            let once = |seen: bool, p: &Self| -> PResult<()> {
                if seen {
                    p.err(format!("duplicate `{section}` section"))
                } else {
                    Ok(())
                }
            };
            match section.as_str() {
                "problem" => {
                    once(name.is_some(), self)?;
                    self.bump();
                    name = Some(self.ident()?);
                }
                "vars" => {
                    once(vars.is_some(), self)?;
                    self.bump();
                    let mut vs = Vec::new();
                    while !self.at_section() {
                        vs.push(self.fresh_ident("variable")?);
                        self.vars.insert(vs.last().unwrap().clone());
                        self.eat_sym(",");
                    }
                    if vs.is_empty() {
                        return self.err("expected at least one variable");
                    }
                    vars = Some(vs);
                }
                "consts" => {
                    self.bump();
                    while !self.at_section() {
                        let c = self.fresh_ident("constant")?;
                        let range = if self.eat_kw("in") {
                            self.expect_sym("[")?;
                            let lo = self.signed_number()?;
                            self.expect_sym(",")?;
                            let hi = self.signed_number()?;
                            self.expect_sym("]")?;
                            if lo > hi {
                                return self.err(format!("empty range for `{c}`"));
                            }
                            Some((lo, hi))
                        } else {
                            None
                        };
                        self.consts.insert(c.clone());
                        consts.push(ConstDecl { name: c, range });
                        self.eat_sym(",");
                    }
                }
                "assume" => {
                    self.bump();
                    assumptions.extend(self.pred_list()?);
                }
                "pre" => {
                    once(pre.is_some(), self)?;
                    self.bump();
                    pre = Some(self.pred()?);
                }
                "post" => {
                    once(post.is_some(), self)?;
                    self.bump();
                    post = Some(self.pred()?);
                }
                "program" => {
                    once(program.is_some(), self)?;
                    self.bump();
                    program = Some(self.program()?);
                }
                "lemma" => {
                    self.bump();
                    let lname = self.ident()?;
                    if lemmas.iter().any(|l| l.name == lname) {
                        self.pos -= 1;
                        return self.err(format!("duplicate lemma `{lname}`"));
                    }
                    self.expect_sym(":")?;
                    let hyps = if self.is_sym("=>") { Vec::new() } else { self.pred_list()? };
                    self.expect_sym("=>")?;
                    let concl = self.pred()?;
                    lemmas.push(Lemma {
                        name: lname,
                        hyps,
                        concl,
                    });
                }
                "config" => {
                    self.bump();
                    while !self.at_section() {
                        let key = self.ident()?;
                        if !CONFIG_KEYS.contains(&key.as_str()) {
                            self.pos -= 1;
                            return self.err(format!("unknown config key `{key}`"));
                        }
                        self.expect_sym("=")?;
                        let v = self.signed_number()?;
                        config.insert(key, v);
                        self.eat_sym(",");
                    }
                }
                _ => unreachable!("section list"),
            }
            if !self.is_sym(";") && !self.at_section() {
                return self.err(format!("unexpected {}", self.describe()));
            }
        }
        let name = name.ok_or_else(|| self.missing("problem"))?;
        let vars = vars.ok_or_else(|| self.missing("vars"))?;
        let pre = pre.ok_or_else(|| self.missing("pre"))?;
        let post = post.ok_or_else(|| self.missing("post"))?;
        let program = program.ok_or_else(|| self.missing("program"))?;
        Ok(SpecFile {
            name,
            spec: VerifySpec {
                vars,
                consts,
                assumptions,
                pre,
                post,
                program,
            },
            lemmas,
            config,
        })
    }
}
