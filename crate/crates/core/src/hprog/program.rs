use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::{HprogError, TimeDomain, TimeKind};
use crate::symexpr::{substitute, Expr, Pred, Substitution, TIME};

/// Right-hand side of an autonomous ODE system, one term per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VectorField {
    comps: BTreeMap<String, Expr>,
}

impl VectorField {
    pub fn new<K: Into<String>>(comps: impl IntoIterator<Item = (K, Expr)>) -> Result<Self, HprogError> {
        let comps: BTreeMap<String, Expr> = comps.into_iter().map(|(k, e)| (k.into(), e)).collect();
        if let Some((k, _)) = comps.iter().find(|(_, e)| e.mentions_time()) {
            return Err(HprogError::FieldMentionsTime(k.clone()));
        }
        Ok(Self { comps })
    }

    pub fn get(&self, var: &str) -> Option<&Expr> {
        self.comps.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.comps.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.comps.keys().cloned().collect()
    }

    pub fn as_map(&self) -> &BTreeMap<String, Expr> {
        &self.comps
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }
}

/// A claimed solution `phi(t, s)` of some vector field, written in terms of
/// the time symbol `t` and the initial values of the variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flow {
    comps: BTreeMap<String, Expr>,
    /// Claimed interval of existence.
    pub domain_t: TimeKind,
}

impl Flow {
    pub fn new<K: Into<String>>(comps: impl IntoIterator<Item = (K, Expr)>, domain_t: TimeKind) -> Self {
        Self {
            comps: comps.into_iter().map(|(k, e)| (k.into(), e)).collect(),
            domain_t,
        }
    }

    pub fn get(&self, var: &str) -> Option<&Expr> {
        self.comps.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.comps.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.comps.keys().cloned().collect()
    }

    pub fn as_map(&self) -> &BTreeMap<String, Expr> {
        &self.comps
    }

    /// The substitution `x := phi_x(time)` for every component.
    pub fn at(&self, time: &Expr) -> Substitution {
        let tsub: Substitution = [(TIME.to_string(), time.clone())].into();
        self.comps
            .iter()
            .map(|(k, e)| (k.clone(), substitute(e, &tsub)))
            .collect()
    }
}

/// `x' = f & G` over a time domain, with an optional proof strategy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Evolve {
    pub field: VectorField,
    pub guard: Pred,
    pub dom: TimeDomain,
    pub flow: Option<Flow>,
    pub dinv: Option<Pred>,
    /// Conditions added by differential cuts; each must itself be a
    /// differential invariant and then strengthens the guard.
    pub cuts: Vec<Pred>,
}

impl Evolve {
    pub fn new(field: VectorField, guard: Pred, dom: TimeDomain) -> Self {
        Self {
            field,
            guard,
            dom,
            flow: None,
            dinv: None,
            cuts: Vec::new(),
        }
    }

    pub fn with_flow(mut self, flow: Flow) -> Result<Self, HprogError> {
        self.flow = Some(flow);
        self.validate()?;
        Ok(self)
    }

    pub fn with_dinv(mut self, inv: Pred) -> Result<Self, HprogError> {
        self.dinv = Some(inv);
        self.validate()?;
        Ok(self)
    }

    pub fn with_cut(mut self, cut: Pred) -> Self {
        self.cuts.push(cut);
        self
    }

    pub fn validate(&self) -> Result<(), HprogError> {
        if self.flow.is_some() && self.dinv.is_some() {
            return Err(HprogError::ConflictingStrategy);
        }
        if let Some(flow) = &self.flow {
            if flow.vars() != self.field.vars() {
                return Err(HprogError::VariableMismatch(format!(
                    "field {:?}, flow {:?}",
                    self.field.vars(),
                    flow.vars()
                )));
            }
        }
        Ok(())
    }

    /// Guard strengthened by all cuts.
    pub fn full_guard(&self) -> Pred {
        Pred::all(std::iter::once(self.guard.clone()).chain(self.cuts.iter().cloned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HybridProgram {
    Skip,
    Abort,
    Assign(String, Expr),
    Test(Pred),
    Seq(Vec<HybridProgram>),
    Choice(Vec<HybridProgram>),
    If(Pred, Box<HybridProgram>, Box<HybridProgram>),
    Loop { body: Box<HybridProgram>, inv: Pred },
    Evolve(Evolve),
    /// Evolution along a given flow without any certification.
    EvolFlow { flow: Flow, guard: Pred, dom: TimeDomain },
}

impl HybridProgram {
    pub fn assign(var: &str, e: Expr) -> Self {
        HybridProgram::Assign(var.to_string(), e)
    }

    pub fn if_then_else(c: Pred, a: HybridProgram, b: HybridProgram) -> Self {
        HybridProgram::If(c, Box::new(a), Box::new(b))
    }

    pub fn looped(body: HybridProgram, inv: Pred) -> Self {
        HybridProgram::Loop {
            body: Box::new(body),
            inv,
        }
    }

    pub fn children(&self) -> Vec<&HybridProgram> {
        match self {
            HybridProgram::Seq(ps) | HybridProgram::Choice(ps) => ps.iter().collect(),
            HybridProgram::If(_, a, b) => vec![a, b],
            HybridProgram::Loop { body, .. } => vec![body],
            _ => Vec::new(),
        }
    }

    fn children_mut(&mut self) -> Vec<&mut HybridProgram> {
        match self {
            HybridProgram::Seq(ps) | HybridProgram::Choice(ps) => ps.iter_mut().collect(),
            HybridProgram::If(_, a, b) => vec![a.as_mut(), b.as_mut()],
            HybridProgram::Loop { body, .. } => vec![body.as_mut()],
            _ => Vec::new(),
        }
    }

    /// No evolution commands anywhere in the tree.
    pub fn is_discrete(&self) -> bool {
        !matches!(self, HybridProgram::Evolve(_) | HybridProgram::EvolFlow { .. })
            && self.children().iter().all(|c| c.is_discrete())
    }

    pub fn node_at(&self, path: &AstPath) -> Result<&HybridProgram, HprogError> {
        let mut node = self;
        for &i in &path.0 {
            node = *node
                .children()
                .get(i)
                .ok_or_else(|| HprogError::BadPath(path.to_string()))?;
        }
        Ok(node)
    }

    pub fn node_at_mut(&mut self, path: &AstPath) -> Result<&mut HybridProgram, HprogError> {
        let mut node = self;
        for &i in &path.0 {
            node = node
                .children_mut()
                .into_iter()
                .nth(i)
                .ok_or_else(|| HprogError::BadPath(path.to_string()))?;
        }
        Ok(node)
    }

    /// Paths of all evolution nodes, in pre-order.
    pub fn evolve_paths(&self) -> Vec<AstPath> {
        let mut out = Vec::new();
        fn go(p: &HybridProgram, path: &mut Vec<usize>, out: &mut Vec<AstPath>) {
            if matches!(p, HybridProgram::Evolve(_)) {
                out.push(AstPath(path.clone()));
            }
            for (i, c) in p.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

/// Child indices from the root; rendered `root` or dotted (`1.0.2`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AstPath(pub Vec<usize>);

impl AstPath {
    pub fn root() -> Self {
        AstPath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        AstPath(v)
    }
}

impl fmt::Display for AstPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for AstPath {
    type Err = HprogError;

    fn from_str(s: &str) -> Result<Self, HprogError> {
        let s = s.trim();
        if s.is_empty() || s == "root" {
            return Ok(AstPath::root());
        }
        s.split('.')
            .map(|p| p.parse::<usize>().map_err(|_| HprogError::BadPath(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(AstPath)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, time, var};

    #[test]
    fn field_rejects_time() {
        assert!(matches!(
            VectorField::new([("x", time())]),
            Err(HprogError::FieldMentionsTime(_))
        ));
    }

    #[test]
    fn strategies_are_exclusive() {
        let f = VectorField::new([("x", int(1))]).unwrap();
        let flow = Flow::new([("x", var("x") + time())], TimeKind::AllReals);
        let e = Evolve::new(f, Pred::True, TimeDomain::all_reals())
            .with_flow(flow)
            .unwrap();
        assert_eq!(e.with_dinv(Pred::True), Err(HprogError::ConflictingStrategy));
    }

    #[test]
    fn paths_round_trip() {
        let p: AstPath = "1.0.3".parse().unwrap();
        assert_eq!(p.to_string(), "1.0.3");
        assert_eq!("root".parse::<AstPath>().unwrap(), AstPath::root());
    }

    #[test]
    fn node_lookup() {
        let prog = HybridProgram::Seq(vec![
            HybridProgram::Skip,
            HybridProgram::looped(HybridProgram::assign("x", int(1)), Pred::True),
        ]);
        let p: AstPath = "1.0".parse().unwrap();
        assert_eq!(prog.node_at(&p).unwrap(), &HybridProgram::assign("x", int(1)));
        assert!(prog.node_at(&"2".parse().unwrap()).is_err());
    }
}
