//! Law database and the brute-force / randomized checking harness.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{AlgebraError, FinitePred, FiniteRel, FiniteSta, ModalKleene};

/// Which concrete model to check laws in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Rel,
    Sta,
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rel" => Ok(Model::Rel),
            "sta" => Ok(Model::Sta),
            other => Err(format!("unknown model `{other}` (expected rel or sta)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawMode {
    Exhaustive,
    Random { seed: u64, trials: u64 },
}

impl LawMode {
    fn name(&self) -> &'static str {
        match self {
            LawMode::Exhaustive => "exhaustive",
            LawMode::Random { .. } => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawResult {
    pub law: String,
    pub mode: String,
    pub pass: bool,
    /// Number of instances evaluated.
    pub checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub model: Model,
    pub n: usize,
    pub results: Vec<LawResult>,
}

impl LawReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

struct Law {
    id: &'static str,
    group: &'static str,
    elems: usize,
    preds: usize,
}

const fn law(id: &'static str, group: &'static str, elems: usize, preds: usize) -> Law {
    Law {
        id,
        group,
        elems,
        preds,
    }
}

/// The `invalid` group holds deliberately false statements used to check
/// that the harness can fail; it is never selected by `all`.
const LAWS: &[Law] = &[
    law("plus-assoc", "dioid", 3, 0),
    law("plus-comm", "dioid", 2, 0),
    law("plus-idem", "dioid", 1, 0),
    law("plus-zero", "dioid", 1, 0),
    law("times-assoc", "dioid", 3, 0),
    law("times-one", "dioid", 1, 0),
    law("times-zero", "dioid", 1, 0),
    law("distrib-left", "dioid", 3, 0),
    law("distrib-right", "dioid", 3, 0),
    law("star-unfold-left", "star", 1, 0),
    law("star-unfold-right", "star", 1, 0),
    law("star-induct-left", "star", 3, 0),
    law("star-induct-right", "star", 3, 0),
    law("ad-annihilate", "antidomain", 1, 0),
    law("ad-complement", "antidomain", 1, 0),
    law("ad-locality", "antidomain", 2, 0),
    law("ar-annihilate", "antidomain", 1, 0),
    law("ar-complement", "antidomain", 1, 0),
    law("ar-locality", "antidomain", 2, 0),
    law("domain-retraction", "antidomain", 1, 0),
    law("domain-range", "antidomain", 1, 0),
    law("box-def", "box", 1, 1),
    law("dia-def", "box", 1, 1),
    law("bbox-def", "box", 1, 1),
    law("bdia-def", "box", 1, 1),
    law("de-morgan", "box", 1, 1),
    law("wlp-seq", "wlp", 2, 1),
    law("wlp-choice", "wlp", 2, 1),
    law("wlp-cond", "wlp", 2, 2),
    law("wlp-test", "wlp", 0, 2),
    law("wlp-star", "wlp", 1, 1),
    law("wlp-star-unfold", "wlp", 1, 1),
    law("wlp-cmd", "wlp", 1, 3),
    law("wlp-while", "wlp", 1, 3),
    law("inv-closure", "invariant", 1, 2),
    law("adjunction-fwd", "adjunction", 1, 2),
    law("adjunction-bwd", "adjunction", 1, 2),
    law("iso-commute", "iso", 2, 1),
    law("mult-comm", "invalid", 2, 0),
];

/// All law identifiers, including the deliberately invalid ones.
pub fn law_ids() -> Vec<&'static str> {
    LAWS.iter().map(|l| l.id).collect()
}

/// Group names accepted by [`check_laws`] in place of identifiers.
pub fn law_groups() -> Vec<&'static str> {
    let mut g: Vec<_> = LAWS.iter().map(|l| l.group).collect();
    g.dedup();
    g
}

fn resolve(names: &[&str]) -> Result<Vec<&'static Law>, AlgebraError> {
    let mut out: Vec<&'static Law> = Vec::new();
    let mut push = |l: &'static Law| {
        if !out.iter().any(|o| o.id == l.id) {
            out.push(l);
        }
    };
    if names.is_empty() {
        LAWS.iter().filter(|l| l.group != "invalid").for_each(&mut push);
    }
    for name in names {
        if *name == "all" {
            LAWS.iter().filter(|l| l.group != "invalid").for_each(&mut push);
        } else if let Some(l) = LAWS.iter().find(|l| l.id == *name) {
            push(l);
        } else if LAWS.iter().any(|l| l.group == *name) {
            LAWS.iter().filter(|l| l.group == *name).for_each(&mut push);
        } else {
            return Err(AlgebraError::UnknownLaw(name.to_string()));
        }
    }
    Ok(out)
}

fn implies(a: bool, b: bool) -> bool {
    !a || b
}

fn pred<M: ModalKleene>(x: &M) -> FinitePred {
    x.as_test().expect("subidentity")
}

fn holds<M: ModalKleene>(id: &str, n: usize, xs: &[M], ps: &[FinitePred]) -> bool {
    let x = || &xs[0];
    let y = || &xs[1];
    let z = || &xs[2];
    let one = M::one(n);
    let zero = M::zero(n);
    match id {
        "plus-assoc" => x().plus(y()).plus(z()) == x().plus(&y().plus(z())),
        "plus-comm" => x().plus(y()) == y().plus(x()),
        "plus-idem" => x().plus(x()) == *x(),
        "plus-zero" => x().plus(&zero) == *x(),
        "times-assoc" => x().times(y()).times(z()) == x().times(&y().times(z())),
        "times-one" => one.times(x()) == *x() && x().times(&one) == *x(),
        "times-zero" => zero.times(x()) == zero && x().times(&zero) == zero,
        "distrib-left" => x().times(&y().plus(z())) == x().times(y()).plus(&x().times(z())),
        "distrib-right" => x().plus(y()).times(z()) == x().times(z()).plus(&y().times(z())),
        "star-unfold-left" => one.plus(&x().times(&x().star())).leq(&x().star()),
        "star-unfold-right" => one.plus(&x().star().times(x())).leq(&x().star()),
        "star-induct-left" => implies(
            z().plus(&x().times(y())).leq(y()),
            x().star().times(z()).leq(y()),
        ),
        "star-induct-right" => implies(
            z().plus(&y().times(x())).leq(y()),
            z().times(&x().star()).leq(y()),
        ),
        "ad-annihilate" => x().antidomain().times(x()) == zero,
        "ad-complement" => x().antidomain().plus(&x().domain()) == one,
        "ad-locality" => x()
            .times(y())
            .antidomain()
            .leq(&x().times(&y().domain()).antidomain()),
        "ar-annihilate" => x().times(&x().antirange()) == zero,
        "ar-complement" => x().antirange().plus(&x().range()) == one,
        "ar-locality" => x()
            .times(y())
            .antirange()
            .leq(&x().range().times(y()).antirange()),
        "domain-retraction" => {
            let d = x().domain();
            d.domain() == d && d.leq(&one) && x().antidomain().as_test().is_some()
        }
        "domain-range" => x().range().domain() == x().range() && x().domain().range() == x().domain(),
        "box-def" => {
            let p = M::test(&ps[0]);
            x().fbox(&ps[0]) == pred(&x().times(&p.antidomain()).antidomain())
        }
        "dia-def" => {
            let p = M::test(&ps[0]);
            x().fdia(&ps[0]) == pred(&x().times(&p).domain())
        }
        "bbox-def" => {
            let p = M::test(&ps[0]);
            x().bbox(&ps[0]) == pred(&p.antidomain().times(x()).antirange())
        }
        "bdia-def" => {
            let p = M::test(&ps[0]);
            x().bdia(&ps[0]) == pred(&p.times(x()).range())
        }
        "de-morgan" => {
            let p = &ps[0];
            x().fbox(p) == x().fdia(&p.complement()).complement()
                && x().bbox(p) == x().bdia(&p.complement()).complement()
        }
        "wlp-seq" => x().times(y()).fbox(&ps[0]) == x().fbox(&y().fbox(&ps[0])),
        "wlp-choice" => x().plus(y()).fbox(&ps[0]) == x().fbox(&ps[0]).intersect(&y().fbox(&ps[0])),
        "wlp-cond" => {
            let (p, q) = (&ps[0], &ps[1]);
            let tp = M::test(p);
            let prog = tp.times(x()).plus(&tp.antidomain().times(y()));
            prog.fbox(q)
                == p.complement()
                    .union(&x().fbox(q))
                    .intersect(&p.union(&y().fbox(q)))
        }
        "wlp-test" => M::test(&ps[0]).fbox(&ps[1]) == ps[0].complement().union(&ps[1]),
        "wlp-star" => {
            let i = &ps[0];
            implies(i.subset_of(&x().fbox(i)), i.subset_of(&x().star().fbox(i)))
        }
        "wlp-star-unfold" => {
            let q = &ps[0];
            let s = x().star().fbox(q);
            s == q.intersect(&x().fbox(&s))
        }
        "wlp-cmd" => {
            let (p, i, q) = (&ps[0], &ps[1], &ps[2]);
            implies(
                p.subset_of(i) && i.subset_of(&x().fbox(i)) && i.subset_of(q),
                p.subset_of(&x().star().fbox(q)),
            )
        }
        "wlp-while" => {
            let (p, i, q) = (&ps[0], &ps[1], &ps[2]);
            let tp = M::test(p);
            let prog = tp.times(x()).star().times(&tp.antidomain());
            implies(
                i.intersect(p).subset_of(&x().fbox(i))
                    && i.intersect(&p.complement()).subset_of(q),
                i.subset_of(&prog.fbox(q)),
            )
        }
        "inv-closure" => {
            let (i, j) = (&ps[0], &ps[1]);
            let inv = |p: &FinitePred| p.subset_of(&x().fbox(p));
            implies(inv(i) && inv(j), inv(&i.union(j)) && inv(&i.intersect(j)))
        }
        "adjunction-fwd" => {
            let (p, q) = (&ps[0], &ps[1]);
            x().fdia(p).subset_of(q) == p.subset_of(&x().bbox(q))
        }
        "adjunction-bwd" => {
            let (p, q) = (&ps[0], &ps[1]);
            x().bdia(p).subset_of(q) == p.subset_of(&x().fbox(q))
        }
        "iso-commute" => iso_commute(&x().to_rel(), &y().to_rel(), &ps[0]),
        "mult-comm" => x().times(y()) == y().times(x()),
        other => unreachable!("law table and evaluator disagree on {other}"),
    }
}

fn iso_commute(r: &FiniteRel, s: &FiniteRel, p: &FinitePred) -> bool {
    let f = FiniteSta::from_rel;
    let (fr, fs) = (f(r), f(s));
    fr.to_rel() == *r
        && f(&r.times(s)) == fr.times(&fs)
        && f(&r.plus(s)) == fr.plus(&fs)
        && f(&r.star()) == fr.star()
        && f(&r.antidomain()) == fr.antidomain()
        && f(&r.antirange()) == fr.antirange()
        && r.fbox(p) == fr.fbox(p)
        && r.bdia(p) == fr.bdia(p)
}

struct Instance<M> {
    xs: Vec<M>,
    ps: Vec<FinitePred>,
}

impl<M: fmt::Debug> fmt::Display for Instance<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y", "z"];
        let pnames = ["p", "q", "r"];
        let mut parts = Vec::new();
        for (i, x) in self.xs.iter().enumerate() {
            parts.push(format!("{} = {:?}", names[i], x));
        }
        for (i, p) in self.ps.iter().enumerate() {
            parts.push(format!("{} = {:?}", pnames[i], p));
        }
        f.write_str(&parts.join(", "))
    }
}

/// Upper bound on the instance count of a single exhaustive run.
const EXHAUSTIVE_CAP: u128 = 1 << 20;

fn exhaustive_bits(law: &Law, n: usize) -> u32 {
    (law.elems * n * n + law.preds * n) as u32
}

fn check_exhaustive<M: ModalKleene>(law: &Law, n: usize) -> Result<LawResult, AlgebraError> {
    let bits = exhaustive_bits(law, n);
    let combos: u128 = 1u128 << bits;
    if n > 3 || (n == 3 && combos > EXHAUSTIVE_CAP) {
        return Err(AlgebraError::ExhaustiveTooLarge {
            law: law.id.to_string(),
            n,
            combos,
        });
    }
    let elem_bits = n * n;
    let elem_mask = (1u64 << elem_bits) - 1;
    let pred_mask = (1u64 << n) - 1;
    for idx in 0..combos as u64 {
        let mut rest = idx;
        let xs: Vec<M> = (0..law.elems)
            .map(|_| {
                let e = M::from_index(n, rest & elem_mask);
                rest >>= elem_bits;
                e
            })
            .collect();
        let ps: Vec<FinitePred> = (0..law.preds)
            .map(|_| {
                let p = FinitePred::from_bits(n, rest & pred_mask);
                rest >>= n;
                p
            })
            .collect();
        if !holds(law.id, n, &xs, &ps) {
            return Ok(LawResult {
                law: law.id.to_string(),
                mode: "exhaustive".into(),
                pass: false,
                checked: idx + 1,
                counterexample: Some(Instance { xs, ps }.to_string()),
            });
        }
    }
    Ok(LawResult {
        law: law.id.to_string(),
        mode: "exhaustive".into(),
        pass: true,
        checked: combos as u64,
        counterexample: None,
    })
}

fn law_seed(seed: u64, id: &str) -> u64 {
    // FNV-1a so every law draws an independent, stable stream
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

fn check_random<M: ModalKleene>(law: &Law, n: usize, seed: u64, trials: u64) -> LawResult {
    const DENSITIES: [f64; 4] = [0.1, 0.25, 0.4, 0.6];
    let mut rng = ChaCha8Rng::seed_from_u64(law_seed(seed, law.id));
    for t in 0..trials {
        let xs: Vec<M> = (0..law.elems)
            .map(|_| {
                let d = DENSITIES[rng.gen_range(0..DENSITIES.len())];
                M::random(n, d, &mut rng)
            })
            .collect();
        let ps: Vec<FinitePred> = (0..law.preds)
            .map(|_| FinitePred::random(n, &mut rng))
            .collect();
        if !holds(law.id, n, &xs, &ps) {
            return LawResult {
                law: law.id.to_string(),
                mode: "random".into(),
                pass: false,
                checked: t + 1,
                counterexample: Some(Instance { xs, ps }.to_string()),
            };
        }
    }
    LawResult {
        law: law.id.to_string(),
        mode: "random".into(),
        pass: true,
        checked: trials,
        counterexample: None,
    }
}

fn check_one<M: ModalKleene>(law: &Law, n: usize, mode: LawMode) -> Result<LawResult, AlgebraError> {
    match mode {
        LawMode::Exhaustive => check_exhaustive::<M>(law, n),
        LawMode::Random { seed, trials } => Ok(check_random::<M>(law, n, seed, trials)),
    }
}

/// Checks the named laws (identifiers or group names; empty means `all`).
///
/// Laws are evaluated in parallel, one thread per law; results keep the
/// order of the database.
pub fn check_laws(model: Model, n: usize, laws: &[&str], mode: LawMode) -> Result<LawReport, AlgebraError> {
    super::check_size(n)?;
    let selected = resolve(laws)?;
    if mode == LawMode::Exhaustive {
        if let Some(l) = selected
            .iter()
            .find(|l| n > 3 || (n == 3 && (1u128 << exhaustive_bits(l, n)) > EXHAUSTIVE_CAP))
        {
            return Err(AlgebraError::ExhaustiveTooLarge {
                law: l.id.to_string(),
                n,
                combos: 1u128 << exhaustive_bits(l, n).min(127),
            });
        }
    }
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = selected
            .iter()
            .map(|l| {
                scope.spawn(move || match model {
                    Model::Rel => check_one::<FiniteRel>(l, n, mode),
                    Model::Sta => check_one::<FiniteSta>(l, n, mode),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("law worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    debug_assert!(results.iter().all(|r| r.mode == mode.name()));
    Ok(LawReport { model, n, results })
}
