//! Finite concrete models of modal Kleene algebra.
//!
//! Relations ([`FiniteRel`]) and powerset state transformers
//! ([`FiniteSta`]) over the carrier `{0..n-1}`, with tests as subsets
//! ([`FinitePred`]). Both models implement [`ModalKleene`], so the law
//! harness in [`laws`] can check every axiom and wlp rule in either model by
//! enumeration or seeded random sampling.

pub mod laws;
mod rel;
mod sta;

pub use laws::{check_laws, LawMode, LawReport, LawResult, Model};
pub use rel::FiniteRel;
pub use sta::FiniteSta;

use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Largest carrier supported by the bitset representation.
pub const MAX_STATES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0} vs {1} states")]
    DimensionMismatch(usize, usize),
    #[error("state count {0} outside 1..={MAX_STATES}")]
    BadSize(usize),
    #[error("state {state} out of range for {n} states")]
    StateOutOfRange { state: usize, n: usize },
    #[error("unknown law identifier `{0}`")]
    UnknownLaw(String),
    #[error("exhaustive check of `{law}` over {n} states needs {combos} instances; use random mode")]
    ExhaustiveTooLarge { law: String, n: usize, combos: u128 },
}

pub(crate) fn check_size(n: usize) -> Result<(), AlgebraError> {
    if n == 0 || n > MAX_STATES {
        Err(AlgebraError::BadSize(n))
    } else {
        Ok(())
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A subset of `{0..n-1}`; the tests/propositions of the algebra.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FinitePred {
    n: usize,
    bits: u64,
}

impl FinitePred {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self, AlgebraError> {
        check_size(n)?;
        let mut bits = 0u64;
        for s in members {
            if s >= n {
                return Err(AlgebraError::StateOutOfRange { state: s, n });
            }
            bits |= 1 << s;
        }
        Ok(Self { n, bits })
    }

    pub(crate) fn from_bits(n: usize, bits: u64) -> Self {
        Self {
            n,
            bits: bits & full_mask(n),
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_bits(n, 0)
    }

    pub fn full(n: usize) -> Self {
        Self::from_bits(n, full_mask(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn contains(&self, s: usize) -> bool {
        s < self.n && self.bits >> s & 1 == 1
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.n).filter(|s| self.contains(*s)).collect()
    }

    pub fn complement(&self) -> Self {
        Self::from_bits(self.n, !self.bits)
    }

    pub fn union(&self, o: &Self) -> Self {
        Self::from_bits(self.n, self.bits | o.bits)
    }

    pub fn intersect(&self, o: &Self) -> Self {
        Self::from_bits(self.n, self.bits & o.bits)
    }

    pub fn subset_of(&self, o: &Self) -> bool {
        self.bits & !o.bits == 0
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        Self::from_bits(n, rng.gen())
    }
}

impl fmt::Debug for FinitePred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.members())
    }
}

/// Operations shared by the relational and state-transformer models.
///
/// Binary operations assume equal carriers; the checked public entry points
/// live on the concrete types.
pub trait ModalKleene: Clone + PartialEq + fmt::Debug + Sized {
    fn size(&self) -> usize;
    fn zero(n: usize) -> Self;
    fn one(n: usize) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn star(&self) -> Self;
    fn antidomain(&self) -> Self;
    fn antirange(&self) -> Self;
    fn leq(&self, o: &Self) -> bool;
    /// The subidentity for a test.
    fn test(p: &FinitePred) -> Self;
    /// The test of a subidentity, `None` otherwise.
    fn as_test(&self) -> Option<FinitePred>;
    fn fbox(&self, p: &FinitePred) -> FinitePred;
    fn fdia(&self, p: &FinitePred) -> FinitePred;
    fn bbox(&self, p: &FinitePred) -> FinitePred;
    fn bdia(&self, p: &FinitePred) -> FinitePred;
    /// The element with index `idx` in a fixed enumeration of all `2^(n*n)`.
    fn from_index(n: usize, idx: u64) -> Self;
    fn random<R: Rng>(n: usize, density: f64, rng: &mut R) -> Self;
    fn to_rel(&self) -> FiniteRel;
    fn from_rel(r: &FiniteRel) -> Self;

    fn domain(&self) -> Self {
        self.antidomain().antidomain()
    }

    fn range(&self) -> Self {
        self.antirange().antirange()
    }
}
