//! Binary relations as adjacency bitsets.

use std::fmt;

use rand::Rng;

use super::{check_size, full_mask, AlgebraError, FinitePred, ModalKleene};

/// A relation on `{0..n-1}`; bit `j` of `rows[i]` means `(i, j)` is related.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteRel {
    n: usize,
    rows: Vec<u64>,
}

impl FiniteRel {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, AlgebraError> {
        check_size(n)?;
        let mut rows = vec![0u64; n];
        for (a, b) in pairs {
            for s in [a, b] {
                if s >= n {
                    return Err(AlgebraError::StateOutOfRange { state: s, n });
                }
            }
            rows[a] |= 1 << b;
        }
        Ok(Self { n, rows })
    }

    pub(crate) fn from_rows(n: usize, rows: Vec<u64>) -> Self {
        let m = full_mask(n);
        Self {
            n,
            rows: rows.into_iter().map(|r| r & m).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.rows[a] >> b & 1 == 1
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in 0..self.n {
                if self.related(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn same(&self, o: &Self) -> Result<(), AlgebraError> {
        if self.n == o.n {
            Ok(())
        } else {
            Err(AlgebraError::DimensionMismatch(self.n, o.n))
        }
    }

    /// Relational composition `R ; S`.
    pub fn compose(&self, o: &Self) -> Result<Self, AlgebraError> {
        self.same(o)?;
        Ok(self.times(o))
    }

    pub fn union(&self, o: &Self) -> Result<Self, AlgebraError> {
        self.same(o)?;
        Ok(self.plus(o))
    }

    pub fn converse(&self) -> Self {
        let mut rows = vec![0u64; self.n];
        for (a, b) in self.pairs() {
            rows[b] |= 1 << a;
        }
        Self { n: self.n, rows }
    }

    pub fn subset_of(&self, o: &Self) -> Result<bool, AlgebraError> {
        self.same(o)?;
        Ok(self.leq(o))
    }
}

impl ModalKleene for FiniteRel {
    fn size(&self) -> usize {
        self.n
    }

    fn zero(n: usize) -> Self {
        Self { n, rows: vec![0; n] }
    }

    fn one(n: usize) -> Self {
        Self {
            n,
            rows: (0..n).map(|i| 1u64 << i).collect(),
        }
    }

    fn plus(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            rows: self.rows.iter().zip(&o.rows).map(|(a, b)| a | b).collect(),
        }
    }

    fn times(&self, o: &Self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut acc = 0u64;
                for (k, ok) in o.rows.iter().enumerate() {
                    if r >> k & 1 == 1 {
                        acc |= ok;
                    }
                }
                acc
            })
            .collect();
        Self { n: self.n, rows }
    }

    fn star(&self) -> Self {
        // least fixpoint of X = Id + R;X
        let mut x = Self::one(self.n);
        loop {
            let next = Self::one(self.n).plus(&self.times(&x));
            if next == x {
                return x;
            }
            x = next;
        }
    }

    fn antidomain(&self) -> Self {
        Self {
            n: self.n,
            rows: (0..self.n)
                .map(|i| if self.rows[i] == 0 { 1 << i } else { 0 })
                .collect(),
        }
    }

    fn antirange(&self) -> Self {
        let hit = self.rows.iter().fold(0u64, |a, r| a | r);
        Self {
            n: self.n,
            rows: (0..self.n)
                .map(|i| if hit >> i & 1 == 0 { 1 << i } else { 0 })
                .collect(),
        }
    }

    fn leq(&self, o: &Self) -> bool {
        self.rows.iter().zip(&o.rows).all(|(a, b)| a & !b == 0)
    }

    fn test(p: &FinitePred) -> Self {
        Self {
            n: p.n(),
            rows: (0..p.n())
                .map(|i| if p.contains(i) { 1 << i } else { 0 })
                .collect(),
        }
    }

    fn as_test(&self) -> Option<FinitePred> {
        let mut bits = 0u64;
        for (i, r) in self.rows.iter().enumerate() {
            match *r {
                0 => {}
                x if x == 1 << i => bits |= 1 << i,
                _ => return None,
            }
        }
        Some(FinitePred::from_bits(self.n, bits))
    }

    fn fbox(&self, p: &FinitePred) -> FinitePred {
        let bits = (0..self.n)
            .filter(|&i| self.rows[i] & !p.bits() == 0)
            .fold(0u64, |a, i| a | 1 << i);
        FinitePred::from_bits(self.n, bits)
    }

    fn fdia(&self, p: &FinitePred) -> FinitePred {
        let bits = (0..self.n)
            .filter(|&i| self.rows[i] & p.bits() != 0)
            .fold(0u64, |a, i| a | 1 << i);
        FinitePred::from_bits(self.n, bits)
    }

    fn bbox(&self, p: &FinitePred) -> FinitePred {
        // y such that every predecessor lies in p
        let bad = (0..self.n)
            .filter(|&i| !p.contains(i))
            .fold(0u64, |a, i| a | self.rows[i]);
        FinitePred::from_bits(self.n, !bad)
    }

    fn bdia(&self, p: &FinitePred) -> FinitePred {
        let bits = (0..self.n)
            .filter(|&i| p.contains(i))
            .fold(0u64, |a, i| a | self.rows[i]);
        FinitePred::from_bits(self.n, bits)
    }

    fn from_index(n: usize, idx: u64) -> Self {
        let m = full_mask(n);
        let rows = (0..n).map(|i| (idx >> (i * n)) & m).collect();
        Self { n, rows }
    }

    fn random<R: Rng>(n: usize, density: f64, rng: &mut R) -> Self {
        let mut rows = vec![0u64; n];
        for r in rows.iter_mut() {
            for b in 0..n {
                if rng.gen_bool(density) {
                    *r |= 1 << b;
                }
            }
        }
        Self { n, rows }
    }

    fn to_rel(&self) -> FiniteRel {
        self.clone()
    }

    fn from_rel(r: &FiniteRel) -> Self {
        r.clone()
    }
}

impl fmt::Debug for FiniteRel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rel{:?}", self.pairs())
    }
}
