//! Powerset-valued state transformers `X -> 2^X` with Kleisli composition.

use std::fmt;

use rand::Rng;

use super::{check_size, full_mask, AlgebraError, FinitePred, FiniteRel, ModalKleene};

/// A state transformer; `image[x]` is the set of successors of `x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteSta {
    n: usize,
    image: Vec<FinitePred>,
}

impl FiniteSta {
    pub fn new(images: Vec<FinitePred>) -> Result<Self, AlgebraError> {
        let n = images.len();
        check_size(n)?;
        if let Some(bad) = images.iter().find(|p| p.n() != n) {
            return Err(AlgebraError::DimensionMismatch(n, bad.n()));
        }
        Ok(Self { n, image: images })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, x: usize) -> FinitePred {
        self.image[x]
    }

    /// Lifts a set of states through the transformer: the union of images.
    pub fn lift(&self, p: &FinitePred) -> FinitePred {
        p.members()
            .into_iter()
            .fold(FinitePred::empty(self.n), |acc, x| acc.union(&self.image[x]))
    }

    /// The isomorphism from relations: `x |-> {y | (x, y) in R}`.
    pub fn from_rel(r: &FiniteRel) -> Self {
        let n = r.n();
        Self {
            n,
            image: r.rows().iter().map(|&b| FinitePred::from_bits(n, b)).collect(),
        }
    }

    /// The inverse isomorphism back to relations.
    pub fn to_rel(&self) -> FiniteRel {
        FiniteRel::from_rows(self.n, self.image.iter().map(|p| p.bits()).collect())
    }

    /// Kleisli composition, first `self` then `o`.
    pub fn kleisli(&self, o: &Self) -> Result<Self, AlgebraError> {
        if self.n != o.n {
            return Err(AlgebraError::DimensionMismatch(self.n, o.n));
        }
        Ok(self.times(o))
    }

    /// The opposite transformer `f^op(y) = {x | y in f(x)}`.
    pub fn op(&self) -> Self {
        let image = (0..self.n)
            .map(|y| {
                let xs = (0..self.n).filter(|&x| self.image[x].contains(y));
                FinitePred::new(self.n, xs).expect("in range")
            })
            .collect();
        Self { n: self.n, image }
    }

    fn unit(n: usize, x: usize) -> FinitePred {
        FinitePred::from_bits(n, 1 << x)
    }
}

impl ModalKleene for FiniteSta {
    fn size(&self) -> usize {
        self.n
    }

    fn zero(n: usize) -> Self {
        Self {
            n,
            image: vec![FinitePred::empty(n); n],
        }
    }

    fn one(n: usize) -> Self {
        Self {
            n,
            image: (0..n).map(|x| Self::unit(n, x)).collect(),
        }
    }

    fn plus(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            image: self.image.iter().zip(&o.image).map(|(a, b)| a.union(b)).collect(),
        }
    }

    fn times(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            image: self.image.iter().map(|p| o.lift(p)).collect(),
        }
    }

    fn star(&self) -> Self {
        // least fixpoint of X = eta + f . X, reached within n rounds
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
            image: (0..self.n)
                .map(|x| {
                    if self.image[x] == FinitePred::empty(self.n) {
                        Self::unit(self.n, x)
                    } else {
                        FinitePred::empty(self.n)
                    }
                })
                .collect(),
        }
    }

    fn antirange(&self) -> Self {
        self.op().antidomain()
    }

    fn leq(&self, o: &Self) -> bool {
        self.image.iter().zip(&o.image).all(|(a, b)| a.subset_of(b))
    }

    fn test(p: &FinitePred) -> Self {
        let n = p.n();
        Self {
            n,
            image: (0..n)
                .map(|x| {
                    if p.contains(x) {
                        Self::unit(n, x)
                    } else {
                        FinitePred::empty(n)
                    }
                })
                .collect(),
        }
    }

    fn as_test(&self) -> Option<FinitePred> {
        let mut members = Vec::new();
        for x in 0..self.n {
            let img = self.image[x];
            if img == Self::unit(self.n, x) {
                members.push(x);
            } else if img != FinitePred::empty(self.n) {
                return None;
            }
        }
        FinitePred::new(self.n, members).ok()
    }

    fn fbox(&self, p: &FinitePred) -> FinitePred {
        let xs = (0..self.n).filter(|&x| self.image[x].subset_of(p));
        FinitePred::new(self.n, xs).expect("in range")
    }

    fn fdia(&self, p: &FinitePred) -> FinitePred {
        let xs = (0..self.n).filter(|&x| self.image[x].intersect(p) != FinitePred::empty(self.n));
        FinitePred::new(self.n, xs).expect("in range")
    }

    fn bbox(&self, p: &FinitePred) -> FinitePred {
        self.op().fbox(p)
    }

    fn bdia(&self, p: &FinitePred) -> FinitePred {
        self.lift(p)
    }

    fn from_index(n: usize, idx: u64) -> Self {
        let m = full_mask(n);
        Self {
            n,
            image: (0..n)
                .map(|x| FinitePred::from_bits(n, (idx >> (x * n)) & m))
                .collect(),
        }
    }

    fn random<R: Rng>(n: usize, density: f64, rng: &mut R) -> Self {
        let image = (0..n)
            .map(|_| {
                let ys = (0..n).filter(|_| rng.gen_bool(density)).collect::<Vec<_>>();
                FinitePred::new(n, ys).expect("in range")
            })
            .collect();
        Self { n, image }
    }

    fn to_rel(&self) -> FiniteRel {
        FiniteSta::to_rel(self)
    }

    fn from_rel(r: &FiniteRel) -> Self {
        FiniteSta::from_rel(r)
    }
}

impl fmt::Debug for FiniteSta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("sta{")?;
        for (x, img) in self.image.iter().enumerate() {
            if x > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}->{img:?}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_relations() {
        let r = FiniteRel::new(3, [(0, 1), (2, 2), (1, 0)]).unwrap();
        assert_eq!(FiniteSta::from_rel(&r).to_rel(), r);
    }

    #[test]
    fn kleisli_matches_relational_composition() {
        let r = FiniteRel::new(3, [(0, 1), (1, 2)]).unwrap();
        let s = FiniteRel::new(3, [(1, 1), (2, 0)]).unwrap();
        let k = FiniteSta::from_rel(&r)
            .kleisli(&FiniteSta::from_rel(&s))
            .unwrap();
        assert_eq!(k.to_rel(), r.compose(&s).unwrap());
    }
}
