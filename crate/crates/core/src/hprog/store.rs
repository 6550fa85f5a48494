use std::collections::BTreeMap;
use std::fmt;

use super::HprogError;
use crate::symexpr::{eval, Bindings, Expr, Layered, Valuation};
use crate::Scalar;

/// Values of the program variables; the variable set is fixed at creation.
#[derive(Clone, PartialEq, Default)]
pub struct Store<S> {
    vals: BTreeMap<String, S>,
}

impl<S: Scalar> Store<S> {
    pub fn new<K: Into<String>>(vals: impl IntoIterator<Item = (K, S)>) -> Self {
        Self {
            vals: vals.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn get(&self, var: &str) -> Option<S> {
        self.vals.get(var).copied()
    }

    /// Rebinds an existing variable.
    pub fn set(&mut self, var: &str, value: S) -> Result<(), HprogError> {
        match self.vals.get_mut(var) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(HprogError::UnknownVar(var.to_string())),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.vals.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, S)> {
        self.vals.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn as_map(&self) -> &BTreeMap<String, S> {
        &self.vals
    }

    pub fn is_finite(&self) -> bool {
        self.vals.values().all(|v| v.is_finite())
    }

    /// Largest coordinate difference, `inf` when the variable sets differ.
    pub fn distance(&self, other: &Store<S>) -> S {
        if self.vals.len() != other.vals.len() {
            return S::infinity();
        }
        let mut d = S::zero();
        for (k, v) in &self.vals {
            match other.vals.get(k) {
                Some(w) => d = d.max((*v - *w).abs()),
                None => return S::infinity(),
            }
        }
        d
    }

    /// Bit pattern used to deduplicate sampled stores.
    pub(crate) fn key(&self) -> Vec<u64> {
        self.vals.values().map(|v| v.as_f64().to_bits()).collect()
    }
}

impl<S: Copy> Bindings<S> for Store<S> {
    fn lookup(&self, name: &str) -> Option<S> {
        self.vals.get(name).copied()
    }
}

impl<S: fmt::Debug> fmt::Debug for Store<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.vals.iter()).finish()
    }
}

impl<S: Scalar> From<Store<S>> for Valuation<S> {
    fn from(s: Store<S>) -> Self {
        s.vals
    }
}

/// `s[v := e(s)]`, evaluating `e` with the constants as a fallback layer.
pub fn store_update<S: Scalar>(
    s: &Store<S>,
    var: &str,
    e: &Expr,
    consts: &Valuation<S>,
) -> Result<Store<S>, HprogError> {
    let env = Layered::new(s, consts);
    let value = eval(e, &env).map_err(HprogError::eval)?;
    let mut out = s.clone();
    out.set(var, value)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, var};

    #[test]
    fn velocity_flip() {
        let s = Store::new([("x", 1.0), ("v", 2.0)]);
        let out = store_update(&s, "v", &-var("v"), &Valuation::new()).unwrap();
        assert_eq!(out, Store::new([("x", 1.0), ("v", -2.0)]));
    }

    #[test]
    fn unknown_variable() {
        let s = Store::new([("x", 1.0)]);
        assert_eq!(
            store_update(&s, "y", &int(1), &Valuation::new()),
            Err(HprogError::UnknownVar("y".into()))
        );
    }
}
