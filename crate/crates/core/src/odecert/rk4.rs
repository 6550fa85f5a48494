//! Fixed-step classical Runge-Kutta integration.

use std::collections::BTreeMap;

use super::OdeError;
use crate::hprog::{Store, VectorField};
use crate::symexpr::{eval, EvalError, Layered, Valuation};
use crate::Scalar;

/// Sampled trajectory `(t, state)` starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub points: Vec<(S, Store<S>)>,
    /// Set when a non-finite value stopped the integration early.
    pub divergent: bool,
}

impl<S: Scalar> Trajectory<S> {
    pub fn last(&self) -> &Store<S> {
        &self.points.last().expect("trajectory has its initial point").1
    }
}

/// Integrator state: variable names in store order and a scratch env.
pub(crate) struct Stepper<'a, S> {
    consts: &'a Valuation<S>,
    names: Vec<String>,
    /// Index of each name's field component (None when the variable is not
    /// driven by the field and therefore constant).
    comps: Vec<Option<&'a crate::symexpr::Expr>>,
    env: BTreeMap<String, S>,
}

impl<'a, S: Scalar> Stepper<'a, S> {
    pub(crate) fn new(field: &'a VectorField, s0: &Store<S>, consts: &'a Valuation<S>) -> Self {
        let names: Vec<String> = s0.vars().map(str::to_string).collect();
        let comps = names.iter().map(|n| field.get(n)).collect();
        Self {
            consts,
            names,
            comps,
            env: s0.as_map().clone(),
        }
    }

    fn deriv(&mut self, y: &[S]) -> Result<Vec<S>, EvalError> {
        for (n, v) in self.names.iter().zip(y) {
            *self.env.get_mut(n).expect("store variable") = *v;
        }
        let env = Layered::new(&self.env, self.consts);
        self.comps
            .iter()
            .map(|c| match c {
                Some(e) => eval(e, &env),
                None => Ok(S::zero()),
            })
            .collect()
    }

    pub(crate) fn step(&mut self, y: &[S], h: S) -> Result<Vec<S>, EvalError> {
        let two = S::lit(2.0);
        let six = S::lit(6.0);
        let axpy = |a: &[S], k: &[S], c: S| -> Vec<S> { a.iter().zip(k).map(|(x, d)| *x + c * *d).collect() };
        let k1 = self.deriv(y)?;
        let k2 = self.deriv(&axpy(y, &k1, h / two))?;
        let k3 = self.deriv(&axpy(y, &k2, h / two))?;
        let k4 = self.deriv(&axpy(y, &k3, h))?;
        Ok((0..y.len())
            .map(|i| y[i] + h / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
            .collect())
    }

    pub(crate) fn values(&self, s: &Store<S>) -> Vec<S> {
        self.names.iter().map(|n| s.get(n).expect("store variable")).collect()
    }

    pub(crate) fn store(&self, y: &[S]) -> Store<S> {
        Store::new(self.names.iter().cloned().zip(y.iter().copied()))
    }
}

/// Integrates `field` from `s0` for `steps` steps of size `h`.
///
/// Variables of `s0` without a field component stay constant. A non-finite
/// state truncates the trajectory and sets `divergent`.
pub fn rk4_integrate<S: Scalar>(
    field: &VectorField,
    s0: &Store<S>,
    consts: &Valuation<S>,
    h: S,
    steps: usize,
) -> Result<Trajectory<S>, OdeError> {
    if !(h > S::zero() && h.is_finite()) {
        return Err(OdeError::BadStep);
    }
    rk4_signed(field, s0, consts, h, steps)
}

/// As [`rk4_integrate`] but `h` may be negative (backward integration).
pub(crate) fn rk4_signed<S: Scalar>(
    field: &VectorField,
    s0: &Store<S>,
    consts: &Valuation<S>,
    h: S,
    steps: usize,
) -> Result<Trajectory<S>, OdeError> {
    let mut st = Stepper::new(field, s0, consts);
    let mut y = st.values(s0);
    let mut points = Vec::with_capacity(steps + 1);
    points.push((S::zero(), s0.clone()));
    for k in 1..=steps {
        y = st.step(&y, h)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Ok(Trajectory {
                points,
                divergent: true,
            });
        }
        points.push((S::lit(k as f64) * h, st.store(&y)));
    }
    Ok(Trajectory {
        points,
        divergent: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, sym, var};

    #[test]
    fn ball_is_reproduced() {
        let field = VectorField::new([("x", var("v")), ("v", sym("g"))]).unwrap();
        let s0 = Store::new([("x", 1.0), ("v", 0.0)]);
        let consts: Valuation<f64> = [("g".to_string(), -1.0)].into();
        let tr = rk4_integrate(&field, &s0, &consts, 1e-3, 1000).unwrap();
        let end = tr.last();
        assert!((end.get("x").unwrap() - 0.5).abs() <= 1e-9);
        assert!((end.get("v").unwrap() + 1.0).abs() <= 1e-9);
    }

    #[test]
    fn blow_up_is_flagged() {
        let field = VectorField::new([("x", var("x") * var("x"))]).unwrap();
        let s0 = Store::new([("x", 1.0)]);
        let tr = rk4_integrate(&field, &s0, &Valuation::new(), 0.1, 1000).unwrap();
        assert!(tr.divergent);
        let zero = VectorField::new([("x", int(0))]).unwrap();
        assert!(rk4_integrate(&zero, &s0, &Valuation::new(), 0.0, 3).is_err());
    }
}
