use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eval, normalize, Expr, Valuation};

#[derive(Debug, Clone, PartialEq)]
pub enum ExprEquality {
    /// The difference normalises to zero.
    Equal,
    /// A valuation at which the two sides differ beyond tolerance.
    NotEqual(Valuation<f64>),
    /// Outside the normaliser's reach; the payload says why.
    Unknown(String),
}

pub const LIKELY_EQUAL: &str = "likely-equal";

#[derive(Debug, Clone)]
pub struct EqualityConfig {
    pub samples: usize,
    pub rel_tol: f64,
    pub seed: u64,
    /// Sampling interval for every name.
    pub range: (f64, f64),
}

impl Default for EqualityConfig {
    fn default() -> Self {
        Self {
            samples: 32,
            rel_tol: 1e-9,
            seed: 0x5eed,
            range: (-3.0, 3.0),
        }
    }
}

/// Decide `a = b` as functions of their free names.
pub fn expr_eq(a: &Expr, b: &Expr, cfg: &EqualityConfig) -> ExprEquality {
    let diff = a.clone() - b.clone();
    if normalize(&diff).is_zero() {
        return ExprEquality::Equal;
    }
    let mut names = a.names();
    names.extend(b.names());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut compared = 0;
    for _ in 0..cfg.samples * 4 {
        if compared >= cfg.samples {
            break;
        }
        let v: Valuation<f64> = names
            .iter()
            .map(|n| (n.clone(), rng.gen_range(cfg.range.0..cfg.range.1)))
            .collect();
        let (Ok(x), Ok(y)) = (eval::<f64>(a, &v), eval::<f64>(b, &v)) else {
            continue;
        };
        if !x.is_finite() || !y.is_finite() {
            continue;
        }
        compared += 1;
        let scale = 1f64.max(x.abs()).max(y.abs());
        if (x - y).abs() > cfg.rel_tol * scale {
            return ExprEquality::NotEqual(v);
        }
    }
    if compared == 0 {
        return ExprEquality::Unknown("no evaluable sample points".into());
    }
    ExprEquality::Unknown(LIKELY_EQUAL.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{int, time, var};

    #[test]
    fn double_angle_is_beyond_the_normaliser() {
        let a = (int(2) * time()).sin();
        let b = int(2) * time().sin() * time().cos();
        assert_eq!(
            expr_eq(&a, &b, &EqualityConfig::default()),
            ExprEquality::Unknown(LIKELY_EQUAL.into())
        );
    }

    #[test]
    fn square_is_product() {
        let x = var("x");
        assert_eq!(
            expr_eq(&x.clone().pow(2), &(x.clone() * x), &EqualityConfig::default()),
            ExprEquality::Equal
        );
    }

    #[test]
    fn square_is_not_cube() {
        let x = var("x");
        match expr_eq(&x.clone().pow(2), &x.pow(3), &EqualityConfig::default()) {
            ExprEquality::NotEqual(w) => {
                let xv = w["x"];
                assert!((xv * xv - xv * xv * xv).abs() > 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}
