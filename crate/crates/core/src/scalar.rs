//! Floating-point scalars used for numeric evaluation.
//!
//! Symbolic work (normal forms, Fourier–Motzkin) is exact over
//! [`Rational`](crate::Rational); everything that samples, integrates or
//! evaluates numerically is generic over [`Scalar`].

use std::fmt::{Debug, Display};

use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// A real-number approximation usable for evaluation and integration.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Machine epsilon of the representation.
    const EPS: Self;

    fn from_rational(r: &BigRational) -> Self {
        Self::from_f64(r.to_f64().unwrap_or(f64::NAN)).unwrap_or_else(Self::nan)
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            const EPS: Self = <$f>::EPSILON;
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
