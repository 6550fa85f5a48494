//! Verification kernel for hybrid programs.
//!
//! Computes weakest liberal preconditions over hybrid-program syntax trees,
//! certifies user-supplied flows against vector fields, checks differential
//! invariants through Lie derivatives and discharges or refutes the resulting
//! real-arithmetic obligations.
//!
//! Symbolic work is exact over [`Rational`]; numeric evaluation, sampling and
//! integration are generic over [`Scalar`] (`f32`/`f64`). The `*64` aliases
//! below fix the scalar to `f64`, which is what the pipeline uses.

pub mod algebra;
pub mod discharge;
pub mod hprog;
pub mod lang;
pub mod odecert;
pub mod report;
pub mod scalar;
pub mod symexpr;
pub mod vcgen;

pub use scalar::Scalar;

/// Exact rational numbers used for constants and polynomial coefficients.
pub type Rational = num_rational::BigRational;

pub type Valuation64 = symexpr::Valuation<f64>;
pub type Store64 = hprog::Store<f64>;
pub type Trajectory64 = odecert::Trajectory<f64>;
pub type SampleOutcome64 = hprog::SampleOutcome<f64>;
