//! Weakest liberal preconditions and verification conditions.
//!
//! [`wlp`] recurses over a [`HybridProgram`] and returns a predicate plus
//! side obligations. Annotated nodes (loops, evolutions with a differential
//! invariant) return their invariant and defer the premises as obligations.
//! [`verify`] closes the loop for a whole problem.

mod dl;
mod obligation;
mod wlp;

pub use dl::{dc_split, ds_closed_form, dw_check};
pub use obligation::{Check, Obligation, Provenance};
pub use wlp::{verify, wlp, ConstDecl, VerifySpec};

use thiserror::Error;

use crate::hprog::HprogError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VcError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("name `{0}` is neither a declared variable nor a constant")]
    UnboundName(String),
    #[error("assignment to `{0}`, which is not a program variable")]
    NotAVariable(String),
    #[error("node at {0} is not an evolution command")]
    NotEvolve(String),
    #[error("closed-form solution needs a constant field; `{0}` depends on the state")]
    NotConstant(String),
    #[error(transparent)]
    Program(#[from] HprogError),
}
