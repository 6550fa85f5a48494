//! Stores, hybrid-program syntax and a sampling semantics.
//!
//! [`run_sampled`] is an executable approximation of the state-transformer
//! semantics: discrete commands are exact, evolution commands contribute
//! every grid point of the guarded orbit (a certified flow when present,
//! RK4 otherwise). It serves as the runtime oracle for falsification and for
//! agreement tests against the wlp calculus; it never proves anything.

mod domain;
mod program;
mod run;
mod store;

pub use domain::{TimeDomain, TimeKind};
pub use program::{AstPath, Evolve, Flow, HybridProgram, VectorField};
pub use run::{guarded_orbit_flow, run_sampled, SampleConfig, SampleOutcome};
pub use store::{store_update, Store};

use thiserror::Error;

use crate::symexpr::EvalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HprogError {
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("evaluation failed{}: {source}", at.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    Eval {
        at: Option<f64>,
        #[source]
        source: EvalError,
    },
    #[error("step size must be positive and finite")]
    BadStep,
    #[error("evolution carries both a flow certificate and a differential invariant")]
    ConflictingStrategy,
    #[error("vector field component for `{0}` mentions time")]
    FieldMentionsTime(String),
    #[error("flow and field disagree on variables: {0}")]
    VariableMismatch(String),
    #[error("invalid time domain: {0}")]
    BadDomain(String),
    #[error("no program node at path {0}")]
    BadPath(String),
}

impl HprogError {
    pub(crate) fn eval(source: EvalError) -> Self {
        HprogError::Eval { at: None, source }
    }
}
