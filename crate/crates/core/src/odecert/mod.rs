//! Side conditions of evolution commands.
//!
//! Flow certification against a vector field, Lipschitz estimates,
//! differential-invariant checking by Lie derivatives, and an RK4
//! integrator used as the numeric oracle. Also hosts the falsifier, which
//! searches for initial states whose sampled runs violate a postcondition.

mod falsify;
mod flow;
mod invariant;
mod rk4;

pub use falsify::{falsify, run_trial, trial_seed, CounterexampleTrace, FalsifyConfig};
pub use flow::{
    certify_flow, flow_state, lipschitz_estimate, CertifyConfig, ConditionCheck, FlowCertificate, Lipschitz,
    LipschitzMethod,
};
pub use invariant::{check_diff_invariant, AtomRule, AtomRuling, DiffInvariantReport, DinvConfig};
pub use rk4::{rk4_integrate, Trajectory};
pub(crate) use rk4::{rk4_signed, Stepper};

use thiserror::Error;

use crate::symexpr::EvalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size must be positive and finite")]
    BadStep,
    #[error("field and flow (or store) do not range over the same variables")]
    VariableMismatch,
    #[error("region is degenerate in `{0}`")]
    DegenerateRegion(String),
    #[error("at least two samples are needed")]
    TooFewSamples,
    #[error(transparent)]
    Eval(#[from] EvalError),
}
