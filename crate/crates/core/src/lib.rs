//! Sequential MCMC: an ensemble of time-inhomogeneous Markov chains that
//! tracks a growing sequence of posteriors as observations arrive.
//!
//! The crate provides the ensemble engine with its adaptive stopping rule,
//! two model plug-ins (a Gaussian mixture and a Gaussian-process probit
//! regression), the comparison samplers, and an exact finite-state checker
//! for the convergence bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod gp;
pub mod mixture;
pub mod par;
pub mod params;
pub mod rng;
pub mod stats;
pub mod theory;

pub use engine::{
    advance_step, init_ensemble, run_stream, DiagComponent, EngineOptions, Ensemble, FhatPoint, KernelSuite,
    Model, RunReport, ScheduleConfig, StepRecord, StopRule,
};
pub use error::{Result, SmcmcError};
pub use par::ExecPolicy;
pub use params::{ChainState, ParameterVector};
