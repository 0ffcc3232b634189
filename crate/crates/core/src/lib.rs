//! Compile activity-based software quality models into discrete Bayesian
//! networks and run exact inference over them.
//!
//! The pipeline is: parse a model ([`parse_model`]), pick a goal, compile it
//! ([`compile`]) into a [`CompiledNetwork`], then query the network with
//! [`posterior_marginals`], [`mpe`] or the scenario helpers in [`analysis`].
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision for the common cases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod compiler;
pub mod inference;
pub mod json;
pub mod model;
pub mod network;
pub mod npt;
pub mod scalar;

pub use analysis::{
    compare_scenarios, explain_target, indicator_moments, run_scenario, sensitivity,
    AnalysisError, Observation, Scenario,
};
pub use compiler::{compile, resolve_goal, CompileError};
pub use inference::{
    brute_force_oracle, evidence_probability, mpe, posterior_marginals, Evidence, InferenceError,
};
pub use model::{parse_model, print_model, ModelError, QualityModel};
pub use network::{CompiledNetwork, NetworkError, NetworkNode, NodeKind};
pub use scalar::Scalar;

/// Double precision network; the default everywhere.
pub type Network = CompiledNetwork<f64>;
/// Single precision network.
pub type Network32 = CompiledNetwork<f32>;
pub type Posterior = inference::Posterior<f64>;
pub type Posterior32 = inference::Posterior<f32>;
pub type Explanation = inference::Explanation<f64>;
pub type ScenarioReport = analysis::ScenarioReport<f64>;
pub type CompareTable = analysis::CompareTable<f64>;
pub type Swing = analysis::Swing<f64>;
pub type Npt = npt::Npt<f64>;
