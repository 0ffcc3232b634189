//! Scenario execution and comparison, indicator moments, backward target
//! explanation and sensitivity analysis over a compiled network.

mod compare;
mod explain;
mod scenario;
mod sensitivity;

use thiserror::Error;

use crate::inference::InferenceError;

pub use compare::{compare_scenarios, CompareRow, CompareTable};
pub use explain::{explain_target, restricted_mpe, TargetExplanation};
pub use scenario::{
    indicator_moments, resolve_evidence, run_scenario, MomentTable, Moments, Observation, Scenario,
    ScenarioReport,
};
pub use sensitivity::{sensitivity, Swing, SwingStatistic};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{node}` has no state `{state}`")]
    UnknownState { node: String, state: String },
    #[error("node `{0}` is ranked; observe it with a state label, not a number")]
    ValueOnRankedNode(String),
    #[error("observation of `{0}` is not a finite number")]
    NonFiniteValue(String),
    #[error("comparison needs at least two scenarios, got {0}")]
    TooFewScenarios(usize),
    #[error("candidate `{0}` is the sensitivity target")]
    CandidateIsTarget(String),
    #[error("target `{0}` has no interval bounds; name a state for a probability swing")]
    TargetNeedsState(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

impl AnalysisError {
    /// The node named by an unknown-node error, however it was raised.
    pub fn unknown_node(&self) -> Option<&str> {
        match self {
            AnalysisError::UnknownNode(id) | AnalysisError::Inference(InferenceError::UnknownNode(id)) => {
                Some(id)
            }
            _ => None,
        }
    }
}
