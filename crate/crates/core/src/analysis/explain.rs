use indexmap::IndexMap;
use serde::Serialize;

use super::{resolve_evidence, AnalysisError, Observation};
use crate::inference::{mpe, Evidence};
use crate::network::CompiledNetwork;
use crate::scalar::Scalar;

/// A most probable explanation projected onto a set of nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", bound(serialize = "S: Scalar"))]
pub struct TargetExplanation<S> {
    /// State label per reported node, in network order.
    pub assignment: IndexMap<String, String>,
    /// Joint probability of the full most probable assignment and the evidence.
    pub probability: S,
}

/// MPE under `evidence`, reporting only `restrict_to` (all unobserved nodes
/// when `None`).
pub fn restricted_mpe<S: Scalar>(
    net: &CompiledNetwork<S>,
    evidence: &Evidence,
    restrict_to: Option<&[String]>,
) -> Result<TargetExplanation<S>, AnalysisError> {
    if let Some(ids) = restrict_to {
        if let Some(id) = ids.iter().find(|id| net.index_of(id).is_none()) {
            return Err(AnalysisError::UnknownNode(id.clone()));
        }
    }
    let explanation = mpe(net, evidence)?;
    let assignment = explanation
        .assignment
        .iter()
        .filter(|(id, _)| restrict_to.is_none_or(|ids| ids.contains(id)))
        .map(|(id, s)| {
            let node = net.get(id).expect("assignment ids come from the network");
            (id.clone(), node.states[*s].clone())
        })
        .collect();
    Ok(TargetExplanation {
        assignment,
        probability: explanation.probability,
    })
}

/// Sets `target = desired` and reports the most probable states of the
/// fact indicators.
pub fn explain_target<S: Scalar>(
    net: &CompiledNetwork<S>,
    target: &str,
    desired: &Observation,
) -> Result<TargetExplanation<S>, AnalysisError> {
    let mut observations = std::collections::BTreeMap::new();
    observations.insert(target.to_owned(), desired.clone());
    let (evidence, _) = resolve_evidence(net, &observations)?;
    let facts: Vec<String> = net
        .fact_indicators()
        .into_iter()
        .map(|i| net.node(i).id.clone())
        .filter(|id| id != target)
        .collect();
    restricted_mpe(net, &evidence, Some(&facts))
}
