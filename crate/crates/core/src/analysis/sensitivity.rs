use serde::Serialize;

use super::{indicator_moments, AnalysisError};
use crate::inference::{evidence_probability, posterior_marginal, Evidence, InferenceError};
use crate::network::CompiledNetwork;
use crate::scalar::Scalar;

/// What a sweep measures on the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SwingStatistic {
    /// Posterior mean of an indicator target.
    Mean,
    /// Posterior probability of this target state.
    Probability(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", bound(serialize = "S: Scalar"))]
pub struct Swing<S> {
    pub node: String,
    pub swing: S,
    pub min: S,
    pub max: S,
    pub min_state: String,
    pub max_state: String,
}

/// Tornado-style sweep: each candidate is observed in each of its states in
/// turn, on top of `base`, and the range of the target statistic is recorded.
/// States with zero probability are skipped. Results are sorted by swing,
/// largest first, ties by node id.
pub fn sensitivity<S: Scalar>(
    net: &CompiledNetwork<S>,
    target: &str,
    statistic: Option<SwingStatistic>,
    candidates: &[String],
    base: &Evidence,
) -> Result<Vec<Swing<S>>, AnalysisError> {
    let target_node = net
        .get(target)
        .ok_or_else(|| AnalysisError::UnknownNode(target.to_owned()))?;
    let statistic = match statistic {
        Some(s) => s,
        None if target_node.bounds.is_some() => SwingStatistic::Mean,
        None => return Err(AnalysisError::TargetNeedsState(target.to_owned())),
    };
    if let SwingStatistic::Probability(state) = statistic {
        if state >= target_node.cardinality() {
            return Err(InferenceError::StateOutOfRange {
                node: target.to_owned(),
                state,
                states: target_node.cardinality(),
            }
            .into());
        }
    }
    if statistic == SwingStatistic::Mean && target_node.bounds.is_none() {
        return Err(AnalysisError::TargetNeedsState(target.to_owned()));
    }
    let measure = |marginal: &[S]| match statistic {
        SwingStatistic::Mean => {
            indicator_moments(marginal, target_node.bounds.as_ref().expect("checked above")).mean
        }
        SwingStatistic::Probability(state) => marginal[state],
    };
    if evidence_probability(net, base)? <= S::zero() {
        return Err(InferenceError::ImpossibleEvidence.into());
    }

    let mut swings = Vec::with_capacity(candidates.len());
    for candidate in candidates {
        if candidate == target {
            return Err(AnalysisError::CandidateIsTarget(candidate.clone()));
        }
        let node = net
            .get(candidate)
            .ok_or_else(|| AnalysisError::UnknownNode(candidate.clone()))?;
        let mut low: Option<(S, usize)> = None;
        let mut high: Option<(S, usize)> = None;
        for state in 0..node.cardinality() {
            let evidence = base.clone().with(candidate.clone(), state);
            if evidence_probability(net, &evidence)? <= S::zero() {
                continue;
            }
            let value = measure(&posterior_marginal(net, &evidence, target)?);
            if low.is_none_or(|(v, _)| value < v) {
                low = Some((value, state));
            }
            if high.is_none_or(|(v, _)| value > v) {
                high = Some((value, state));
            }
        }
        let (Some((min, lo)), Some((max, hi))) = (low, high) else {
            return Err(InferenceError::ImpossibleEvidence.into());
        };
        swings.push(Swing {
            node: candidate.clone(),
            swing: max - min,
            min,
            max,
            min_state: node.states[lo].clone(),
            max_state: node.states[hi].clone(),
        });
    }
    swings.sort_by(|a, b| {
        b.swing
            .partial_cmp(&a.swing)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.node.cmp(&b.node))
    });
    Ok(swings)
}
