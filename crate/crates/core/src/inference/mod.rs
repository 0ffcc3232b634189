//! Exact inference over compiled networks: posterior marginals and evidence
//! probability by variable elimination, most probable explanation by
//! max-product elimination, and a brute-force enumeration oracle.
//!
//! All functions are pure in `(network, evidence)` and may run concurrently
//! against one shared network.

mod elimination;
mod factor;
mod mpe;
mod oracle;

use std::collections::BTreeMap;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::network::CompiledNetwork;
use crate::scalar::Scalar;

pub use elimination::{evidence_probability, posterior_marginal, posterior_marginals};
pub use factor::Factor;
pub use mpe::{mpe, Explanation};
pub use oracle::{brute_force_mpe, brute_force_oracle, brute_force_oracle_with_cap, ORACLE_STATE_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("state {state} is out of range for node `{node}` with {states} states")]
    StateOutOfRange {
        node: String,
        state: usize,
        states: usize,
    },
    #[error("the evidence has probability zero")]
    ImpossibleEvidence,
    #[error("joint state space of {size} exceeds the enumeration cap of {cap}")]
    StateSpaceTooLarge { size: f64, cap: usize },
}

/// Hard evidence: node id to observed state index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evidence {
    states: BTreeMap<String, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: impl Into<String>, state: usize) -> Self {
        self.set(node, state);
        self
    }

    pub fn set(&mut self, node: impl Into<String>, state: usize) {
        self.states.insert(node.into(), state);
    }

    pub fn remove(&mut self, node: &str) -> Option<usize> {
        self.states.remove(node)
    }

    pub fn get(&self, node: &str) -> Option<usize> {
        self.states.get(node).copied()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.states.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Per-node observed state, indexed like the network's nodes.
    pub(crate) fn resolve<S: Scalar>(
        &self,
        net: &CompiledNetwork<S>,
    ) -> Result<Vec<Option<usize>>, InferenceError> {
        let mut observed = vec![None; net.len()];
        for (id, &state) in &self.states {
            let index = net
                .index_of(id)
                .ok_or_else(|| InferenceError::UnknownNode(id.clone()))?;
            let states = net.cardinality(index);
            if state >= states {
                return Err(InferenceError::StateOutOfRange {
                    node: id.clone(),
                    state,
                    states,
                });
            }
            observed[index] = Some(state);
        }
        Ok(observed)
    }
}

impl<K: Into<String>> FromIterator<(K, usize)> for Evidence {
    fn from_iter<T: IntoIterator<Item = (K, usize)>>(iter: T) -> Self {
        Evidence {
            states: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

/// Marginal distribution of every node, in network order.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior<S> {
    entries: Vec<(String, Vec<S>)>,
}

impl<S: Scalar> Posterior<S> {
    pub(crate) fn new(entries: Vec<(String, Vec<S>)>) -> Self {
        Posterior { entries }
    }

    pub fn get(&self, id: &str) -> Option<&[S]> {
        self.entries
            .iter()
            .find(|(k, _)| k == id)
            .map(|(_, v)| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[S])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest absolute difference between matching entries.
    pub fn max_deviation(&self, other: &Posterior<S>) -> S {
        let mut worst = S::zero();
        for (id, p) in self.iter() {
            match other.get(id) {
                Some(q) if q.len() == p.len() => {
                    for (a, b) in p.iter().zip(q) {
                        worst = worst.max((*a - *b).abs());
                    }
                }
                _ => return S::infinity(),
            }
        }
        if other.len() != self.len() {
            return S::infinity();
        }
        worst
    }
}

impl<S: Scalar> Serialize for Posterior<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> Result<Z::Ok, Z::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// Nodes whose value can influence `targets`: the targets and their ancestors.
pub(crate) fn ancestral_set<S: Scalar>(net: &CompiledNetwork<S>, targets: &[usize]) -> Vec<bool> {
    let mut keep = vec![false; net.len()];
    let mut stack: Vec<usize> = targets.to_vec();
    while let Some(v) = stack.pop() {
        if !keep[v] {
            keep[v] = true;
            stack.extend_from_slice(net.parents_of(v));
        }
    }
    keep
}
