//! Immutable discrete Bayesian network produced by the compiler.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{sum, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("node `{0}` is declared more than once")]
    DuplicateNode(String),
    #[error("node `{node}` has unknown parent `{parent}`")]
    UnknownParent { node: String, parent: String },
    #[error("node `{0}` lists the same parent twice")]
    RepeatedParent(String),
    #[error("the network contains a cycle through `{0}`")]
    Cycle(String),
    #[error("node `{0}` has fewer than one state")]
    NoStates(String),
    #[error("node `{node}` has a table of {actual} entries, expected {expected}")]
    CptShape {
        node: String,
        expected: usize,
        actual: usize,
    },
    #[error("node `{node}` has an invalid probability in column {column}")]
    InvalidEntry { node: String, column: usize },
    #[error("column {column} of node `{node}` sums to {sum}")]
    NotNormalized {
        node: String,
        column: usize,
        sum: f64,
    },
    #[error("node `{node}` has {actual} bounds for {states} states")]
    BoundsShape {
        node: String,
        states: usize,
        actual: usize,
    },
    #[error("malformed network JSON: {0}")]
    Json(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Activity,
    Fact,
    Indicator,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Activity => "activity",
            NodeKind::Fact => "fact",
            NodeKind::Indicator => "indicator",
        })
    }
}

/// One variable of the network. `cpt` holds one probability vector over
/// `states` per parent configuration; configurations run row-major with the
/// last parent varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct NetworkNode<S> {
    pub id: String,
    pub kind: NodeKind,
    pub states: Vec<String>,
    /// Interval boundaries of indicator nodes (`states.len() + 1` values).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<S>>,
    pub parents: Vec<String>,
    pub cpt: Vec<S>,
}

impl<S: Scalar> NetworkNode<S> {
    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// Index of the interval containing `value`; intervals are half-open
    /// except the last. Values outside the bounds map to the nearest end
    /// interval and report `clamped = true`.
    pub fn interval_of(&self, value: S) -> Option<(usize, bool)> {
        let bounds = self.bounds.as_ref()?;
        let n = bounds.len() - 1;
        if value < bounds[0] {
            return Some((0, true));
        }
        if value > bounds[n] {
            return Some((n - 1, true));
        }
        let idx = (0..n).find(|&i| value < bounds[i + 1]).unwrap_or(n - 1);
        Some((idx, false))
    }

    /// Interval midpoints of an indicator node.
    pub fn midpoints(&self) -> Option<Vec<S>> {
        let two = S::one() + S::one();
        self.bounds
            .as_ref()
            .map(|b| b.windows(2).map(|w| (w[0] + w[1]) / two).collect())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
struct NetworkDoc<S> {
    name: String,
    nodes: Vec<NetworkNode<S>>,
}

#[derive(Clone, Debug)]
pub struct CompiledNetwork<S> {
    name: String,
    nodes: Vec<NetworkNode<S>>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl<S: Scalar> PartialEq for CompiledNetwork<S> {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.nodes == other.nodes
    }
}

impl<S: Scalar> CompiledNetwork<S> {
    /// Validates and indexes a set of nodes.
    pub fn new(name: impl Into<String>, nodes: Vec<NetworkNode<S>>) -> Result<Self, NetworkError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode(node.id.clone()));
            }
        }
        let mut parents = Vec::with_capacity(nodes.len());
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            let mut ps = Vec::with_capacity(node.parents.len());
            for p in &node.parents {
                let &pi = index.get(p).ok_or_else(|| NetworkError::UnknownParent {
                    node: node.id.clone(),
                    parent: p.clone(),
                })?;
                if ps.contains(&pi) {
                    return Err(NetworkError::RepeatedParent(node.id.clone()));
                }
                ps.push(pi);
                children[pi].push(i);
            }
            parents.push(ps);
        }
        for (i, node) in nodes.iter().enumerate() {
            let k = node.cardinality();
            if k == 0 {
                return Err(NetworkError::NoStates(node.id.clone()));
            }
            let columns: usize = parents[i].iter().map(|&p| nodes[p].cardinality()).product();
            if node.cpt.len() != columns * k {
                return Err(NetworkError::CptShape {
                    node: node.id.clone(),
                    expected: columns * k,
                    actual: node.cpt.len(),
                });
            }
            for (c, col) in node.cpt.chunks(k).enumerate() {
                if col.iter().any(|&p| !(p >= S::zero() && p <= S::one())) {
                    return Err(NetworkError::InvalidEntry {
                        node: node.id.clone(),
                        column: c,
                    });
                }
                let total = sum(col);
                if (total - S::one()).abs() > S::normalization_tolerance() {
                    return Err(NetworkError::NotNormalized {
                        node: node.id.clone(),
                        column: c,
                        sum: total.as_f64(),
                    });
                }
            }
            if let Some(bounds) = &node.bounds {
                if bounds.len() != k + 1 || bounds.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(NetworkError::BoundsShape {
                        node: node.id.clone(),
                        states: k,
                        actual: bounds.len(),
                    });
                }
            }
        }
        let topo = topological_order(&nodes, &parents, &children)?;
        Ok(CompiledNetwork {
            name: name.into(),
            nodes,
            index,
            parents,
            children,
            topo,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[NetworkNode<S>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, index: usize) -> &NetworkNode<S> {
        &self.nodes[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&NetworkNode<S>> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn parents_of(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    pub fn children_of(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    /// Parents before children; ties in declaration order.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.nodes[index].cardinality()
    }

    /// `P(node = state | parents = parent_states)`.
    pub fn probability(&self, index: usize, parent_states: &[usize], state: usize) -> S {
        let k = self.cardinality(index);
        let column = self.parents[index]
            .iter()
            .zip(parent_states)
            .fold(0, |acc, (&p, &s)| acc * self.cardinality(p) + s);
        self.nodes[index].cpt[column * k + state]
    }

    /// Indicator nodes whose single parent is a fact node.
    pub fn fact_indicators(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                self.nodes[i].kind == NodeKind::Indicator
                    && self.parents[i]
                        .iter()
                        .all(|&p| self.nodes[p].kind == NodeKind::Fact)
                    && !self.parents[i].is_empty()
            })
            .collect()
    }

    /// Serialized form: `{"name", "nodes": [{"id", "kind", "states", "bounds"?, "parents", "cpt"}]}`.
    pub fn to_json(&self) -> String {
        crate::json::to_string(&NetworkDoc {
            name: self.name.clone(),
            nodes: self.nodes.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDoc<S> =
            serde_json::from_str(text).map_err(|e| NetworkError::Json(e.to_string()))?;
        Self::new(doc.name, doc.nodes)
    }
}

fn topological_order<S>(
    nodes: &[NetworkNode<S>],
    parents: &[Vec<usize>],
    children: &[Vec<usize>],
) -> Result<Vec<usize>, NetworkError> {
    let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> =
        (0..nodes.len()).filter(|&i| pending[i] == 0).collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(next) = ready.pop_first() {
        order.push(next);
        for &c in &children[next] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() != nodes.len() {
        let stuck = (0..nodes.len()).find(|&i| pending[i] > 0).unwrap_or(0);
        return Err(NetworkError::Cycle(nodes[stuck].id.clone()));
    }
    Ok(order)
}
